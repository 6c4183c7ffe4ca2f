#include "guiding/sdesim.hpp"

#include "guiding/rng.hpp"

#include <cmath>
#include <future>
#include <sstream>
#include <thread>

namespace guiding {

std::shared_ptr<Policy> constant_policy(Vec u0) {
    return std::make_shared<ConstantPolicy>(std::move(u0));
}

std::shared_ptr<Policy> zero_policy(int num_users) {
    return std::make_shared<ConstantPolicy>(Vec::Zero(num_users));
}

namespace {

void abort_nonfinite(int step, double t) {
    std::ostringstream os;
    os << "euler_simulate: non-finite state at step " << step << " (t = " << t << ")";
    throw std::runtime_error(os.str());
}

} // namespace

Trajectory euler_simulate(const OpinionParams& params, const Policy& policy,
                          const EventLog& events, const Vec& x0, const TimeGrid& grid,
                          std::uint64_t noise_seed) {
    params.validate();
    const int n = params.topology.num_users();
    if (x0.size() != n) throw std::invalid_argument("euler_simulate: x0 length mismatch");
    events.validate(n);

    const int m = grid.steps;
    const double dt = grid.dt();
    const double sqrt_dt = std::sqrt(dt);

    Trajectory traj;
    traj.grid = grid;
    traj.x = Mat::Zero(m + 1, n);
    traj.u = Mat::Zero(m + 1, n);
    traj.events = events;
    traj.noise_seed = noise_seed;
    traj.x.row(0) = x0.transpose();

    Rng rng = make_rng(derive_seed(noise_seed, stream::noise));
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::size_t next_event = 0;
    Vec x = x0;
    for (int k = 0; k < m; ++k) {
        const double t = grid.point(k);
        const double t_next = grid.point(k + 1);
        const Vec u = policy.evaluate(x, t);
        if (static_cast<int>(u.size()) != n)
            throw std::invalid_argument("euler_simulate: policy output length mismatch");
        traj.u.row(k) = u.transpose();

        Vec x_next = x + params.omega2 * (params.b + u - x) * dt;
        if (params.theta > 0.0) {
            for (int i = 0; i < n; ++i) x_next(i) += params.theta * sqrt_dt * gauss(rng);
        }
        // all user-j events in [tau_k, tau_{k+1}); jump uses the pre-step state
        while (next_event < events.events.size() && events.events[next_event].t < t_next) {
            const int j = events.events[next_event].user;
            const double hj = params.h_mode == HMode::linear ? x(j) : 1.0;
            for (const auto& [i, w] : params.topology.column_entries(j)) x_next(i) += w * hj;
            ++next_event;
        }
        if (!x_next.allFinite()) abort_nonfinite(k + 1, t_next);
        x = x_next;
        traj.x.row(k + 1) = x.transpose();
    }
    traj.u.row(m) = policy.evaluate(x, grid.t1).transpose();
    return traj;
}

Trajectory cosimulate(const OpinionParams& params, const HawkesParams& hawkes,
                      const Policy& policy, const Vec& x0, const TimeGrid& grid,
                      std::uint64_t seed) {
    hawkes.validate();
    const EventLog events =
        thinning_simulate(hawkes, grid.t0, grid.t1, derive_seed(seed, stream::events));
    return euler_simulate(params, policy, events, x0, grid, derive_seed(seed, stream::noise));
}

Trajectory simulate_controlled_intensity(const HawkesParams& hawkes, const Policy& policy,
                                         const TimeGrid& grid, std::uint64_t seed) {
    hawkes.validate();
    const int n = hawkes.topology.num_users();
    const int m = grid.steps;
    const double dt = grid.dt();

    Trajectory traj;
    traj.grid = grid;
    traj.x = Mat::Zero(m + 1, n);
    traj.u = Mat::Zero(m + 1, n);
    traj.events.t0 = grid.t0;
    traj.events.t1 = grid.t1;
    traj.events.seed = seed;
    traj.noise_seed = seed;

    Rng rng = make_rng(derive_seed(seed, stream::events));
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Vec lam = hawkes.eta;
    traj.x.row(0) = lam.transpose();
    for (int k = 0; k < m; ++k) {
        const double t = grid.point(k);
        const double t_next = grid.point(k + 1);
        const Vec u = policy.evaluate(lam, t);
        traj.u.row(k) = u.transpose();

        // Events within the step: the drift is frozen on the step, so the
        // intensity is piecewise constant between jumps and the proposal bound
        // is exact.
        Vec lam_jump = lam;
        Vec jump_accum = Vec::Zero(n);
        double tc = t;
        while (true) {
            const double bound = lam_jump.sum();
            if (bound <= 0.0) break;
            tc += -std::log(1.0 - unif(rng)) / bound;
            if (tc >= t_next) break;
            double r = unif(rng) * bound;
            int user = n - 1;
            for (int i = 0; i < n; ++i) {
                r -= lam_jump(i);
                if (r <= 0.0) {
                    user = i;
                    break;
                }
            }
            traj.events.events.push_back(Event{tc, user});
            if (traj.events.events.size() > 10'000'000)
                throw std::runtime_error("simulate_controlled_intensity: event explosion");
            const Vec beta_col = hawkes.topology.column_of(user);
            lam_jump += beta_col;
            jump_accum += beta_col;
        }

        Vec lam_next = lam + hawkes.omega1 * (hawkes.eta + u - lam) * dt + jump_accum;
        lam_next = lam_next.cwiseMax(0.0); // intensities stay nonnegative
        if (!lam_next.allFinite()) abort_nonfinite(k + 1, t_next);
        lam = lam_next;
        traj.x.row(k + 1) = lam.transpose();
    }
    traj.u.row(m) = policy.evaluate(lam, grid.t1).transpose();
    return traj;
}

CostBreakdown evaluate_cost(const Trajectory& traj, const ControlProblem& problem) {
    const int n = static_cast<int>(traj.x.cols());
    problem.validate(n);
    if (!(traj.grid == problem.grid))
        throw std::invalid_argument("evaluate_cost: trajectory grid does not match problem grid");

    const int m = problem.grid.steps;
    const double dt = problem.grid.dt();
    CostBreakdown out;
    for (int k = 0; k < m; ++k) {
        if (problem.running_state_cost) {
            if (problem.kind == ObjectiveKind::LSOG) {
                const Vec d = traj.x.row(k).transpose() - problem.target;
                out.state_cost += 0.5 * d.squaredNorm() * dt;
            } else {
                out.state_cost += -traj.x.row(k).sum() * dt;
            }
        }
        out.control_cost += 0.5 * problem.rho * traj.u.row(k).squaredNorm() * dt;
    }
    if (problem.kind == ObjectiveKind::LSOG) {
        const Vec d = traj.x.row(m).transpose() - problem.target;
        out.terminal_cost = 0.5 * d.squaredNorm();
    } else {
        out.terminal_cost = -traj.x.row(m).sum();
    }
    out.total = out.state_cost + out.control_cost + out.terminal_cost;
    return out;
}

MonteCarloCost monte_carlo_cost(const Policy& policy, const ControlProblem& problem,
                                const SimModel& model, int n_runs, std::uint64_t seed) {
    if (n_runs < 1) throw std::invalid_argument("monte_carlo_cost: n_runs must be >= 1");
    MonteCarloCost out;
    out.runs.resize(static_cast<std::size_t>(n_runs));

    const auto run_one = [&](int r) {
        try {
            const Trajectory traj = cosimulate(model.opinion, model.hawkes, policy, model.x0,
                                               problem.grid, derive_seed(seed, stream::run_base + r));
            out.runs[static_cast<std::size_t>(r)] = evaluate_cost(traj, problem);
        } catch (const std::exception& e) {
            std::ostringstream os;
            os << "monte_carlo_cost: run " << r << " failed: " << e.what();
            throw std::runtime_error(os.str());
        }
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const int workers = std::min<int>(static_cast<int>(hw), n_runs);
    if (workers > 1) {
        std::vector<std::future<void>> futs;
        futs.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            futs.push_back(std::async(std::launch::async, [&, w] {
                for (int r = w; r < n_runs; r += workers) run_one(r);
            }));
        }
        for (auto& f : futs) f.get();
    } else {
        for (int r = 0; r < n_runs; ++r) run_one(r);
    }

    double sum = 0.0;
    for (const CostBreakdown& c : out.runs) sum += c.total;
    out.mean = sum / n_runs;
    if (n_runs > 1) {
        double ss = 0.0;
        for (const CostBreakdown& c : out.runs) ss += (c.total - out.mean) * (c.total - out.mean);
        out.variance = ss / (n_runs - 1);
        out.variance_defined = true;
    }
    return out;
}

} // namespace guiding
