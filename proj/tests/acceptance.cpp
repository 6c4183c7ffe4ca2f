// Acceptance suite: ten end-to-end checks, one PASS/FAIL line each. Runs every
// check even after a failure and exits nonzero if any fail.
#include "guiding/experiment.hpp"
#include "guiding/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace guiding;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double now_seconds(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// 1. scalar steady-state Riccati oracle
Outcome check_riccati_oracle() {
    const double rho = 10.0;
    const TimeGrid grid = TimeGrid::uniform(0.0, 10.0, 1000);
    const OpinionParams params{Vec::Zero(1), NetworkTopology::from_edges({}, 1), 1.0, 0.0,
                               HMode::linear};
    const ControlProblem problem{ObjectiveKind::LSOG, Vec::Zero(1), rho, grid, true};
    const auto coeffs = solve_lsog(problem, params, Mat::Zero(1001, 1));
    const double expected = rho * (std::sqrt(1.0 + 1.0 / rho) - 1.0);
    const double got = coeffs.v11.front()(0, 0);
    std::ostringstream os;
    os << "v11(0) = " << got << ", steady state " << expected;
    return {std::abs(got - expected) < 1e-3, os.str()};
}

// 2. linear-value solve with no excitation stays at -1
Outcome check_constant_linear_solution() {
    const TimeGrid grid = TimeGrid::uniform(0.0, 10.0, 200);
    const OpinionParams params{Vec::Constant(3, 0.2), NetworkTopology::from_edges({}, 3), 1.0,
                               0.2, HMode::linear};
    const ControlProblem problem{ObjectiveKind::OIM, Vec(), 10.0, grid, true};
    const auto coeffs = solve_oim(problem, params, Mat::Ones(201, 3));
    const double dev = (coeffs.v1.array() + 1.0).abs().maxCoeff();
    std::ostringstream os;
    os << "max |v1 + 1| = " << dev;
    return {dev < 1e-8, os.str()};
}

// 3. one-step drift of random quadratic value functions
Outcome check_ito_drift() {
    const auto topo = NetworkTopology::random(3, 0.6, 0.0, 0.3, 41);
    Rng rng = make_rng(17);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    int hits = 0;
    for (int v = 0; v < 5; ++v) {
        Mat m(3, 3);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) m(r, c) = unif(rng);
        const Mat v11 = 0.5 * (m + m.transpose());
        Vec v1(3), b(3), u(3);
        for (int i = 0; i < 3; ++i) {
            v1(i) = unif(rng);
            b(i) = unif(rng);
            u(i) = unif(rng);
        }
        const OpinionParams params{b, topo, 1.0, 0.2, HMode::linear};
        const Vec lam = Vec::Constant(3, 1.5);
        for (int s = 0; s < 5; ++s) {
            Vec x(3);
            for (int i = 0; i < 3; ++i) x(i) = 2.0 * unif(rng);
            const auto check = verify_ito_drift(unif(rng), v1, v11, params, lam, x, u, 1e-3,
                                                100000, 100 * v + s);
            if (std::abs(check.mc_estimate - check.analytic) < 3.0 * check.std_error) ++hits;
        }
    }
    std::ostringstream os;
    os << hits << "/25 within 3 standard errors";
    return {hits >= 24, os.str()};
}

// 4. self-exciting stationary rate and residual goodness of fit
Outcome check_hawkes_stationarity() {
    std::vector<Edge> self = {Edge{0, 0, 0.5}};
    const HawkesParams params{Vec::Ones(1), NetworkTopology::from_edges(self, 1, true), 1.0};
    const EventLog log = thinning_simulate(params, 0.0, 2000.0, 4242);
    const double rate = static_cast<double>(log.events.size()) / 2000.0;

    // unit-rate residuals: compensator increments between consecutive events
    std::vector<double> inc;
    double s = 0.0;
    double t_prev = 0.0;
    for (const Event& e : log.events) {
        const double dt = e.t - t_prev;
        inc.push_back(1.0 * dt + 0.5 * s * (1.0 - std::exp(-dt)));
        s = s * std::exp(-dt) + 1.0;
        t_prev = e.t;
    }
    std::sort(inc.begin(), inc.end());
    double ks = 0.0;
    const double n = static_cast<double>(inc.size());
    for (std::size_t i = 0; i < inc.size(); ++i) {
        const double f = 1.0 - std::exp(-inc[i]);
        ks = std::max(ks, std::abs(f - static_cast<double>(i) / n));
        ks = std::max(ks, std::abs(f - static_cast<double>(i + 1) / n));
    }
    const double crit = 1.6276 / std::sqrt(n);
    std::ostringstream os;
    os << "rate " << rate << " (target 2.0), KS " << ks << " < " << crit;
    return {std::abs(rate - 2.0) < 0.1 && ks < crit, os.str()};
}

// 5. closed-loop policy against an exhaustive open-loop grid search
Outcome check_brute_force_optimality() {
    const int segments = 5, levels = 41, substeps = 10;
    const int m = segments * substeps;
    const double t1 = 5.0, rho = 1.0, a = 1.0, b = 0.0, x0 = 0.0;
    const TimeGrid grid = TimeGrid::uniform(0.0, t1, m);
    const double dt = grid.dt();

    const OpinionParams params{Vec::Constant(1, b), NetworkTopology::from_edges({}, 1), 1.0, 0.0,
                               HMode::linear};
    const ControlProblem problem{ObjectiveKind::LSOG, Vec::Constant(1, a), rho, grid, true};

    // closed-loop cost: deterministic since theta = 0 and no events
    const auto coeffs = solve_lsog(problem, params, Mat::Zero(m + 1, 1));
    const HjbPolicy policy(coeffs, rho);
    EventLog no_events;
    no_events.t1 = t1;
    const Trajectory traj =
        euler_simulate(params, policy, no_events, Vec::Constant(1, x0), grid, 0);
    const double hjb_cost = evaluate_cost(traj, problem).total;

    // one Euler segment under constant control: x' = c0 + cx x + cu u plus a
    // quadratic running cost in (x, u), identical for every segment
    double c0 = 0.0, cx = 1.0, cu = 0.0;
    double k00 = 0.0, kx = 0.0, ku = 0.0, kxx = 0.0, kuu = 0.0, kxu = 0.0;
    for (int s = 0; s < substeps; ++s) {
        // left-endpoint running cost of the current affine state
        const double d0 = c0 - a;
        k00 += 0.5 * dt * d0 * d0 + 0.0;
        kx += dt * d0 * cx;
        ku += dt * d0 * cu;
        kxx += 0.5 * dt * cx * cx;
        kuu += 0.5 * dt * cu * cu + 0.0;
        kxu += dt * cx * cu;
        kuu += 0.5 * rho * dt; // control effort
        // Euler step
        c0 = (1.0 - dt) * c0 + dt * b;
        cx = (1.0 - dt) * cx;
        cu = (1.0 - dt) * cu + dt;
    }

    std::vector<double> level(levels);
    for (int i = 0; i < levels; ++i) level[static_cast<std::size_t>(i)] = -2.0 + 0.1 * i;

    double best = std::numeric_limits<double>::infinity();
    // depth-first over the 41^5 tables with cost-based pruning
    const std::function<void(int, double, double)> descend = [&](int depth, double x,
                                                                 double cost) {
        if (cost >= best) return;
        if (depth == segments) {
            const double d = x - a;
            best = std::min(best, cost + 0.5 * d * d);
            return;
        }
        for (int i = 0; i < levels; ++i) {
            const double u = level[static_cast<std::size_t>(i)];
            const double seg = k00 + kx * x + ku * u + kxx * x * x + kuu * u * u + kxu * x * u;
            descend(depth + 1, c0 + cx * x + cu * u, cost + seg);
        }
    };
    descend(0, x0, 0.0);

    std::ostringstream os;
    os << "closed-loop cost " << hjb_cost << " vs best grid-search " << best;
    return {hjb_cost <= best + 1e-2, os.str()};
}

// 6. scaled method comparison under common random numbers
Outcome check_scaled_comparison() {
    ExperimentConfig cfg;
    cfg.model.num_users = 100;
    cfg.problem.t0 = 0.0;
    cfg.problem.t1 = 10.0;
    cfg.problem.steps = 100;
    cfg.problem.rho = 10.0;
    cfg.model.theta = 0.2;
    cfg.model.x0 = -10.0;
    cfg.n_runs = 10;
    cfg.seed = 99;
    cfg.methods = {"hjb", "ce", "fd", "greedy", "constant"};
    cfg.method_configs = {
        {"ce", {{"population_size", 40}, {"elite_fraction", 0.1}, {"max_iters", 8},
                {"opt_runs", 2}}},
        {"fd", {{"max_iters", 1}, {"opt_runs", 1}, {"perturbation", 1e-2}, {"step_size", 0.05}}},
        {"greedy", {{"k_levels", {1.0, 2.0, 5.0}}, {"n_levels", {1, 10, 100}}}},
    };
    const auto report = run_experiment(cfg);

    double hjb_mean = 0.0, hjb_var = 0.0;
    for (const auto& m : report.methods)
        if (m.name == "hjb") {
            hjb_mean = m.cost.mean;
            hjb_var = m.cost.variance;
        }
    bool pass = true;
    std::ostringstream os;
    os.precision(5);
    for (const auto& m : report.methods) {
        os << m.name << " " << m.cost.mean << " (var " << m.cost.variance << ") ";
        if (m.name == "hjb") continue;
        if (!(hjb_mean < m.cost.mean) || !(hjb_var <= m.cost.variance)) pass = false;
    }
    return {pass, os.str()};
}

// 7. mean reversion of the uncontrolled diffusion
Outcome check_mean_reversion() {
    const double b = 0.5, x0 = -1.5, theta = 0.2, t1 = 2.0;
    const TimeGrid grid = TimeGrid::uniform(0.0, t1, 400);
    const OpinionParams params{Vec::Constant(1, b), NetworkTopology::from_edges({}, 1), 1.0,
                               theta, HMode::linear};
    EventLog no_events;
    no_events.t1 = t1;
    const auto policy = zero_policy(1);

    const int n_runs = 1000;
    double sum = 0.0, sum2 = 0.0;
    for (int r = 0; r < n_runs; ++r) {
        const Trajectory traj = euler_simulate(params, *policy, no_events,
                                               Vec::Constant(1, x0), grid, derive_seed(55, r));
        const double xt = traj.x(400, 0);
        sum += xt;
        sum2 += xt * xt;
    }
    const double mc = sum / n_runs;
    const double var = (sum2 - sum * sum / n_runs) / (n_runs - 1);
    const double se = std::sqrt(var / n_runs);
    const double expected = b + (x0 - b) * std::exp(-t1);
    std::ostringstream os;
    os << "mean x(T) " << mc << " vs " << expected << " (3 SE = " << 3.0 * se << ")";
    return {std::abs(mc - expected) < 3.0 * se + 1e-3, os.str()};
}

// 8. control magnitude shrinks as the effort price grows
Outcome check_budget_monotonicity() {
    ExperimentConfig cfg;
    cfg.model.num_users = 100;
    cfg.model.x0 = -10.0;
    cfg.seed = 3;
    const auto instance = build_instance(cfg);

    // deterministic mean path: no diffusion, no events
    OpinionParams quiet = instance.model.opinion;
    quiet.theta = 0.0;
    EventLog no_events;
    no_events.t0 = instance.problem.grid.t0;
    no_events.t1 = instance.problem.grid.t1;

    const auto sup_control = [&](double rho) {
        ControlProblem problem = instance.problem;
        problem.rho = rho;
        const HjbPolicy policy(solve_lsog(problem, instance.model.opinion, instance.lam_path),
                               rho);
        const Trajectory traj = euler_simulate(quiet, policy, no_events, instance.model.x0,
                                               instance.problem.grid, 0);
        double sup = 0.0;
        for (int k = 0; k < traj.grid.size(); ++k)
            sup = std::max(sup, traj.u.row(k).norm());
        return sup;
    };

    const double s1 = sup_control(1.0);
    const double s10 = sup_control(10.0);
    const double s100 = sup_control(100.0);
    const double s1e6 = sup_control(1e6);
    std::ostringstream os;
    os << "sup|u|: " << s1 << " >= " << s10 << " >= " << s100 << "; rho=1e6 -> " << s1e6;
    return {s1 >= s10 && s10 >= s100 && s1e6 < 1e-3 * s1, os.str()};
}

// 9. time-varying network: estimation, expectation, node-birth equivalence
Outcome check_dynamic_network() {
    std::ostringstream os;
    bool pass = true;

    // planted-rate recovery over 10 seeds
    const double g = 0.3;
    const auto model = make_link_model(30, Vec::Constant(30, g), {}, 1.0);
    double mean = 0.0;
    for (int seed = 0; seed < 10; ++seed) {
        const auto events = simulate_link_creation(model, 10.0, 600 + seed);
        mean += fit_gamma(events, model, 10.0).gamma.mean();
    }
    mean /= 10.0;
    os << "gamma " << mean << " (target 0.3)";
    if (std::abs(mean - g) > 0.1 * g) pass = false;

    // expected adjacency against simulated link frequency
    const auto small = make_link_model(4, Vec::Constant(4, 0.3), {}, 1.0);
    for (const double t : {1.0, 2.0, 5.0}) {
        const int n_runs = 20000;
        Mat freq = Mat::Zero(4, 4);
        for (int r = 0; r < n_runs; ++r) {
            const auto events = simulate_link_creation(small, t, derive_seed(888, r));
            for (const LinkEvent& e : events.records) freq(e.target, e.source) += 1.0;
        }
        freq /= n_runs;
        const double err = (freq - expected_adjacency(small, t)).cwiseAbs().maxCoeff();
        os << ", adj err(t=" << t << ") " << err;
        if (err > 0.02) pass = false;
    }

    // node births mapped into links give the identical backward solve
    std::vector<BirthEvent> births = {BirthEvent{0.5, 2, 0}, BirthEvent{1.0, 3, 1}};
    std::vector<Edge> initial = {Edge{1, 0, 0.2}};
    const Vec gamma = Vec::Constant(4, 0.25);
    auto [events, mapped] = node_birth_to_links(births, 4, gamma, initial, 0.1, 2.0);

    LinkCreationModel manual;
    manual.num_users = 4;
    manual.gamma = gamma;
    manual.initial_edges = initial;
    manual.nominal_weight = 0.1;
    manual.candidates = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
    manual.candidates[0] = {2, 3}; // 0 -> 1 already linked
    manual.birth_times = {0.0, 0.0, 0.5, 1.0};

    const TimeGrid grid = TimeGrid::uniform(0.0, 2.0, 20);
    const OpinionParams params{Vec::Zero(4),
                               NetworkTopology::from_edges({Edge{1, 0, 0.2}}, 4), 1.0, 0.2,
                               HMode::linear};
    const ControlProblem problem{ObjectiveKind::LSOG, Vec::Ones(4), 10.0, grid, true};
    const Mat lam = Mat::Ones(21, 4);
    const auto solve_with = [&](const LinkCreationModel& lm) {
        const AdjacencyAt adj = [&lm](double t) { return expected_adjacency(lm, t); };
        return solve_lsog_dynamic(problem, params, lam, adj);
    };
    const auto from_mapped = solve_with(mapped);
    const auto from_manual = solve_with(manual);
    const double diff =
        (from_mapped.v11.front() - from_manual.v11.front()).cwiseAbs().maxCoeff();
    os << ", birth-mapping v11 diff " << diff;
    if (!(diff <= 1e-12)) pass = false;
    for (std::size_t i = 0; i < births.size(); ++i) {
        if (events.records[i].t != births[i].t || events.records[i].source != births[i].node)
            pass = false;
    }
    return {pass, os.str()};
}

// 10. sparse intensity algebra against dense rank-one sums
Outcome check_algebra_oracles() {
    Rng rng = make_rng(1234);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst = 0.0;
    bool exact = true;
    for (int rep = 0; rep < 100; ++rep) {
        const int n = 2 + static_cast<int>(unif(rng) * 7);
        const auto topo = NetworkTopology::random(n, 0.5, 0.0, 1.0, 5000 + rep);
        Vec lam(n);
        for (int i = 0; i < n; ++i) lam(i) = 2.0 * unif(rng);
        Mat sym = Mat::Zero(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j) sym(i, j) = sym(j, i) = unif(rng) - 0.5;

        Mat naive_lambda = Mat::Zero(n, n);
        Mat naive_jump = Mat::Zero(n, n);
        for (int j = 0; j < n; ++j) {
            Mat bj = Mat::Zero(n, n);
            bj.col(j) = topo.column_of(j);
            naive_lambda += lam(j) * bj;
            naive_jump += lam(j) * bj.transpose() * sym * bj;
        }
        if ((assemble_lambda_matrix(topo, lam) - naive_lambda).cwiseAbs().maxCoeff() != 0.0)
            exact = false;
        const double err =
            (jump_quadratic_contraction(topo, lam, sym) - naive_jump).cwiseAbs().maxCoeff() /
            (1.0 + naive_jump.cwiseAbs().maxCoeff());
        worst = std::max(worst, err);
    }
    std::ostringstream os;
    os << (exact ? "rank-one sums exact" : "rank-one sum mismatch") << ", contraction err "
       << worst;
    return {exact && worst <= 1e-12, os.str()};
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        double time_limit; // seconds
        Outcome (*run)();
    };
    const std::vector<Criterion> criteria = {
        {"steady-state Riccati oracle", 1.0, check_riccati_oracle},
        {"constant linear-value solution", 1.0, check_constant_linear_solution},
        {"one-step drift of quadratic values", 120.0, check_ito_drift},
        {"self-exciting stationarity and residuals", 60.0, check_hawkes_stationarity},
        {"closed loop beats exhaustive open loop", 60.0, check_brute_force_optimality},
        {"scaled five-method comparison", 300.0, check_scaled_comparison},
        {"mean reversion of the free diffusion", 60.0, check_mean_reversion},
        {"control shrinks with the effort price", 120.0, check_budget_monotonicity},
        {"time-varying network round trip", 120.0, check_dynamic_network},
        {"sparse intensity algebra", 10.0, check_algebra_oracles},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = criteria[i].run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        const double elapsed = now_seconds(start);
        const bool in_time = elapsed < criteria[i].time_limit;
        const bool pass = outcome.pass && in_time;
        if (!pass) ++failures;
        std::printf("%s %2zu %s [%.2fs] — %s%s\n", pass ? "PASS" : "FAIL", i + 1,
                    criteria[i].name, elapsed, outcome.detail.c_str(),
                    in_time ? "" : " (over time budget)");
        std::fflush(stdout);
    }
    if (failures > 0) std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
