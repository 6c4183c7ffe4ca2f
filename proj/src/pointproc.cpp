#include "guiding/pointproc.hpp"

#include "guiding/rng.hpp"

#include <cmath>
#include <sstream>

namespace guiding {

void EventLog::validate(int num_users) const {
    double last = -std::numeric_limits<double>::infinity();
    for (const Event& e : events) {
        if (e.t < t0 || e.t >= t1)
            throw std::invalid_argument("EventLog: event time outside horizon");
        if (e.t < last) throw std::invalid_argument("EventLog: events not time-sorted");
        if (e.user < 0 || e.user >= num_users)
            throw std::invalid_argument("EventLog: user index out of range");
        last = e.t;
    }
}

namespace {

// lambda = eta + A_beta * s, where s holds the per-user kernel sums.
Vec intensity_from_kernel_sums(const HawkesParams& params, const Vec& s) {
    Vec lam = params.eta;
    const int n = params.topology.num_users();
    for (int j = 0; j < n; ++j) {
        if (s(j) == 0.0) continue;
        for (const auto& [i, w] : params.topology.column_entries(j)) lam(i) += w * s(j);
    }
    return lam;
}

} // namespace

Vec intensity_at(const HawkesParams& params, const EventLog& events, double t,
                 bool include_events_at_t) {
    params.validate();
    if (t < events.t0) throw std::invalid_argument("intensity_at: t before horizon start");
    const int n = params.topology.num_users();
    Vec s = Vec::Zero(n);
    double last = events.t0;
    for (const Event& e : events.events) {
        if (e.t > t || (e.t == t && !include_events_at_t)) break;
        s *= std::exp(-params.omega1 * (e.t - last));
        s(e.user) += 1.0;
        last = e.t;
    }
    s *= std::exp(-params.omega1 * (t - last));
    return intensity_from_kernel_sums(params, s);
}

EventLog thinning_simulate(const HawkesParams& params, double t0, double t1, std::uint64_t seed,
                           std::size_t max_events) {
    params.validate();
    if (!(t1 > t0)) throw std::invalid_argument("thinning_simulate: empty horizon");
    const int n = params.topology.num_users();

    EventLog log;
    log.t0 = t0;
    log.t1 = t1;
    log.seed = seed;

    Rng rng = make_rng(derive_seed(seed, stream::events));
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Vec s = Vec::Zero(n); // kernel sums at t+
    double t = t0;
    while (true) {
        const Vec lam_now = intensity_from_kernel_sums(params, s);
        const double bound = lam_now.sum();
        if (bound <= 0.0) break;
        const double wait = -std::log(1.0 - unif(rng)) / bound;
        const double tc = t + wait;
        if (tc >= t1) break;
        const Vec s_cand = s * std::exp(-params.omega1 * wait);
        const Vec lam_cand = intensity_from_kernel_sums(params, s_cand);
        const double total = lam_cand.sum();
        if (total > bound * (1.0 + 1e-12))
            throw std::logic_error("thinning_simulate: proposal bound violated");
        t = tc;
        s = s_cand;
        if (unif(rng) * bound <= total) {
            // attribute the event proportional to the per-user intensity
            double r = unif(rng) * total;
            int user = n - 1;
            for (int i = 0; i < n; ++i) {
                r -= lam_cand(i);
                if (r <= 0.0) {
                    user = i;
                    break;
                }
            }
            log.events.push_back(Event{tc, user});
            s(user) += 1.0;
            if (log.events.size() > max_events) {
                std::ostringstream os;
                os << "thinning_simulate: exceeded " << max_events
                   << " events by t = " << tc << "; process may be supercritical";
                throw std::runtime_error(os.str());
            }
        }
    }
    return log;
}

Mat mean_intensity_path_from(const HawkesParams& params, const Vec& lam0, const TimeGrid& grid,
                             const SolverConfig& config) {
    params.validate();
    if (lam0.size() != params.eta.size())
        throw std::invalid_argument("mean_intensity_path: initial state length mismatch");
    const double guard = 1e12;
    VectorField field = [&params, guard](double, const Vec& lam) {
        if (lam.lpNorm<Eigen::Infinity>() > guard) {
            throw std::runtime_error(
                "mean_intensity_path: diverging mean intensity; spectral radius of "
                "(beta_ij / omega1) likely exceeds 1");
        }
        Vec d = params.omega1 * (params.eta - lam);
        const int n = params.topology.num_users();
        for (int j = 0; j < n; ++j) {
            if (lam(j) == 0.0) continue;
            for (const auto& [i, w] : params.topology.column_entries(j)) d(i) += w * lam(j);
        }
        return d;
    };
    return rk_integrate(field, lam0, grid, config, OdeDirection::forward);
}

Mat mean_intensity_path(const HawkesParams& params, const TimeGrid& grid,
                        const SolverConfig& config) {
    return mean_intensity_path_from(params, params.eta, grid, config);
}

std::vector<SurvivalOutcome> survival_simulate(const SurvivalRates& rates, double t0, double t1,
                                               std::uint64_t seed) {
    rates.validate();
    if (!(t1 > t0)) throw std::invalid_argument("survival_simulate: empty horizon");
    Rng rng = make_rng(derive_seed(seed, stream::events));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<SurvivalOutcome> out;
    out.reserve(rates.rates.size());
    for (const PairRate& r : rates.rates) {
        SurvivalOutcome o;
        o.i = r.i;
        o.j = r.j;
        if (r.rate > 0.0) {
            const double wait = -std::log(1.0 - unif(rng)) / r.rate;
            if (t0 + wait < t1) o.time = t0 + wait;
        }
        out.push_back(o);
    }
    return out;
}

} // namespace guiding
