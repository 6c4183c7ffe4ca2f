#pragma once

#include "guiding/network.hpp"
#include "guiding/ode.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace guiding {

struct Event {
    double t = 0.0;
    int user = 0;
};

/// Time-sorted record of events on [t0, t1) with the seed that produced it.
struct EventLog {
    std::vector<Event> events;
    double t0 = 0.0;
    double t1 = 0.0;
    std::uint64_t seed = 0;

    void validate(int num_users) const;
};

/// Conditional intensity at time t given events strictly before t, computed by
/// the O(1)-per-event decay-then-add recursion on the per-user kernel sums.
/// With include_events_at_t the events at exactly t are counted at kernel value
/// one, giving the right limit lambda(t+).
Vec intensity_at(const HawkesParams& params, const EventLog& events, double t,
                 bool include_events_at_t = false);

/// Ogata thinning with the piecewise-constant proposal bound sum_i lambda_i(t+),
/// valid because the exponential kernel is non-increasing between events. The
/// generating user is drawn proportional to lambda_i at the accepted time.
EventLog thinning_simulate(const HawkesParams& params, double t0, double t1, std::uint64_t seed,
                           std::size_t max_events = 10'000'000);

/// Deterministic mean intensity path: forward solution of
/// d lambda = omega1 (eta - lambda) dt + B lambda dt with lambda(t0) = eta.
/// Row k holds the mean intensity at tau_k.
Mat mean_intensity_path(const HawkesParams& params, const TimeGrid& grid,
                        const SolverConfig& config = {});

/// Mean intensity continuation started from an arbitrary state at grid.t0.
Mat mean_intensity_path_from(const HawkesParams& params, const Vec& lam0, const TimeGrid& grid,
                             const SolverConfig& config = {});

struct SurvivalOutcome {
    int i = 0;
    int j = 0;
    std::optional<double> time; // infection time, censored at t1
};

/// Each pair infects at an independent exponential(eta_ij) time, at most once.
std::vector<SurvivalOutcome> survival_simulate(const SurvivalRates& rates, double t0, double t1,
                                               std::uint64_t seed);

} // namespace guiding
