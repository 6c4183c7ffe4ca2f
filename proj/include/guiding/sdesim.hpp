#pragma once

#include "guiding/pointproc.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace guiding {

/// Deterministic state-feedback policy u(x, t).
class Policy {
public:
    virtual ~Policy() = default;
    virtual Vec evaluate(const Vec& x, double t) const = 0;
};

class ConstantPolicy final : public Policy {
public:
    explicit ConstantPolicy(Vec u0) : u0_(std::move(u0)) {
        if (!u0_.allFinite()) throw std::invalid_argument("ConstantPolicy: non-finite control");
    }
    Vec evaluate(const Vec&, double) const override { return u0_; }

private:
    Vec u0_;
};

/// The Slant-style open-loop baseline and the zero (uncontrolled) policy.
std::shared_ptr<Policy> constant_policy(Vec u0);
std::shared_ptr<Policy> zero_policy(int num_users);

struct Trajectory {
    TimeGrid grid;
    Mat x;           // (m+1) x U state path
    Mat u;           // (m+1) x U applied control (row m is the terminal evaluation)
    EventLog events;
    std::uint64_t noise_seed = 0;
};

struct CostBreakdown {
    double state_cost = 0.0;
    double control_cost = 0.0;
    double terminal_cost = 0.0;
    double total = 0.0;
};

/// Forward Euler on the opinion SDE:
///   x(k+1) = x(k) + omega2 (b + u(k) - x(k)) dt + theta dw(k) + sum_j alpha_.j h(x_j(k)) dN_j(k)
/// with dN_j(k) the number of user-j events in [tau_k, tau_{k+1}) and jump
/// increments evaluated at the pre-step state.
Trajectory euler_simulate(const OpinionParams& params, const Policy& policy,
                          const EventLog& events, const Vec& x0, const TimeGrid& grid,
                          std::uint64_t noise_seed);

/// Thinning-generated events plus Euler dynamics; one seed drives both streams.
Trajectory cosimulate(const OpinionParams& params, const HawkesParams& hawkes,
                      const Policy& policy, const Vec& x0, const TimeGrid& grid,
                      std::uint64_t seed);

/// Controlled Hawkes intensity: the state is lambda itself, jumps are generated
/// by thinning against the current controlled lambda (piecewise-constant within
/// a grid step), and lambda is clamped at zero after each Euler step.
Trajectory simulate_controlled_intensity(const HawkesParams& hawkes, const Policy& policy,
                                         const TimeGrid& grid, std::uint64_t seed);

/// Left-endpoint rectangle quadrature matching the Euler scheme.
/// LSOG: q = 0.5 ||x - a||^2 (when running cost is on), phi = 0.5 ||x(T) - a||^2.
/// OIM:  q = -sum_u x_u, phi = -sum_u x_u(T).
/// Control cost is always sum_k (rho/2) ||u(tau_k)||^2 dt.
CostBreakdown evaluate_cost(const Trajectory& traj, const ControlProblem& problem);

struct SimModel {
    OpinionParams opinion;
    HawkesParams hawkes;
    Vec x0;
};

struct MonteCarloCost {
    double mean = 0.0;
    double variance = 0.0;
    bool variance_defined = false; // false for a single run
    std::vector<CostBreakdown> runs;
};

/// n_runs independent cosimulate + evaluate_cost with per-run derived seeds.
/// Runs execute concurrently; the reduction order is fixed for bit stability.
MonteCarloCost monte_carlo_cost(const Policy& policy, const ControlProblem& problem,
                                const SimModel& model, int n_runs, std::uint64_t seed);

} // namespace guiding
