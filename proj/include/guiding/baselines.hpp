#pragma once

#include "guiding/sdesim.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace guiding {

/// Open-loop policy: one stored control vector per grid interval; evaluate
/// ignores the state and returns the interval's entry.
class PiecewiseConstantPolicy final : public Policy {
public:
    PiecewiseConstantPolicy(TimeGrid grid, Mat u_table);

    Vec evaluate(const Vec&, double t) const override;

    const Mat& table() const { return u_table_; }
    const TimeGrid& grid() const { return grid_; }

private:
    TimeGrid grid_;
    Mat u_table_; // m x U
};

/// Cost of a candidate control table; candidates within one optimizer iteration
/// are evaluated with common random numbers.
using TableCost = std::function<double(const Mat& u_table, std::uint64_t seed_block)>;

/// Monte-Carlo objective for the open-loop optimizers: mean cosimulate cost of
/// the piecewise-constant policy over `n_runs` with seeds derived from the block.
TableCost make_mc_table_cost(const ControlProblem& problem, const SimModel& model, int n_runs);

struct CEConfig {
    int population_size = 100;
    double elite_fraction = 0.1;
    double init_mean = 0.0;
    double init_stddev = 1.0;
    int max_iters = 50;
    double rel_tol = 1e-3;

    void validate() const;
};

struct FDConfig {
    double perturbation = 1e-3;
    double step_size = 0.1;
    int max_iters = 100;
    double rel_tol = 1e-6;

    void validate() const;
};

struct GreedyConfig {
    double multiplier = 1.0; // k >= 1
    int n_checkpoints = 10;
    double pulse = 1.0;      // c

    void validate() const;
};

struct OptimizeResult {
    std::shared_ptr<PiecewiseConstantPolicy> policy;
    std::vector<double> cost_history; // elite-mean (CE) or iterate (FD) cost per iteration
    bool stddev_collapsed = false;    // CE early stop flag
};

/// Elite refit of a diagonal Gaussian over the m x U control table.
OptimizeResult cross_entropy_optimize(const TimeGrid& grid, int num_users, const TableCost& cost,
                                      const CEConfig& config, std::uint64_t seed);

/// Central-difference gradient per table entry with common random numbers,
/// fixed-step descent.
OptimizeResult finite_difference_optimize(const TimeGrid& grid, int num_users,
                                          const TableCost& cost, const FDConfig& config,
                                          std::uint64_t seed);

/// Threshold rule: within each checkpoint interval, if the instantaneous state
/// cost of the current state exceeds multiplier times the reference value at
/// the interval's checkpoint, push toward the target (LSOG) or uniformly up
/// (OIM) with magnitude `pulse`; otherwise do nothing. The rule body is an
/// interpretation; the reference path comes from a solved closed-loop run.
std::shared_ptr<Policy> greedy_policy(const ControlProblem& problem,
                                      const std::vector<double>& reference_cost_path,
                                      const GreedyConfig& config);

} // namespace guiding
