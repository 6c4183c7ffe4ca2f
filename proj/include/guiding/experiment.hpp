#pragma once

#include "guiding/baselines.hpp"
#include "guiding/dynnet.hpp"
#include "guiding/hjb.hpp"
#include "guiding/io.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace guiding {

struct ModelSection {
    int num_users = 100;
    double sparsity = 0.001;
    double alpha_lo = 0.0, alpha_hi = 0.01; // opinion influence weights
    double beta_lo = 0.0, beta_hi = 0.01;   // excitation weights (same support)
    double eta = 1.0;                        // base intensity, broadcast
    double omega1 = 1.0;
    double omega2 = 1.0;
    double theta = 0.2;
    double b_lo = -1.0, b_hi = 1.0; // base opinion, uniform
    double x0 = -10.0;
    HMode h_mode = HMode::linear;
};

struct ProblemSection {
    ObjectiveKind kind = ObjectiveKind::LSOG;
    double target = 1.0; // broadcast, LSOG only
    double rho = 10.0;
    double t0 = 0.0, t1 = 10.0;
    int steps = 100;
    bool running_cost = true;
};

struct DynamicSection {
    bool enabled = false;
    double gamma = 0.0;          // per-node link-creation rate, broadcast
    double nominal_weight = 0.0; // 0 = mean of existing weights
};

enum class LamMode { mean, replan };

struct ExperimentConfig {
    ModelSection model;
    ProblemSection problem;
    std::vector<std::string> methods = {"hjb", "ce", "fd", "greedy", "constant"};
    io::json method_configs = io::json::object();
    int n_runs = 10;
    std::uint64_t seed = 0;
    LamMode lam_mode = LamMode::mean;
    DynamicSection dynamic;

    static ExperimentConfig from_json(const io::json& j);
    io::json to_json() const;

    void validate() const;
};

/// Materialized model instance: topology, parameters and problem built from the
/// config's seeds.
struct ExperimentInstance {
    SimModel model;
    ControlProblem problem;
    Mat lam_path; // mean-field intensity on the problem grid
};

ExperimentInstance build_instance(const ExperimentConfig& config);

struct MethodResult {
    std::string name;
    MonteCarloCost cost;
    double wall_seconds = 0.0;
    std::vector<double> inst_mean; // per-user instantaneous cost path over runs
    std::vector<double> inst_std;
    Trajectory sample;                     // run 0
    std::vector<std::uint64_t> event_hashes; // per run, for the CRN contract
    io::json extra = io::json::object();
};

struct ComparisonReport {
    ExperimentConfig config;
    std::vector<MethodResult> methods;
};

/// Evaluates one policy on the common-random-number run block shared by every
/// method of the experiment.
MethodResult evaluate_policy_crn(const std::string& name, const Policy& policy,
                                 const ExperimentInstance& instance, int n_runs,
                                 std::uint64_t master_seed);

ComparisonReport run_experiment(const ExperimentConfig& config);

/// Writes summary.json, instantaneous_cost.csv, trajectories.csv and
/// config.echo.json under out_dir (created if missing). Idempotent.
void emit_reports(const ComparisonReport& report, const std::string& out_dir);

std::uint64_t event_log_hash(const EventLog& log);

/// Receding-horizon control: at every grid step the backward ODEs are re-solved
/// over the remaining horizon with the realized intensity continued by the
/// mean-field ODE. Expensive; intended for small networks.
Trajectory simulate_with_replanning(const ExperimentInstance& instance, std::uint64_t run_seed,
                                    const SolverConfig& config = {});

} // namespace guiding
