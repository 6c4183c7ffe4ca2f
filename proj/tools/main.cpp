// Command-line front end: simulate / solve / control / baseline / fit-network /
// experiment, all driven by one JSON config document.

#include "guiding/experiment.hpp"
#include "guiding/rng.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <limits>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;
using guiding::io::json;

struct GlobalOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::string solver = "fixed_rk4";
    std::string lam_mode;
};

guiding::ExperimentConfig load_config(const GlobalOpts& g) {
    json j = json::object();
    if (!g.config_path.empty()) j = json::parse(guiding::io::read_file(g.config_path));
    guiding::ExperimentConfig config = guiding::ExperimentConfig::from_json(j);
    if (g.seed) config.seed = *g.seed;
    if (!g.lam_mode.empty()) {
        if (g.lam_mode == "mean")
            config.lam_mode = guiding::LamMode::mean;
        else if (g.lam_mode == "replan")
            config.lam_mode = guiding::LamMode::replan;
        else
            throw std::invalid_argument("unknown --lam-mode: " + g.lam_mode);
    }
    return config;
}

guiding::SolverConfig solver_config(const GlobalOpts& g) {
    guiding::SolverConfig cfg;
    if (g.solver == "fixed_rk4")
        cfg.method = guiding::OdeMethod::fixed_rk4;
    else if (g.solver == "dp45")
        cfg.method = guiding::OdeMethod::dormand_prince_45;
    else
        throw std::invalid_argument("unknown --solver: " + g.solver);
    return cfg;
}

void write_out(const GlobalOpts& g, const std::string& name, const std::string& contents) {
    fs::create_directories(g.out_dir);
    guiding::io::write_file((fs::path(g.out_dir) / name).string(), contents);
}

guiding::ValueCoefficients solve_coefficients(const guiding::ExperimentConfig& config,
                                              const guiding::ExperimentInstance& inst,
                                              const GlobalOpts& g) {
    const guiding::SolverConfig scfg = solver_config(g);
    if (inst.problem.kind == guiding::ObjectiveKind::LSOG)
        return guiding::solve_lsog(inst.problem, inst.model.opinion, inst.lam_path, scfg);
    return guiding::solve_oim(inst.problem, inst.model.opinion, inst.lam_path, scfg);
}

int cmd_simulate(const GlobalOpts& g) {
    const guiding::ExperimentConfig config = load_config(g);
    const guiding::ExperimentInstance inst = guiding::build_instance(config);
    const auto policy = guiding::zero_policy(config.model.num_users);
    const guiding::Trajectory traj = guiding::cosimulate(
        inst.model.opinion, inst.model.hawkes, *policy, inst.model.x0, inst.problem.grid,
        guiding::derive_seed(config.seed, guiding::stream::run_base));
    write_out(g, "events.csv", guiding::io::event_log_to_csv(traj.events));
    write_out(g, "trajectory.csv", guiding::io::trajectory_to_csv(traj));
    write_out(g, "cost.json",
              guiding::io::cost_breakdown_to_json(guiding::evaluate_cost(traj, inst.problem))
                      .dump(2) +
                  "\n");
    std::cout << "simulate: " << traj.events.events.size() << " events, outputs in " << g.out_dir
              << "\n";
    return 0;
}

int cmd_solve(const GlobalOpts& g) {
    const guiding::ExperimentConfig config = load_config(g);
    const guiding::ExperimentInstance inst = guiding::build_instance(config);
    const guiding::ValueCoefficients coeffs = solve_coefficients(config, inst, g);
    write_out(g, "coefficients.json", guiding::io::value_coefficients_to_json(coeffs).dump() + "\n");
    std::cout << "solve: coefficients on [" << coeffs.grid.t0 << ", " << coeffs.grid.t1 << "] with "
              << coeffs.grid.steps << " intervals written to " << g.out_dir << "\n";
    return 0;
}

int cmd_control(const GlobalOpts& g) {
    const guiding::ExperimentConfig config = load_config(g);
    const guiding::ExperimentInstance inst = guiding::build_instance(config);
    guiding::Trajectory traj;
    if (config.lam_mode == guiding::LamMode::replan) {
        traj = guiding::simulate_with_replanning(
            inst, guiding::derive_seed(config.seed, guiding::stream::run_base), solver_config(g));
    } else {
        const guiding::HjbPolicy policy(solve_coefficients(config, inst, g), inst.problem.rho);
        traj = guiding::cosimulate(inst.model.opinion, inst.model.hawkes, policy, inst.model.x0,
                                   inst.problem.grid,
                                   guiding::derive_seed(config.seed, guiding::stream::run_base));
    }
    const guiding::CostBreakdown cost = guiding::evaluate_cost(traj, inst.problem);
    write_out(g, "trajectory.csv", guiding::io::trajectory_to_csv(traj));
    write_out(g, "cost.json", guiding::io::cost_breakdown_to_json(cost).dump(2) + "\n");
    std::cout << "control: total cost " << cost.total << ", outputs in " << g.out_dir << "\n";
    return 0;
}

int cmd_baseline(const GlobalOpts& g, const std::string& method) {
    guiding::ExperimentConfig config = load_config(g);
    config.methods = {method};
    const guiding::ComparisonReport report = guiding::run_experiment(config);
    guiding::emit_reports(report, g.out_dir);
    const guiding::MethodResult& r = report.methods.at(0);
    if (r.extra.contains("cost_history")) {
        std::ostringstream os;
        os << "iter,mean_cost,best_cost\n";
        double best = std::numeric_limits<double>::infinity();
        int iter = 0;
        for (double c : r.extra.at("cost_history").get<std::vector<double>>()) {
            best = std::min(best, c);
            os << iter++ << "," << guiding::io::format_value(c) << ","
               << guiding::io::format_value(best) << "\n";
        }
        write_out(g, "cost_history.csv", os.str());
    }
    std::cout << "baseline " << method << ": mean cost " << r.cost.mean << ", outputs in "
              << g.out_dir << "\n";
    return 0;
}

int cmd_fit_network(const GlobalOpts& g, const std::string& events_path, int num_users, double t1) {
    const guiding::LinkEvents events =
        guiding::io::link_events_from_csv(guiding::io::read_file(events_path), 0.0, t1);
    const guiding::LinkCreationModel skeleton =
        guiding::make_link_model(num_users, guiding::Vec::Zero(num_users), {}, 1.0);
    const guiding::GammaFit fit = guiding::fit_gamma(events, skeleton, t1);
    write_out(g, "gamma.json", guiding::io::gamma_fit_to_json(fit).dump(2) + "\n");
    std::cout << "fit-network: " << fit.n_events << " link events, log-likelihood " << fit.loglik
              << ", outputs in " << g.out_dir << "\n";
    return 0;
}

int cmd_experiment(const GlobalOpts& g) {
    const guiding::ExperimentConfig config = load_config(g);
    const guiding::ComparisonReport report = guiding::run_experiment(config);
    guiding::emit_reports(report, g.out_dir);
    for (const guiding::MethodResult& m : report.methods) {
        std::cout << m.name << ": mean " << m.cost.mean;
        if (m.cost.variance_defined) std::cout << ", variance " << m.cost.variance;
        std::cout << " (" << m.wall_seconds << " s)\n";
    }
    std::cout << "reports written to " << g.out_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Activity guiding via stochastic optimal control of jump-diffusion SDEs"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "JSON config document");
    app.add_option("--out", g.out_dir, "output directory");
    std::uint64_t seed_opt = 0;
    auto* seed_flag = app.add_option("--seed", seed_opt, "master seed override");
    app.add_option("--solver", g.solver, "ODE solver: fixed_rk4 | dp45");
    app.add_option("--lam-mode", g.lam_mode, "intensity handling: mean | replan");

    auto* sub_simulate = app.add_subcommand("simulate", "uncontrolled co-simulation");
    auto* sub_solve = app.add_subcommand("solve", "backward ODE coefficient solve");
    auto* sub_control = app.add_subcommand("control", "closed-loop controlled simulation");
    auto* sub_baseline = app.add_subcommand("baseline", "run one baseline method");
    std::string method;
    sub_baseline->add_option("--method", method, "ce | fd | greedy | constant")->required();
    auto* sub_fit = app.add_subcommand("fit-network", "fit link-creation rates");
    std::string events_path;
    int num_users = 0;
    double t1 = 0.0;
    sub_fit->add_option("--events", events_path, "link events CSV")->required();
    sub_fit->add_option("--num-users", num_users, "network size")->required();
    sub_fit->add_option("--t1", t1, "observation horizon")->required();
    auto* sub_experiment = app.add_subcommand("experiment", "full method comparison");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }
    if (seed_flag->count() > 0) g.seed = seed_opt;

    try {
        if (sub_simulate->parsed()) return cmd_simulate(g);
        if (sub_solve->parsed()) return cmd_solve(g);
        if (sub_control->parsed()) return cmd_control(g);
        if (sub_baseline->parsed()) return cmd_baseline(g, method);
        if (sub_fit->parsed()) return cmd_fit_network(g, events_path, num_users, t1);
        if (sub_experiment->parsed()) return cmd_experiment(g);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
