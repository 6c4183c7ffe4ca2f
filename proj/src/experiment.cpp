#include "guiding/experiment.hpp"

#include "guiding/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <future>
#include <sstream>
#include <thread>

namespace guiding {

namespace {

using io::json;

constexpr std::uint64_t kTopologySeedStream = 11;
constexpr std::uint64_t kBetaSeedStream = 12;
constexpr std::uint64_t kBaseContentStream = 13;
constexpr std::uint64_t kOptimizerStream = 31;
constexpr std::uint64_t kPilotStream = 999;

HMode h_mode_from_string(const std::string& s) {
    if (s == "unit") return HMode::unit;
    if (s == "linear") return HMode::linear;
    throw std::invalid_argument("unknown h_mode: " + s);
}

std::string h_mode_to_string(HMode m) { return m == HMode::unit ? "unit" : "linear"; }

} // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    ExperimentConfig c;
    if (j.contains("model")) {
        const json& m = j.at("model");
        c.model.num_users = m.value("num_users", c.model.num_users);
        c.model.sparsity = m.value("sparsity", c.model.sparsity);
        if (m.contains("alpha_range")) {
            c.model.alpha_lo = m.at("alpha_range").at(0).get<double>();
            c.model.alpha_hi = m.at("alpha_range").at(1).get<double>();
            c.model.beta_lo = c.model.alpha_lo;
            c.model.beta_hi = c.model.alpha_hi;
        }
        if (m.contains("beta_range")) {
            c.model.beta_lo = m.at("beta_range").at(0).get<double>();
            c.model.beta_hi = m.at("beta_range").at(1).get<double>();
        }
        c.model.eta = m.value("eta", c.model.eta);
        c.model.omega1 = m.value("omega1", c.model.omega1);
        c.model.omega2 = m.value("omega2", c.model.omega2);
        c.model.theta = m.value("theta", c.model.theta);
        if (m.contains("b_range")) {
            c.model.b_lo = m.at("b_range").at(0).get<double>();
            c.model.b_hi = m.at("b_range").at(1).get<double>();
        }
        c.model.x0 = m.value("x0", c.model.x0);
        if (m.contains("h_mode")) c.model.h_mode = h_mode_from_string(m.at("h_mode"));
    }
    if (j.contains("problem")) {
        const json& p = j.at("problem");
        if (p.contains("kind")) c.problem.kind = objective_kind_from_string(p.at("kind"));
        c.problem.target = p.value("target", c.problem.target);
        c.problem.rho = p.value("rho", c.problem.rho);
        c.problem.t0 = p.value("t0", c.problem.t0);
        c.problem.t1 = p.value("t1", c.problem.t1);
        c.problem.steps = p.value("steps", c.problem.steps);
        c.problem.running_cost = p.value("running_cost", c.problem.running_cost);
    }
    if (j.contains("methods")) c.methods = j.at("methods").get<std::vector<std::string>>();
    if (j.contains("method_configs")) c.method_configs = j.at("method_configs");
    c.n_runs = j.value("n_runs", c.n_runs);
    c.seed = j.value("seed", c.seed);
    if (j.contains("lam_mode")) {
        const std::string mode = j.at("lam_mode");
        if (mode == "mean")
            c.lam_mode = LamMode::mean;
        else if (mode == "replan")
            c.lam_mode = LamMode::replan;
        else
            throw std::invalid_argument("unknown lam_mode: " + mode);
    }
    if (j.contains("dynamic_network")) {
        const json& d = j.at("dynamic_network");
        c.dynamic.enabled = true;
        c.dynamic.gamma = d.value("gamma", 0.0);
        c.dynamic.nominal_weight = d.value("nominal_weight", 0.0);
    }
    c.validate();
    return c;
}

json ExperimentConfig::to_json() const {
    json j;
    j["model"] = {{"num_users", model.num_users},
                  {"sparsity", model.sparsity},
                  {"alpha_range", {model.alpha_lo, model.alpha_hi}},
                  {"beta_range", {model.beta_lo, model.beta_hi}},
                  {"eta", model.eta},
                  {"omega1", model.omega1},
                  {"omega2", model.omega2},
                  {"theta", model.theta},
                  {"b_range", {model.b_lo, model.b_hi}},
                  {"x0", model.x0},
                  {"h_mode", h_mode_to_string(model.h_mode)}};
    j["problem"] = {{"kind", to_string(problem.kind)}, {"target", problem.target},
                    {"rho", problem.rho},             {"t0", problem.t0},
                    {"t1", problem.t1},               {"steps", problem.steps},
                    {"running_cost", problem.running_cost}};
    j["methods"] = methods;
    j["method_configs"] = method_configs;
    j["n_runs"] = n_runs;
    j["seed"] = seed;
    j["lam_mode"] = lam_mode == LamMode::mean ? "mean" : "replan";
    if (dynamic.enabled)
        j["dynamic_network"] = {{"gamma", dynamic.gamma},
                                {"nominal_weight", dynamic.nominal_weight}};
    return j;
}

void ExperimentConfig::validate() const {
    if (problem.steps < 2) throw std::invalid_argument("ExperimentConfig: grid size must be >= 2");
    if (n_runs < 1) throw std::invalid_argument("ExperimentConfig: n_runs must be >= 1");
    static const std::vector<std::string> known = {"hjb", "ce", "fd", "greedy", "constant"};
    for (const std::string& m : methods) {
        if (std::find(known.begin(), known.end(), m) == known.end())
            throw std::invalid_argument("ExperimentConfig: unknown method " + m);
    }
}

ExperimentInstance build_instance(const ExperimentConfig& config) {
    const int n = config.model.num_users;
    NetworkTopology alpha_topo =
        NetworkTopology::random(n, config.model.sparsity, config.model.alpha_lo,
                                config.model.alpha_hi, derive_seed(config.seed, kTopologySeedStream));

    // The excitation matrix shares the adjacency support; weights are redrawn
    // when the configured range differs.
    NetworkTopology beta_topo = alpha_topo;
    if (config.model.beta_lo != config.model.alpha_lo ||
        config.model.beta_hi != config.model.alpha_hi) {
        Rng rng = make_rng(derive_seed(config.seed, kBetaSeedStream));
        std::uniform_real_distribution<double> w(config.model.beta_lo, config.model.beta_hi);
        std::vector<Edge> edges = alpha_topo.edges();
        for (Edge& e : edges) e.weight = w(rng);
        beta_topo = NetworkTopology::from_edges(std::move(edges), n);
    }

    Rng rng_b = make_rng(derive_seed(config.seed, kBaseContentStream));
    std::uniform_real_distribution<double> bdist(config.model.b_lo, config.model.b_hi);
    Vec b(n);
    for (int i = 0; i < n; ++i) b(i) = bdist(rng_b);

    ExperimentInstance inst;
    inst.model.opinion = OpinionParams{b, alpha_topo, config.model.omega2, config.model.theta,
                                       config.model.h_mode};
    inst.model.hawkes = HawkesParams{Vec::Constant(n, config.model.eta), beta_topo,
                                     config.model.omega1};
    inst.model.x0 = Vec::Constant(n, config.model.x0);

    inst.problem.kind = config.problem.kind;
    inst.problem.target = Vec::Constant(n, config.problem.target);
    inst.problem.rho = config.problem.rho;
    inst.problem.grid = TimeGrid::uniform(config.problem.t0, config.problem.t1,
                                          config.problem.steps);
    inst.problem.running_state_cost = config.problem.running_cost;
    inst.problem.validate(n);

    inst.lam_path = mean_intensity_path(inst.model.hawkes, inst.problem.grid);
    return inst;
}

std::uint64_t event_log_hash(const EventLog& log) {
    std::uint64_t h = 1469598103934665603ULL; // FNV-1a
    const auto mix = [&h](std::uint64_t v) {
        for (int s = 0; s < 64; s += 8) {
            h ^= (v >> s) & 0xff;
            h *= 1099511628211ULL;
        }
    };
    for (const Event& e : log.events) {
        std::uint64_t bits;
        std::memcpy(&bits, &e.t, sizeof(bits));
        mix(bits);
        mix(static_cast<std::uint64_t>(e.user));
    }
    return h;
}

namespace {

double instantaneous_cost_per_user(const ControlProblem& problem, const Vec& x, const Vec& u) {
    const int n = static_cast<int>(x.size());
    double q;
    if (problem.kind == ObjectiveKind::LSOG)
        q = 0.5 * (x - problem.target).squaredNorm();
    else
        q = -x.sum();
    return (q + 0.5 * problem.rho * u.squaredNorm()) / n;
}

} // namespace

MethodResult evaluate_policy_crn(const std::string& name, const Policy& policy,
                                 const ExperimentInstance& instance, int n_runs,
                                 std::uint64_t master_seed) {
    const auto t_start = std::chrono::steady_clock::now();
    const int mpts = instance.problem.grid.size();

    MethodResult out;
    out.name = name;
    out.cost.runs.resize(static_cast<std::size_t>(n_runs));
    out.event_hashes.resize(static_cast<std::size_t>(n_runs));
    std::vector<std::vector<double>> inst(static_cast<std::size_t>(n_runs),
                                          std::vector<double>(static_cast<std::size_t>(mpts)));
    std::vector<Trajectory> sample(1);

    const auto run_one = [&](int r) {
        const Trajectory traj =
            cosimulate(instance.model.opinion, instance.model.hawkes, policy, instance.model.x0,
                       instance.problem.grid, derive_seed(master_seed, stream::run_base + r));
        out.cost.runs[static_cast<std::size_t>(r)] = evaluate_cost(traj, instance.problem);
        out.event_hashes[static_cast<std::size_t>(r)] = event_log_hash(traj.events);
        for (int k = 0; k < mpts; ++k)
            inst[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] =
                instantaneous_cost_per_user(instance.problem, traj.x.row(k).transpose(),
                                            traj.u.row(k).transpose());
        if (r == 0) sample[0] = traj;
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const int workers = std::min<int>(static_cast<int>(hw), n_runs);
    if (workers > 1) {
        std::vector<std::future<void>> futs;
        for (int w = 0; w < workers; ++w)
            futs.push_back(std::async(std::launch::async, [&, w] {
                for (int r = w; r < n_runs; r += workers) run_one(r);
            }));
        for (auto& f : futs) f.get();
    } else {
        for (int r = 0; r < n_runs; ++r) run_one(r);
    }

    double sum = 0.0;
    for (const CostBreakdown& c : out.cost.runs) sum += c.total;
    out.cost.mean = sum / n_runs;
    if (n_runs > 1) {
        double ss = 0.0;
        for (const CostBreakdown& c : out.cost.runs)
            ss += (c.total - out.cost.mean) * (c.total - out.cost.mean);
        out.cost.variance = ss / (n_runs - 1);
        out.cost.variance_defined = true;
    }

    out.inst_mean.assign(static_cast<std::size_t>(mpts), 0.0);
    out.inst_std.assign(static_cast<std::size_t>(mpts), 0.0);
    for (int k = 0; k < mpts; ++k) {
        double s = 0.0;
        for (int r = 0; r < n_runs; ++r) s += inst[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)];
        const double mean = s / n_runs;
        out.inst_mean[static_cast<std::size_t>(k)] = mean;
        if (n_runs > 1) {
            double ss = 0.0;
            for (int r = 0; r < n_runs; ++r) {
                const double d = inst[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] - mean;
                ss += d * d;
            }
            out.inst_std[static_cast<std::size_t>(k)] = std::sqrt(ss / (n_runs - 1));
        }
    }
    out.sample = std::move(sample[0]);
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return out;
}

namespace {

ValueCoefficients solve_for_instance(const ExperimentConfig& config,
                                     const ExperimentInstance& inst) {
    SolverConfig scfg;
    const OpinionParams& params = inst.model.opinion;
    if (config.dynamic.enabled) {
        double nominal = config.dynamic.nominal_weight;
        if (nominal <= 0.0) {
            double s = 0.0;
            for (const Edge& e : params.topology.edges()) s += e.weight;
            nominal = params.topology.num_edges() > 0 ? s / params.topology.num_edges() : 1.0;
        }
        const LinkCreationModel link_model =
            make_link_model(params.topology.num_users(),
                            Vec::Constant(params.topology.num_users(), config.dynamic.gamma),
                            params.topology.edges(), nominal);
        const AdjacencyAt adj = [link_model, t0 = inst.problem.grid.t0](double t) {
            return expected_adjacency(link_model, std::max(0.0, t - t0));
        };
        if (inst.problem.kind == ObjectiveKind::LSOG)
            return solve_lsog_dynamic(inst.problem, params, inst.lam_path, adj, scfg);
        return solve_oim_dynamic(inst.problem, params, inst.lam_path, adj, scfg);
    }
    if (inst.problem.kind == ObjectiveKind::LSOG)
        return solve_lsog(inst.problem, params, inst.lam_path, scfg);
    return solve_oim(inst.problem, params, inst.lam_path, scfg);
}

MethodResult evaluate_replan(const ExperimentConfig& config, const ExperimentInstance& instance) {
    const auto t_start = std::chrono::steady_clock::now();
    const int n_runs = config.n_runs;
    const int mpts = instance.problem.grid.size();

    MethodResult out;
    out.name = "hjb";
    out.extra["lam_mode"] = "replan";
    out.cost.runs.resize(static_cast<std::size_t>(n_runs));
    out.event_hashes.resize(static_cast<std::size_t>(n_runs));
    std::vector<std::vector<double>> inst_rows(static_cast<std::size_t>(n_runs));
    for (int r = 0; r < n_runs; ++r) {
        const Trajectory traj = simulate_with_replanning(
            instance, derive_seed(config.seed, stream::run_base + r));
        out.cost.runs[static_cast<std::size_t>(r)] = evaluate_cost(traj, instance.problem);
        out.event_hashes[static_cast<std::size_t>(r)] = event_log_hash(traj.events);
        auto& row = inst_rows[static_cast<std::size_t>(r)];
        row.resize(static_cast<std::size_t>(mpts));
        for (int k = 0; k < mpts; ++k)
            row[static_cast<std::size_t>(k)] = instantaneous_cost_per_user(
                instance.problem, traj.x.row(k).transpose(), traj.u.row(k).transpose());
        if (r == 0) out.sample = traj;
    }

    double sum = 0.0;
    for (const CostBreakdown& c : out.cost.runs) sum += c.total;
    out.cost.mean = sum / n_runs;
    if (n_runs > 1) {
        double ss = 0.0;
        for (const CostBreakdown& c : out.cost.runs)
            ss += (c.total - out.cost.mean) * (c.total - out.cost.mean);
        out.cost.variance = ss / (n_runs - 1);
        out.cost.variance_defined = true;
    }
    out.inst_mean.assign(static_cast<std::size_t>(mpts), 0.0);
    out.inst_std.assign(static_cast<std::size_t>(mpts), 0.0);
    for (int k = 0; k < mpts; ++k) {
        double s = 0.0;
        for (int r = 0; r < n_runs; ++r) s += inst_rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)];
        out.inst_mean[static_cast<std::size_t>(k)] = s / n_runs;
    }
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return out;
}

std::vector<double> greedy_reference_path(const ExperimentInstance& instance,
                                          const Policy& hjb_policy, std::uint64_t seed,
                                          int n_checkpoints) {
    const Trajectory pilot =
        cosimulate(instance.model.opinion, instance.model.hawkes, hjb_policy, instance.model.x0,
                   instance.problem.grid, derive_seed(seed, kPilotStream));
    std::vector<double> ref(static_cast<std::size_t>(n_checkpoints));
    const TimeGrid& grid = instance.problem.grid;
    const double span = (grid.t1 - grid.t0) / n_checkpoints;
    for (int c = 0; c < n_checkpoints; ++c) {
        const double t = grid.t0 + c * span;
        const int k = std::min(grid.steps, static_cast<int>(std::round((t - grid.t0) / grid.dt())));
        const Vec x = pilot.x.row(k).transpose();
        ref[static_cast<std::size_t>(c)] =
            instance.problem.kind == ObjectiveKind::LSOG
                ? 0.5 * (x - instance.problem.target).squaredNorm()
                : -x.sum();
    }
    return ref;
}

} // namespace

Trajectory simulate_with_replanning(const ExperimentInstance& instance, std::uint64_t run_seed,
                                    const SolverConfig& config) {
    const OpinionParams& params = instance.model.opinion;
    const HawkesParams& hawkes = instance.model.hawkes;
    const TimeGrid& grid = instance.problem.grid;
    const int n = params.topology.num_users();
    const int m = grid.steps;
    const double dt = grid.dt();

    // seed splitting mirrors cosimulate so the event stream is shared with the
    // other methods under common random numbers
    const EventLog events =
        thinning_simulate(hawkes, grid.t0, grid.t1, derive_seed(run_seed, stream::events));

    Trajectory traj;
    traj.grid = grid;
    traj.x = Mat::Zero(m + 1, n);
    traj.u = Mat::Zero(m + 1, n);
    traj.events = events;
    traj.noise_seed = derive_seed(run_seed, stream::noise);
    traj.x.row(0) = instance.model.x0.transpose();

    // identical gaussian stream to euler_simulate with the cosimulate-derived seed
    Rng rng = make_rng(derive_seed(traj.noise_seed, stream::noise));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double sqrt_dt = std::sqrt(dt);

    std::size_t next_event = 0;
    Vec x = instance.model.x0;
    ValueCoefficients coeffs;
    for (int k = 0; k < m; ++k) {
        const double t = grid.point(k);
        const double t_next = grid.point(k + 1);

        // re-solve on the remaining horizon: realized intensity now, mean-field
        // continuation afterwards
        const TimeGrid rest = TimeGrid::uniform(t, grid.t1, m - k);
        const Vec lam_now = intensity_at(hawkes, events, t, /*include_events_at_t=*/true);
        const Mat lam_rest = mean_intensity_path_from(hawkes, lam_now, rest, config);
        ControlProblem sub = instance.problem;
        sub.grid = rest;
        coeffs = sub.kind == ObjectiveKind::LSOG ? solve_lsog(sub, params, lam_rest, config)
                                                 : solve_oim(sub, params, lam_rest, config);

        const Vec u = feedback_control(coeffs, x, t, instance.problem.rho);
        traj.u.row(k) = u.transpose();

        Vec x_next = x + params.omega2 * (params.b + u - x) * dt;
        if (params.theta > 0.0)
            for (int i = 0; i < n; ++i) x_next(i) += params.theta * sqrt_dt * gauss(rng);
        while (next_event < events.events.size() && events.events[next_event].t < t_next) {
            const int j = events.events[next_event].user;
            const double hj = params.h_mode == HMode::linear ? x(j) : 1.0;
            for (const auto& [i, w] : params.topology.column_entries(j)) x_next(i) += w * hj;
            ++next_event;
        }
        x = x_next;
        traj.x.row(k + 1) = x.transpose();
    }
    traj.u.row(m) = feedback_control(coeffs, x, grid.t1, instance.problem.rho).transpose();
    return traj;
}

ComparisonReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    ComparisonReport report;
    report.config = config;

    ExperimentInstance instance;
    try {
        instance = build_instance(config);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("run_experiment: model stage failed: ") + e.what());
    }

    const bool needs_hjb =
        std::find(config.methods.begin(), config.methods.end(), "hjb") != config.methods.end() ||
        std::find(config.methods.begin(), config.methods.end(), "greedy") != config.methods.end();
    std::shared_ptr<HjbPolicy> hjb;
    if (needs_hjb) {
        try {
            hjb = std::make_shared<HjbPolicy>(solve_for_instance(config, instance),
                                              instance.problem.rho);
        } catch (const std::exception& e) {
            throw std::runtime_error(std::string("run_experiment: hjb solve stage failed: ") +
                                     e.what());
        }
    }

    const json& mc = config.method_configs;
    for (const std::string& method : config.methods) {
        const auto t_method = std::chrono::steady_clock::now();
        try {
            if (method == "hjb") {
                if (config.lam_mode == LamMode::replan) {
                    report.methods.push_back(evaluate_replan(config, instance));
                } else {
                    report.methods.push_back(
                        evaluate_policy_crn("hjb", *hjb, instance, config.n_runs, config.seed));
                }
            } else if (method == "ce") {
                CEConfig cfg;
                int opt_runs = 2;
                if (mc.contains("ce")) {
                    const json& c = mc.at("ce");
                    cfg.population_size = c.value("population_size", cfg.population_size);
                    cfg.elite_fraction = c.value("elite_fraction", cfg.elite_fraction);
                    cfg.init_mean = c.value("init_mean", cfg.init_mean);
                    cfg.init_stddev = c.value("init_stddev", cfg.init_stddev);
                    cfg.max_iters = c.value("max_iters", cfg.max_iters);
                    cfg.rel_tol = c.value("rel_tol", cfg.rel_tol);
                    opt_runs = c.value("opt_runs", opt_runs);
                }
                const TableCost cost = make_mc_table_cost(instance.problem, instance.model, opt_runs);
                const OptimizeResult res =
                    cross_entropy_optimize(instance.problem.grid, config.model.num_users, cost, cfg,
                                           derive_seed(config.seed, kOptimizerStream));
                MethodResult r = evaluate_policy_crn("ce", *res.policy, instance, config.n_runs,
                                                     config.seed);
                r.extra["cost_history"] = res.cost_history;
                r.extra["stddev_collapsed"] = res.stddev_collapsed;
                report.methods.push_back(std::move(r));
            } else if (method == "fd") {
                FDConfig cfg;
                cfg.max_iters = 5;
                cfg.perturbation = 1e-2;
                cfg.step_size = 0.05;
                int opt_runs = 2;
                if (mc.contains("fd")) {
                    const json& c = mc.at("fd");
                    cfg.perturbation = c.value("perturbation", cfg.perturbation);
                    cfg.step_size = c.value("step_size", cfg.step_size);
                    cfg.max_iters = c.value("max_iters", cfg.max_iters);
                    cfg.rel_tol = c.value("rel_tol", cfg.rel_tol);
                    opt_runs = c.value("opt_runs", opt_runs);
                }
                const TableCost cost = make_mc_table_cost(instance.problem, instance.model, opt_runs);
                const OptimizeResult res = finite_difference_optimize(
                    instance.problem.grid, config.model.num_users, cost, cfg,
                    derive_seed(config.seed, kOptimizerStream + 1));
                MethodResult r = evaluate_policy_crn("fd", *res.policy, instance, config.n_runs,
                                                     config.seed);
                r.extra["cost_history"] = res.cost_history;
                report.methods.push_back(std::move(r));
            } else if (method == "greedy") {
                std::vector<double> k_levels = {1, 2, 3, 4, 5};
                std::vector<int> n_levels = {1, 10, 100};
                std::vector<double> pulse_levels;
                if (mc.contains("greedy")) {
                    const json& c = mc.at("greedy");
                    if (c.contains("k_levels")) k_levels = c.at("k_levels").get<std::vector<double>>();
                    if (c.contains("n_levels")) n_levels = c.at("n_levels").get<std::vector<int>>();
                    if (c.contains("pulse_levels"))
                        pulse_levels = c.at("pulse_levels").get<std::vector<double>>();
                }
                if (pulse_levels.empty()) {
                    const double scale = std::sqrt(static_cast<double>(config.model.num_users));
                    pulse_levels = {0.5 * scale, scale, 2.0 * scale};
                }
                MethodResult best;
                bool have = false;
                json chosen;
                for (int nchk : n_levels) {
                    const std::vector<double> ref =
                        greedy_reference_path(instance, *hjb, config.seed, nchk);
                    for (double kmul : k_levels) {
                        for (double pulse : pulse_levels) {
                            GreedyConfig gc{kmul, nchk, pulse};
                            const auto policy = greedy_policy(instance.problem, ref, gc);
                            MethodResult r = evaluate_policy_crn("greedy", *policy, instance,
                                                                 config.n_runs, config.seed);
                            if (!have || r.cost.mean < best.cost.mean) {
                                best = std::move(r);
                                chosen = {{"k", kmul}, {"n_checkpoints", nchk}, {"pulse", pulse}};
                                have = true;
                            }
                        }
                    }
                }
                best.extra["chosen"] = chosen;
                report.methods.push_back(std::move(best));
            } else if (method == "constant") {
                std::vector<double> levels;
                if (mc.contains("constant") && mc.at("constant").contains("levels"))
                    levels = mc.at("constant").at("levels").get<std::vector<double>>();
                if (levels.empty()) {
                    for (int i = 0; i <= 20; ++i) levels.push_back(0.2 * i);
                }
                MethodResult best;
                bool have = false;
                double best_level = 0.0;
                for (double lv : levels) {
                    const auto policy =
                        constant_policy(Vec::Constant(config.model.num_users, lv));
                    MethodResult r = evaluate_policy_crn("constant", *policy, instance,
                                                         config.n_runs, config.seed);
                    if (!have || r.cost.mean < best.cost.mean) {
                        best = std::move(r);
                        best_level = lv;
                        have = true;
                    }
                }
                best.extra["level"] = best_level;
                report.methods.push_back(std::move(best));
            }
        } catch (const std::exception& e) {
            std::ostringstream os;
            os << "run_experiment: method `" << method << "` failed (seed " << config.seed
               << "): " << e.what();
            throw std::runtime_error(os.str());
        }
        // full method time, optimization included
        report.methods.back().wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_method).count();
    }
    return report;
}

void emit_reports(const ComparisonReport& report, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    json summary;
    summary["methods"] = json::array();
    for (const MethodResult& m : report.methods) {
        json entry;
        entry["name"] = m.name;
        entry["mean"] = m.cost.mean;
        entry["variance"] = m.cost.variance;
        entry["variance_defined"] = m.cost.variance_defined;
        entry["wall_seconds"] = m.wall_seconds;
        json runs = json::array();
        for (const CostBreakdown& c : m.cost.runs) runs.push_back(io::cost_breakdown_to_json(c));
        entry["runs"] = runs;
        json hashes = json::array();
        for (std::uint64_t h : m.event_hashes) hashes.push_back(h);
        entry["event_hashes"] = hashes;
        entry["extra"] = m.extra;
        summary["methods"].push_back(entry);
    }
    io::write_file((fs::path(out_dir) / "summary.json").string(), summary.dump(2) + "\n");
    io::write_file((fs::path(out_dir) / "config.echo.json").string(),
                   report.config.to_json().dump(2) + "\n");

    if (report.methods.empty()) return;

    {
        std::ostringstream os;
        os << "t,method,mean,stddev\n";
        for (const MethodResult& m : report.methods) {
            const TimeGrid& grid = m.sample.grid;
            for (int k = 0; k < grid.size(); ++k) {
                os << io::format_time(grid.point(k)) << "," << m.name << ","
                   << io::format_value(m.inst_mean[static_cast<std::size_t>(k)]) << ","
                   << io::format_value(m.inst_std[static_cast<std::size_t>(k)]) << "\n";
            }
        }
        io::write_file((fs::path(out_dir) / "instantaneous_cost.csv").string(), os.str());
    }
    {
        std::ostringstream os;
        os << "t,user,method,x,u\n";
        for (const MethodResult& m : report.methods) {
            const TimeGrid& grid = m.sample.grid;
            const int users = std::min<int>(5, static_cast<int>(m.sample.x.cols()));
            for (int k = 0; k < grid.size(); ++k) {
                for (int i = 0; i < users; ++i) {
                    os << io::format_time(grid.point(k)) << "," << i << "," << m.name << ","
                       << io::format_value(m.sample.x(k, i)) << ","
                       << io::format_value(m.sample.u(k, i)) << "\n";
                }
            }
        }
        io::write_file((fs::path(out_dir) / "trajectories.csv").string(), os.str());
    }
}

} // namespace guiding
