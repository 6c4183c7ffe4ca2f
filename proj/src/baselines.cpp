#include "guiding/baselines.hpp"

#include "guiding/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace guiding {

PiecewiseConstantPolicy::PiecewiseConstantPolicy(TimeGrid grid, Mat u_table)
    : grid_(grid), u_table_(std::move(u_table)) {
    if (u_table_.rows() != grid_.steps)
        throw std::invalid_argument("PiecewiseConstantPolicy: table needs one row per interval");
    if (!u_table_.allFinite())
        throw std::invalid_argument("PiecewiseConstantPolicy: non-finite table entry");
}

Vec PiecewiseConstantPolicy::evaluate(const Vec&, double t) const {
    if (t >= grid_.t1) return u_table_.row(u_table_.rows() - 1).transpose();
    if (t <= grid_.t0) return u_table_.row(0).transpose();
    return u_table_.row(grid_.interval_of(t)).transpose();
}

TableCost make_mc_table_cost(const ControlProblem& problem, const SimModel& model, int n_runs) {
    if (n_runs < 1) throw std::invalid_argument("make_mc_table_cost: n_runs must be >= 1");
    return [problem, model, n_runs](const Mat& u_table, std::uint64_t seed_block) {
        PiecewiseConstantPolicy policy(problem.grid, u_table);
        return monte_carlo_cost(policy, problem, model, n_runs, seed_block).mean;
    };
}

void CEConfig::validate() const {
    if (!(elite_fraction > 0.0 && elite_fraction <= 1.0))
        throw std::invalid_argument("CEConfig: elite_fraction must lie in (0, 1]");
    if (population_size < static_cast<int>(std::ceil(2.0 / elite_fraction)))
        throw std::invalid_argument("CEConfig: population_size must be >= 2/elite_fraction");
    if (!(init_stddev > 0.0)) throw std::invalid_argument("CEConfig: init_stddev must be positive");
    if (max_iters < 0) throw std::invalid_argument("CEConfig: max_iters must be nonnegative");
    if (!(rel_tol >= 0.0)) throw std::invalid_argument("CEConfig: rel_tol must be nonnegative");
}

void FDConfig::validate() const {
    if (!(perturbation > 0.0)) throw std::invalid_argument("FDConfig: perturbation must be positive");
    if (!(step_size > 0.0)) throw std::invalid_argument("FDConfig: step_size must be positive");
    if (max_iters < 0) throw std::invalid_argument("FDConfig: max_iters must be nonnegative");
}

void GreedyConfig::validate() const {
    if (!(multiplier >= 1.0)) throw std::invalid_argument("GreedyConfig: multiplier must be >= 1");
    if (n_checkpoints < 1) throw std::invalid_argument("GreedyConfig: need >= 1 checkpoint");
}

OptimizeResult cross_entropy_optimize(const TimeGrid& grid, int num_users, const TableCost& cost,
                                      const CEConfig& config, std::uint64_t seed) {
    config.validate();
    const int m = grid.steps;
    const int n_elite =
        std::max(1, static_cast<int>(std::round(config.population_size * config.elite_fraction)));

    Mat mean = Mat::Constant(m, num_users, config.init_mean);
    Mat stddev = Mat::Constant(m, num_users, config.init_stddev);

    OptimizeResult out;
    Rng rng = make_rng(derive_seed(seed, 71));
    std::normal_distribution<double> gauss(0.0, 1.0);

    double prev_elite_mean = std::numeric_limits<double>::quiet_NaN();
    for (int iter = 0; iter < config.max_iters; ++iter) {
        // one seed block per iteration: all candidates share the noise draws
        const std::uint64_t block = derive_seed(seed, 10'000 + static_cast<std::uint64_t>(iter));

        std::vector<Mat> candidates(static_cast<std::size_t>(config.population_size));
        std::vector<double> costs(candidates.size());
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            Mat table(m, num_users);
            for (int r = 0; r < m; ++r)
                for (int j = 0; j < num_users; ++j)
                    table(r, j) = mean(r, j) + stddev(r, j) * gauss(rng);
            candidates[c] = std::move(table);
            costs[c] = cost(candidates[c], block);
        }

        std::vector<std::size_t> order(candidates.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&costs](std::size_t a, std::size_t b) { return costs[a] < costs[b]; });

        Mat new_mean = Mat::Zero(m, num_users);
        for (int e = 0; e < n_elite; ++e) new_mean += candidates[order[static_cast<std::size_t>(e)]];
        new_mean /= n_elite;
        Mat var = Mat::Zero(m, num_users);
        for (int e = 0; e < n_elite; ++e) {
            const Mat d = candidates[order[static_cast<std::size_t>(e)]] - new_mean;
            var += d.cwiseProduct(d);
        }
        stddev = (var / std::max(1, n_elite - 1)).cwiseSqrt();
        mean = new_mean;

        double elite_mean_cost = 0.0;
        for (int e = 0; e < n_elite; ++e) elite_mean_cost += costs[order[static_cast<std::size_t>(e)]];
        elite_mean_cost /= n_elite;
        out.cost_history.push_back(elite_mean_cost);

        if (stddev.maxCoeff() < 1e-12) {
            out.stddev_collapsed = true;
            break;
        }
        if (!std::isnan(prev_elite_mean)) {
            const double rel =
                std::abs(elite_mean_cost - prev_elite_mean) / (1.0 + std::abs(prev_elite_mean));
            if (rel < config.rel_tol) break;
        }
        prev_elite_mean = elite_mean_cost;
    }

    out.policy = std::make_shared<PiecewiseConstantPolicy>(grid, mean);
    return out;
}

OptimizeResult finite_difference_optimize(const TimeGrid& grid, int num_users,
                                          const TableCost& cost, const FDConfig& config,
                                          std::uint64_t seed) {
    config.validate();
    const int m = grid.steps;
    Mat table = Mat::Zero(m, num_users);

    OptimizeResult out;
    double prev_cost = std::numeric_limits<double>::quiet_NaN();
    for (int iter = 0; iter < config.max_iters; ++iter) {
        const std::uint64_t block = derive_seed(seed, 20'000 + static_cast<std::uint64_t>(iter));
        Mat grad(m, num_users);
        for (int r = 0; r < m; ++r) {
            for (int j = 0; j < num_users; ++j) {
                Mat up = table, dn = table;
                up(r, j) += config.perturbation;
                dn(r, j) -= config.perturbation;
                const double g = (cost(up, block) - cost(dn, block)) / (2.0 * config.perturbation);
                if (!std::isfinite(g)) {
                    std::ostringstream os;
                    os << "finite_difference_optimize: non-finite gradient at entry (" << r << ", "
                       << j << ")";
                    throw std::runtime_error(os.str());
                }
                grad(r, j) = g;
            }
        }
        table -= config.step_size * grad;
        const double j_now = cost(table, block);
        out.cost_history.push_back(j_now);
        if (!std::isnan(prev_cost) &&
            std::abs(j_now - prev_cost) / (1.0 + std::abs(prev_cost)) < config.rel_tol)
            break;
        prev_cost = j_now;
    }

    out.policy = std::make_shared<PiecewiseConstantPolicy>(grid, table);
    return out;
}

namespace {

class GreedyPolicy final : public Policy {
public:
    GreedyPolicy(ControlProblem problem, std::vector<double> reference, GreedyConfig config)
        : problem_(std::move(problem)), reference_(std::move(reference)), config_(config) {
        const int n = config_.n_checkpoints;
        if (static_cast<int>(reference_.size()) != n)
            throw std::invalid_argument("greedy_policy: reference path must have one value per checkpoint");
        checkpoint_span_ = (problem_.grid.t1 - problem_.grid.t0) / n;
    }

    Vec evaluate(const Vec& x, double t) const override {
        int c = static_cast<int>((t - problem_.grid.t0) / checkpoint_span_);
        c = std::clamp(c, 0, config_.n_checkpoints - 1);
        const double q = state_cost(x);
        if (q <= config_.multiplier * reference_[static_cast<std::size_t>(c)])
            return Vec::Zero(x.size());
        if (problem_.kind == ObjectiveKind::OIM)
            return Vec::Constant(x.size(), config_.pulse);
        const Vec d = problem_.target - x;
        const double norm = d.norm();
        if (norm == 0.0) return Vec::Zero(x.size()); // already at target
        return config_.pulse * d / norm;
    }

private:
    double state_cost(const Vec& x) const {
        if (problem_.kind == ObjectiveKind::LSOG)
            return 0.5 * (x - problem_.target).squaredNorm();
        return -x.sum();
    }

    ControlProblem problem_;
    std::vector<double> reference_;
    GreedyConfig config_;
    double checkpoint_span_ = 0.0;
};

} // namespace

std::shared_ptr<Policy> greedy_policy(const ControlProblem& problem,
                                      const std::vector<double>& reference_cost_path,
                                      const GreedyConfig& config) {
    config.validate();
    return std::make_shared<GreedyPolicy>(problem, reference_cost_path, config);
}

} // namespace guiding
