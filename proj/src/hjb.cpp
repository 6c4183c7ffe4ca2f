#include "guiding/hjb.hpp"

#include "guiding/rng.hpp"

#include <cmath>
#include <sstream>

namespace guiding {

namespace {

constexpr double kRiccatiNormGuard = 1e6;

Mat lam_path_checked(const ControlProblem& problem, const OpinionParams& params,
                     const Mat& lam_path) {
    const int n = params.topology.num_users();
    problem.validate(n);
    params.validate();
    if (lam_path.rows() != problem.grid.size() || lam_path.cols() != n)
        throw std::invalid_argument("solve: lam_path must be (m+1) x U on the problem grid");
    return lam_path;
}

// Sparse products against Lambda(t) = A diag(lambda); used on the static-topology path.
struct StaticNet {
    const NetworkTopology* topo;

    // M = v11 * Lambda: column j is lambda_j * (v11 a_j)
    Mat v11_lambda(const Mat& v11, const Vec& lam) const {
        const int n = topo->num_users();
        Mat out = Mat::Zero(n, n);
        for (int j = 0; j < n; ++j) {
            if (lam(j) == 0.0) continue;
            const auto& col = topo->column_entries(j);
            if (col.empty()) continue;
            Vec acc = Vec::Zero(n);
            for (const auto& [i, w] : col) acc += w * v11.col(i);
            out.col(j) = lam(j) * acc;
        }
        return out;
    }

    // (Lambda^T v)_j = lambda_j a_j^T v
    Vec lambda_t_vec(const Vec& v, const Vec& lam) const {
        const int n = topo->num_users();
        Vec out = Vec::Zero(n);
        for (int j = 0; j < n; ++j) {
            if (lam(j) == 0.0) continue;
            double dot = 0.0;
            for (const auto& [i, w] : topo->column_entries(j)) dot += w * v(i);
            out(j) = lam(j) * dot;
        }
        return out;
    }

    Vec jump_diag(const Vec& lam, const Mat& v11) const {
        return jump_quadratic_diagonal(*topo, lam, v11);
    }
};

struct DynamicNet {
    const AdjacencyAt* adjacency_at;

    Mat v11_lambda_at(double t, const Mat& v11, const Vec& lam, Mat& a_cache) const {
        a_cache = (*adjacency_at)(t);
        return (v11 * a_cache) * lam.asDiagonal();
    }
};

void check_symmetry(const std::vector<Mat>& v11, double tol) {
    for (const Mat& m : v11) {
        const double asym = (m - m.transpose()).lpNorm<Eigen::Infinity>();
        if (asym > tol) {
            std::ostringstream os;
            os << "solve_lsog: v11 lost symmetry (max asymmetry " << asym << ")";
            throw std::logic_error(os.str());
        }
    }
}

void riccati_guard(const Mat& v11, double t) {
    if (v11.norm() > kRiccatiNormGuard || !v11.allFinite()) {
        std::ostringstream os;
        os << "solve_lsog: Riccati blow-up near t = " << t
           << "; shrink the horizon or increase rho";
        throw std::runtime_error(os.str());
    }
}

ValueCoefficients unpack_lsog(const ControlProblem& problem, const Mat& path, int n) {
    ValueCoefficients out;
    out.kind = ObjectiveKind::LSOG;
    out.grid = problem.grid;
    const int m = problem.grid.steps;
    out.v0.resize(static_cast<std::size_t>(m) + 1);
    out.v1 = Mat::Zero(m + 1, n);
    out.v11.resize(static_cast<std::size_t>(m) + 1);
    for (int k = 0; k <= m; ++k) {
        const Vec y = path.row(k).transpose();
        Mat v11(n, n);
        for (int c = 0; c < n; ++c) v11.col(c) = y.segment(c * n, n);
        out.v11[static_cast<std::size_t>(k)] = v11;
        out.v1.row(k) = y.segment(n * n, n).transpose();
        out.v0[static_cast<std::size_t>(k)] = y(n * n + n);
    }
    check_symmetry(out.v11, 1e-10);
    return out;
}

template <typename V11Lambda, typename LambdaTVec, typename JumpDiag>
ValueCoefficients solve_lsog_impl(const ControlProblem& problem, const OpinionParams& params,
                                  const Mat& lam_path, const SolverConfig& config,
                                  V11Lambda&& v11_lambda, LambdaTVec&& lambda_t_vec,
                                  JumpDiag&& jump_diag) {
    const int n = params.topology.num_users();
    const double rho = problem.rho;
    const double w2 = params.omega2;
    const Vec& a = problem.target;
    const Vec& b = params.b;
    const double theta2 = params.theta * params.theta;

    // state packing: [vec(v11), v1, v0]
    VectorField field = [&, n](double t, const Vec& y) {
        Mat v11(n, n);
        for (int c = 0; c < n; ++c) v11.col(c) = y.segment(c * n, n);
        const Vec v1 = y.segment(n * n, n);
        riccati_guard(v11, t);

        const Vec lam = interp_rows(problem.grid, lam_path, t).cwiseMax(0.0);

        const Mat m_v11_lam = v11_lambda(t, v11, lam);
        const Vec d_diag = jump_diag(t, lam, v11);
        Mat rhs11 = -2.0 * w2 * v11 + m_v11_lam + m_v11_lam.transpose() - (v11 * v11) / rho;
        rhs11.diagonal().array() += 1.0; // + I
        rhs11 += Mat(d_diag.asDiagonal());

        const Vec rhs1 = -a - w2 * v1 + lambda_t_vec(t, v1, lam) - (v11 * v1) / rho + w2 * (v11 * b);
        const double rhs0 =
            w2 * b.dot(v1) + 0.5 * theta2 * v11.trace() - v1.squaredNorm() / (2.0 * rho);

        Vec dy(n * n + n + 1);
        const Mat dv11 = -rhs11;
        for (int c = 0; c < n; ++c) dy.segment(c * n, n) = dv11.col(c);
        dy.segment(n * n, n) = -rhs1;
        dy(n * n + n) = -rhs0;
        return dy;
    };

    Vec terminal(n * n + n + 1);
    const Mat eye = Mat::Identity(n, n);
    for (int c = 0; c < n; ++c) terminal.segment(c * n, n) = eye.col(c);
    terminal.segment(n * n, n) = -a;
    terminal(n * n + n) = 0.0;

    const Mat path = rk_integrate(field, terminal, problem.grid, config, OdeDirection::backward);
    return unpack_lsog(problem, path, n);
}

template <typename LambdaTVec>
ValueCoefficients solve_oim_impl(const ControlProblem& problem, const OpinionParams& params,
                                 const Mat& lam_path, const SolverConfig& config,
                                 LambdaTVec&& lambda_t_vec) {
    const int n = params.topology.num_users();
    const double rho = problem.rho;
    const double w2 = params.omega2;
    const Vec& b = params.b;

    VectorField field = [&, n](double t, const Vec& y) {
        const Vec v1 = y.head(n);
        const Vec lam = interp_rows(problem.grid, lam_path, t).cwiseMax(0.0);
        Vec dy(n + 1);
        dy.head(n) = Vec::Ones(n) + w2 * v1 - lambda_t_vec(t, v1, lam);
        dy(n) = -w2 * v1.dot(b) + v1.squaredNorm() / (2.0 * rho);
        return dy;
    };

    Vec terminal = Vec::Zero(n + 1);
    terminal.head(n) = -Vec::Ones(n);

    const Mat path = rk_integrate(field, terminal, problem.grid, config, OdeDirection::backward);

    ValueCoefficients out;
    out.kind = ObjectiveKind::OIM;
    out.grid = problem.grid;
    const int m = problem.grid.steps;
    out.v0.resize(static_cast<std::size_t>(m) + 1);
    out.v1 = Mat::Zero(m + 1, n);
    for (int k = 0; k <= m; ++k) {
        out.v1.row(k) = path.row(k).head(n);
        out.v0[static_cast<std::size_t>(k)] = path(k, n);
    }
    return out;
}

} // namespace

double ValueCoefficients::v0_at(double t) const { return interp_scalar(grid, v0, t); }

Vec ValueCoefficients::v1_at(double t) const { return interp_rows(grid, v1, t); }

Mat ValueCoefficients::v11_at(double t) const {
    if (v11.empty()) throw std::logic_error("ValueCoefficients: v11 absent for OIM");
    if (t <= grid.t0) return v11.front();
    if (t >= grid.t1) return v11.back();
    const int k = grid.interval_of(t);
    const double w = (t - grid.point(k)) / grid.dt();
    return (1.0 - w) * v11[static_cast<std::size_t>(k)] + w * v11[static_cast<std::size_t>(k) + 1];
}

double ValueCoefficients::value(const Vec& x, double t) const {
    double v = v0_at(t) + v1_at(t).dot(x);
    if (kind == ObjectiveKind::LSOG) v += 0.5 * x.dot(v11_at(t) * x);
    return v;
}

ValueCoefficients solve_lsog(const ControlProblem& problem, const OpinionParams& params,
                             const Mat& lam_path, const SolverConfig& config) {
    lam_path_checked(problem, params, lam_path);
    if (problem.kind != ObjectiveKind::LSOG)
        throw std::invalid_argument("solve_lsog: problem kind must be LSOG");
    StaticNet net{&params.topology};
    return solve_lsog_impl(
        problem, params, lam_path, config,
        [&net](double, const Mat& v11, const Vec& lam) { return net.v11_lambda(v11, lam); },
        [&net](double, const Vec& v, const Vec& lam) { return net.lambda_t_vec(v, lam); },
        [&net](double, const Vec& lam, const Mat& v11) { return net.jump_diag(lam, v11); });
}

ValueCoefficients solve_lsog_dynamic(const ControlProblem& problem, const OpinionParams& params,
                                     const Mat& lam_path, const AdjacencyAt& adjacency_at,
                                     const SolverConfig& config) {
    lam_path_checked(problem, params, lam_path);
    if (problem.kind != ObjectiveKind::LSOG)
        throw std::invalid_argument("solve_lsog_dynamic: problem kind must be LSOG");
    const int n = params.topology.num_users();
    return solve_lsog_impl(
        problem, params, lam_path, config,
        [&adjacency_at](double t, const Mat& v11, const Vec& lam) {
            return Mat((v11 * adjacency_at(t)) * lam.asDiagonal());
        },
        [&adjacency_at, n](double t, const Vec& v, const Vec& lam) {
            return Vec(lam.asDiagonal() * (adjacency_at(t).transpose() * v));
        },
        [&adjacency_at, n](double t, const Vec& lam, const Mat& v11) {
            const Mat a = adjacency_at(t);
            Vec d(n);
            for (int j = 0; j < n; ++j) d(j) = lam(j) * a.col(j).dot(v11 * a.col(j));
            return d;
        });
}

ValueCoefficients solve_oim(const ControlProblem& problem, const OpinionParams& params,
                            const Mat& lam_path, const SolverConfig& config) {
    lam_path_checked(problem, params, lam_path);
    if (problem.kind != ObjectiveKind::OIM)
        throw std::invalid_argument("solve_oim: problem kind must be OIM");
    StaticNet net{&params.topology};
    return solve_oim_impl(problem, params, lam_path, config,
                          [&net](double, const Vec& v, const Vec& lam) {
                              return net.lambda_t_vec(v, lam);
                          });
}

ValueCoefficients solve_oim_dynamic(const ControlProblem& problem, const OpinionParams& params,
                                    const Mat& lam_path, const AdjacencyAt& adjacency_at,
                                    const SolverConfig& config) {
    lam_path_checked(problem, params, lam_path);
    if (problem.kind != ObjectiveKind::OIM)
        throw std::invalid_argument("solve_oim_dynamic: problem kind must be OIM");
    return solve_oim_impl(problem, params, lam_path, config,
                          [&adjacency_at](double t, const Vec& v, const Vec& lam) {
                              return Vec(lam.asDiagonal() * (adjacency_at(t).transpose() * v));
                          });
}

Vec feedback_control(const ValueCoefficients& coeffs, const Vec& x, double t, double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("feedback_control: rho must be positive");
    if (t < coeffs.grid.t0 - 1e-12 || t > coeffs.grid.t1 + 1e-12)
        throw std::invalid_argument("feedback_control: t outside the coefficient grid span");
    if (coeffs.kind == ObjectiveKind::OIM) return -coeffs.v1_at(t) / rho;
    if (x.size() != coeffs.v1.cols())
        throw std::invalid_argument("feedback_control: state length mismatch");
    return -(coeffs.v1_at(t) + coeffs.v11_at(t) * x) / rho;
}

ItoDriftCheck verify_ito_drift(double v0, const Vec& v1, const Mat& v11,
                               const OpinionParams& params, const Vec& lam, const Vec& x,
                               const Vec& u, double dt, int n_samples, std::uint64_t seed) {
    params.validate();
    const int n = params.topology.num_users();
    if (v1.size() != n || v11.rows() != n || v11.cols() != n || lam.size() != n ||
        x.size() != n || u.size() != n)
        throw std::invalid_argument("verify_ito_drift: dimension mismatch");
    if (!(dt > 0.0)) throw std::invalid_argument("verify_ito_drift: dt must be positive");
    if (n_samples < 2) throw std::invalid_argument("verify_ito_drift: need n_samples >= 2");

    const auto value = [&](const Vec& z) { return v0 + v1.dot(z) + 0.5 * z.dot(v11 * z); };
    const auto h_col = [&](int j) {
        Vec h = Vec::Zero(n);
        const double hj = params.h_mode == HMode::linear ? x(j) : 1.0;
        for (const auto& [i, w] : params.topology.column_entries(j)) h(i) = w * hj;
        return h;
    };

    const Vec f = params.omega2 * (params.b - x);
    const Vec vx = v1 + v11 * x;
    double analytic = 0.5 * params.theta * params.theta * v11.trace() + vx.dot(f + u);
    for (int j = 0; j < n; ++j) {
        if (lam(j) == 0.0) continue;
        analytic += lam(j) * (value(x + h_col(j)) - value(x));
    }

    Rng rng = make_rng(derive_seed(seed, stream::noise));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double vx_base = value(x);
    const double sqrt_dt = std::sqrt(dt);

    double sum = 0.0, sum2 = 0.0;
    for (int s = 0; s < n_samples; ++s) {
        Vec z = x + (f + u) * dt;
        if (params.theta > 0.0)
            for (int i = 0; i < n; ++i) z(i) += params.theta * sqrt_dt * gauss(rng);
        for (int j = 0; j < n; ++j) {
            if (lam(j) > 0.0 && unif(rng) < lam(j) * dt) z += h_col(j);
        }
        const double d = (value(z) - vx_base) / dt;
        sum += d;
        sum2 += d * d;
    }
    ItoDriftCheck out;
    out.analytic = analytic;
    out.mc_estimate = sum / n_samples;
    const double var = (sum2 - sum * sum / n_samples) / (n_samples - 1);
    out.std_error = std::sqrt(std::max(0.0, var) / n_samples);
    return out;
}

} // namespace guiding
