#pragma once

#include "guiding/ode.hpp"
#include "guiding/sdesim.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace guiding {

/// Time-indexed coefficients of the value function
///   V(x, t) = v0(t) + v1(t)^T x + 0.5 x^T v11(t) x     (LSOG)
///   V(x, t) = v0(t) + v1(t)^T x                        (OIM, v11 absent)
struct ValueCoefficients {
    ObjectiveKind kind = ObjectiveKind::LSOG;
    TimeGrid grid;
    std::vector<double> v0;   // per grid point
    Mat v1;                   // (m+1) x U
    std::vector<Mat> v11;     // per grid point, empty for OIM

    double v0_at(double t) const;
    Vec v1_at(double t) const;   // linear interpolation
    Mat v11_at(double t) const;

    double value(const Vec& x, double t) const;
};

/// Backward solve of the LSOG Riccati triple with the symmetrized right-hand side
///   -v11' = I - 2 omega2 v11 + (v11 Lambda + Lambda^T v11) - v11^2/rho + D(lambda, v11)
///   -v1'  = -a + (-omega2 I + Lambda^T - v11/rho) v1 + omega2 v11 b
///   -v0'  = omega2 b^T v1 + (theta^2/2) tr(v11) - v1^T v1 / (2 rho)
/// with v11(T) = I, v1(T) = -a, v0(T) = 0. `lam_path` holds the intensity at the
/// grid points (row k = lambda(tau_k)); stages interpolate linearly.
ValueCoefficients solve_lsog(const ControlProblem& problem, const OpinionParams& params,
                             const Mat& lam_path, const SolverConfig& config = {});

/// Backward solve of the OIM linear pair
///   v1' = 1 + omega2 v1 - Lambda^T v1,   v1(T) = -1
///   v0' = -omega2 v1^T b + v1^T v1 / (2 rho),   v0(T) = 0
ValueCoefficients solve_oim(const ControlProblem& problem, const OpinionParams& params,
                            const Mat& lam_path, const SolverConfig& config = {});

/// Time-varying network variants: the adjacency is rebuilt from `adjacency_at`
/// at every integrator stage.
using AdjacencyAt = std::function<Mat(double)>;

ValueCoefficients solve_lsog_dynamic(const ControlProblem& problem, const OpinionParams& params,
                                     const Mat& lam_path, const AdjacencyAt& adjacency_at,
                                     const SolverConfig& config = {});
ValueCoefficients solve_oim_dynamic(const ControlProblem& problem, const OpinionParams& params,
                                    const Mat& lam_path, const AdjacencyAt& adjacency_at,
                                    const SolverConfig& config = {});

/// u* = -(v1(t) + v11(t) x)/rho for LSOG, u* = -v1(t)/rho for OIM.
Vec feedback_control(const ValueCoefficients& coeffs, const Vec& x, double t, double rho);

class HjbPolicy final : public Policy {
public:
    HjbPolicy(ValueCoefficients coeffs, double rho) : coeffs_(std::move(coeffs)), rho_(rho) {
        if (!(rho_ > 0.0)) throw std::invalid_argument("HjbPolicy: rho must be positive");
    }
    Vec evaluate(const Vec& x, double t) const override {
        return feedback_control(coeffs_, x, t, rho_);
    }
    const ValueCoefficients& coefficients() const { return coeffs_; }

private:
    ValueCoefficients coeffs_;
    double rho_;
};

/// Numerical check of the jump-diffusion chain rule: compares the analytic
/// one-step drift of a static quadratic V against the Monte-Carlo estimate
/// E[(V(x(t+dt)) - V(x)) / dt] over one-step simulations with Bernoulli jumps.
struct ItoDriftCheck {
    double analytic = 0.0;
    double mc_estimate = 0.0;
    double std_error = 0.0;
};

ItoDriftCheck verify_ito_drift(double v0, const Vec& v1, const Mat& v11,
                               const OpinionParams& params, const Vec& lam, const Vec& x,
                               const Vec& u, double dt, int n_samples, std::uint64_t seed);

} // namespace guiding
