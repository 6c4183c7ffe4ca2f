#include "guiding/ode.hpp"

#include <cmath>
#include <sstream>

namespace guiding {

namespace {

void check_finite(const Vec& y, double t) {
    if (!y.allFinite()) {
        std::ostringstream os;
        os << "rk_integrate: non-finite field output at t = " << t;
        throw std::runtime_error(os.str());
    }
}

Vec rk4_step(const VectorField& f, double t, const Vec& y, double h) {
    const Vec k1 = f(t, y);
    const Vec k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
    const Vec k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
    const Vec k4 = f(t + h, y + h * k3);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

// Adaptive integration over one signed span [t, t + span]; returns the value at
// the far end. `h` carries the step estimate across segments.
Vec dp45_span(const VectorField& f, double t, Vec y, double span, const SolverConfig& cfg,
              double& h, long& steps_used) {
    const double sign = span >= 0.0 ? 1.0 : -1.0;
    const double t_end = t + span;
    if (h == 0.0 || h * sign <= 0.0) h = span / 16.0;
    Vec k1 = f(t, y);
    check_finite(k1, t);
    while (sign * (t_end - t) > 1e-14 * (std::abs(t) + std::abs(t_end) + 1.0)) {
        if (++steps_used > cfg.max_steps)
            throw std::runtime_error("rk_integrate: adaptive step budget exhausted");
        if (sign * h > sign * (t_end - t)) h = t_end - t;
        if (std::abs(h) < 1e-14 * (std::abs(t) + 1.0)) {
            std::ostringstream os;
            os << "rk_integrate: step-size underflow at t = " << t;
            throw std::runtime_error(os.str());
        }
        const Vec k2 = f(t + c2 * h, y + h * (a21 * k1));
        const Vec k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
        const Vec k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const Vec k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Vec k6 = f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Vec y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Vec k7 = f(t + h, y5);
        check_finite(y5, t + h);
        const Vec err_vec = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double err = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y(i)), std::abs(y5(i)));
            err = std::max(err, std::abs(err_vec(i)) / sc);
        }
        if (err <= 1.0) {
            t += h;
            y = y5;
            k1 = k7; // FSAL
        }
        const double factor = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::clamp(factor, 0.2, 5.0);
    }
    return y;
}

} // namespace

Mat rk_integrate(const VectorField& field, const Vec& boundary_value, const TimeGrid& grid,
                 const SolverConfig& config, OdeDirection direction) {
    config.validate();
    const int m = grid.steps;
    Mat out(m + 1, boundary_value.size());
    const bool backward = direction == OdeDirection::backward;
    const int start = backward ? m : 0;
    const int step_dir = backward ? -1 : 1;
    out.row(start) = boundary_value.transpose();

    Vec y = boundary_value;
    double h_adaptive = 0.0;
    long steps_used = 0;
    for (int k = start; k != (backward ? 0 : m); k += step_dir) {
        const double t_from = grid.point(k);
        const double t_to = grid.point(k + step_dir);
        if (config.method == OdeMethod::fixed_rk4) {
            const double span = t_to - t_from;
            int substeps = 1;
            if (config.step > 0.0)
                substeps = std::max(1, static_cast<int>(std::ceil(std::abs(span) / config.step - 1e-12)));
            const double h = span / substeps;
            double t = t_from;
            for (int s = 0; s < substeps; ++s) {
                if (++steps_used > config.max_steps)
                    throw std::runtime_error("rk_integrate: step budget exhausted");
                y = rk4_step(field, t, y, h);
                check_finite(y, t + h);
                t += h;
            }
        } else {
            y = dp45_span(field, t_from, y, t_to - t_from, config, h_adaptive, steps_used);
        }
        out.row(k + step_dir) = y.transpose();
    }
    return out;
}

} // namespace guiding
