#pragma once

#include "guiding/common.hpp"

#include <functional>

namespace guiding {

enum class OdeMethod { fixed_rk4, dormand_prince_45 };

struct SolverConfig {
    OdeMethod method = OdeMethod::fixed_rk4;
    double step = 0.0;      // fixed_rk4 step; 0 means one step per grid interval
    double abs_tol = 1e-10; // adaptive mode
    double rel_tol = 1e-10;
    long max_steps = 2'000'000;

    void validate() const {
        if (step < 0.0) throw std::invalid_argument("SolverConfig: step must be nonnegative");
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
            throw std::invalid_argument("SolverConfig: tolerances must be positive");
        if (max_steps < 1) throw std::invalid_argument("SolverConfig: max_steps must be positive");
    }
};

enum class OdeDirection { forward, backward };

using VectorField = std::function<Vec(double, const Vec&)>;

/// Integrates y' = f(t, y) across the grid and returns the value at every grid
/// point (row k = value at tau_k). Backward direction starts from the terminal
/// value at tau_m and integrates down to tau_0; forward starts at tau_0.
/// fixed_rk4 takes one 4-stage step per grid interval (or ceil(dt/step) substeps
/// when a smaller step is configured); dormand_prince_45 adapts internally and
/// lands on the grid points exactly.
Mat rk_integrate(const VectorField& field, const Vec& boundary_value, const TimeGrid& grid,
                 const SolverConfig& config = {}, OdeDirection direction = OdeDirection::backward);

} // namespace guiding
