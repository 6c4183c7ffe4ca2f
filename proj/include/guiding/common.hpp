#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace guiding {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Uniform time grid with m intervals on [t0, t1].
struct TimeGrid {
    double t0 = 0.0;
    double t1 = 1.0;
    int steps = 1;

    static TimeGrid uniform(double t0, double t1, int steps) {
        if (!(t1 > t0)) throw std::invalid_argument("TimeGrid: t1 must exceed t0");
        if (steps < 1) throw std::invalid_argument("TimeGrid: need at least one interval");
        return TimeGrid{t0, t1, steps};
    }

    double dt() const { return (t1 - t0) / steps; }
    int size() const { return steps + 1; }

    double point(int k) const {
        if (k < 0 || k > steps) throw std::out_of_range("TimeGrid: index out of range");
        if (k == steps) return t1;
        return t0 + k * dt();
    }

    std::vector<double> points() const {
        std::vector<double> out(static_cast<std::size_t>(steps) + 1);
        for (int k = 0; k <= steps; ++k) out[static_cast<std::size_t>(k)] = point(k);
        return out;
    }

    bool contains(double t) const { return t >= t0 && t <= t1; }

    // Index of the interval [tau_k, tau_{k+1}) containing t; the last interval
    // is closed at t1.
    int interval_of(double t) const {
        if (!contains(t)) throw std::out_of_range("TimeGrid: time outside grid span");
        int k = static_cast<int>((t - t0) / dt());
        if (k >= steps) k = steps - 1;
        return k;
    }

    bool operator==(const TimeGrid& o) const {
        return t0 == o.t0 && t1 == o.t1 && steps == o.steps;
    }
};

// Linear interpolation of row-indexed grid values: row k of `values` holds the
// vector at grid point k. Clamped at the grid ends.
inline Vec interp_rows(const TimeGrid& grid, const Mat& values, double t) {
    if (values.rows() != grid.size())
        throw std::invalid_argument("interp_rows: row count does not match grid");
    if (t <= grid.t0) return values.row(0).transpose();
    if (t >= grid.t1) return values.row(values.rows() - 1).transpose();
    const int k = grid.interval_of(t);
    const double w = (t - grid.point(k)) / grid.dt();
    return ((1.0 - w) * values.row(k) + w * values.row(k + 1)).transpose();
}

inline double interp_scalar(const TimeGrid& grid, const std::vector<double>& values, double t) {
    if (static_cast<int>(values.size()) != grid.size())
        throw std::invalid_argument("interp_scalar: size does not match grid");
    if (t <= grid.t0) return values.front();
    if (t >= grid.t1) return values.back();
    const int k = grid.interval_of(t);
    const double w = (t - grid.point(k)) / grid.dt();
    return (1.0 - w) * values[static_cast<std::size_t>(k)] + w * values[static_cast<std::size_t>(k) + 1];
}

} // namespace guiding
