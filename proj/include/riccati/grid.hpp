#pragma once

// Uniform grids, sampled functions and the quadrature/differencing primitives
// every other module is built on.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "riccati/errors.hpp"
#include "riccati/expr.hpp"

namespace riccati {

/// Uniform partition of [x_lo, x_hi] into an odd number n >= 3 of nodes.
class Grid {
public:
    Grid(double x_lo, double x_hi, std::size_t n) : x_lo_(x_lo), x_hi_(x_hi), n_(n) {
        if (!(std::isfinite(x_lo) && std::isfinite(x_hi) && x_lo < x_hi))
            throw std::invalid_argument("grid: require finite x_lo < x_hi");
        if (n < 3 || n % 2 == 0) throw std::invalid_argument("grid: node count must be odd and >= 3");
    }

    double x_lo() const noexcept { return x_lo_; }
    double x_hi() const noexcept { return x_hi_; }
    std::size_t size() const noexcept { return n_; }
    double step() const noexcept { return (x_hi_ - x_lo_) / static_cast<double>(n_ - 1); }

    double x(std::size_t k) const noexcept {
        return k + 1 == n_ ? x_hi_ : x_lo_ + static_cast<double>(k) * step();
    }

    bool contains(double x) const noexcept {
        double slack = 1e-12 * (x_hi_ - x_lo_);
        return x >= x_lo_ - slack && x <= x_hi_ + slack;
    }

    /// Index of the node at `x`; throws unless `x` lies on a node (to 1e-9 of a step).
    std::size_t node_index(double x) const {
        if (!contains(x)) throw std::out_of_range("grid: x=" + std::to_string(x) + " outside domain");
        double t = (x - x_lo_) / step();
        double k = std::round(t);
        if (std::abs(t - k) > 1e-9) throw std::invalid_argument("grid: x=" + std::to_string(x) + " is not a node");
        return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(n_ - 1)));
    }

    std::size_t nearest_node(double x) const {
        double t = std::round((x - x_lo_) / step());
        return static_cast<std::size_t>(std::clamp(t, 0.0, static_cast<double>(n_ - 1)));
    }

    /// Sub-grid spanning nodes [lo, hi]; the node count must stay odd.
    Grid sub_grid(std::size_t lo, std::size_t hi) const { return Grid(x(lo), x(hi), hi - lo + 1); }

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.x_lo_ == b.x_lo_ && a.x_hi_ == b.x_hi_ && a.n_ == b.n_;
    }

private:
    double x_lo_;
    double x_hi_;
    std::size_t n_;
};

/// Samples of a scalar function at every node of a grid.
class GridFunction {
public:
    explicit GridFunction(Grid grid, double fill = 0.0) : grid_(grid), values_(grid.size(), fill) {}

    GridFunction(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.size()) throw std::invalid_argument("grid function: size mismatch");
    }

    const Grid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t k) const noexcept { return values_[k]; }
    double& operator[](std::size_t k) noexcept { return values_[k]; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    /// Restriction to nodes [lo, hi] of the underlying grid.
    GridFunction slice(std::size_t lo, std::size_t hi) const {
        return GridFunction(grid_.sub_grid(lo, hi),
                            std::vector<double>(values_.begin() + static_cast<std::ptrdiff_t>(lo),
                                                values_.begin() + static_cast<std::ptrdiff_t>(hi) + 1));
    }

    template <class F>
    GridFunction map(F&& f) const {
        GridFunction out(grid_);
        for (std::size_t k = 0; k < size(); ++k) out.values_[k] = f(values_[k]);
        return out;
    }

    template <class F>
    friend GridFunction zip(const GridFunction& a, const GridFunction& b, F&& f) {
        check_same(a, b);
        GridFunction out(a.grid_);
        for (std::size_t k = 0; k < a.size(); ++k) out.values_[k] = f(a.values_[k], b.values_[k]);
        return out;
    }

    friend GridFunction operator+(const GridFunction& a, const GridFunction& b) {
        return zip(a, b, [](double u, double v) { return u + v; });
    }
    friend GridFunction operator-(const GridFunction& a, const GridFunction& b) {
        return zip(a, b, [](double u, double v) { return u - v; });
    }
    friend GridFunction operator*(const GridFunction& a, const GridFunction& b) {
        return zip(a, b, [](double u, double v) { return u * v; });
    }
    friend GridFunction operator/(const GridFunction& a, const GridFunction& b) {
        return zip(a, b, [](double u, double v) { return u / v; });
    }
    friend GridFunction operator*(double s, const GridFunction& a) {
        return a.map([s](double u) { return s * u; });
    }
    friend GridFunction operator+(double s, const GridFunction& a) {
        return a.map([s](double u) { return s + u; });
    }

private:
    static void check_same(const GridFunction& a, const GridFunction& b) {
        if (!(a.grid_ == b.grid_)) throw std::invalid_argument("grid function: grids differ");
    }

    Grid grid_;
    std::vector<double> values_;
};

inline double sup_norm(const GridFunction& f) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

/// Sup-norm over interior nodes only.
inline double interior_sup_norm(const GridFunction& f) {
    double m = 0.0;
    for (std::size_t k = 1; k + 1 < f.size(); ++k) m = std::max(m, std::abs(f[k]));
    return m;
}

// ---------------------------------------------------------------------------

/// Pointwise evaluation; domain errors are rethrown with the offending node.
inline GridFunction tabulate(const Expr& e, const Grid& grid, const Params& params = {},
                             const std::string& label = "tabulate") {
    GridFunction out(grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        try {
            out[k] = eval(e, grid.x(k), params);
        } catch (const EvalError& err) {
            throw TabulationError(label, k, grid.x(k), err);
        }
    }
    return out;
}

namespace quadrature {

/// Integral over the single cell [x_i, x_{i+1}] with a four-point cubic rule,
/// centred where both neighbours exist and one-sided at the ends. Three samples
/// fall back to the parabola through them, two to the trapezoid.
inline double cell(std::span<const double> f, double step, std::size_t i) {
    const std::size_t n = f.size();
    if (n >= 4) {
        if (i >= 1 && i + 2 < n) return step / 24.0 * (-f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2]);
        if (i == 0) return step / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]);
        return step / 24.0 * (f[i - 2] - 5.0 * f[i - 1] + 19.0 * f[i] + 9.0 * f[i + 1]);
    }
    if (n == 3) {
        return i == 0 ? step / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2])
                      : step / 12.0 * (-f[0] + 8.0 * f[1] + 5.0 * f[2]);
    }
    return step / 2.0 * (f[i] + f[i + 1]);
}

/// Running integral of equally spaced samples: out[k] = integral from sample
/// `anchor` to sample k (negative step direction to the left of the anchor).
///
/// Even offsets from the anchor use composite Simpson. An odd offset adds the
/// cell next to the previous even node, so every node is exact for cubics once
/// the grid has at least four samples.
inline void cumulative(std::span<const double> f, double step, std::size_t anchor, std::span<double> out) {
    const std::size_t n = f.size();
    if (n == 0) return;
    out[anchor] = 0.0;
    for (std::size_t k = anchor + 2; k < n; k += 2) out[k] = out[k - 2] + step / 3.0 * (f[k - 2] + 4.0 * f[k - 1] + f[k]);
    for (std::size_t k = anchor + 1; k < n; k += 2) out[k] = out[k - 1] + cell(f, step, k - 1);
    for (std::size_t k = anchor; k >= 2; k -= 2) out[k - 2] = out[k] - step / 3.0 * (f[k - 2] + 4.0 * f[k - 1] + f[k]);
    for (std::size_t k = anchor; k >= 1; k -= 2) {
        out[k - 1] = out[k] - cell(f, step, k - 1);
        if (k < 2) break;
    }
}

inline double definite(std::span<const double> f, double step) {
    if (f.size() < 2) return 0.0;
    std::vector<double> out(f.size());
    cumulative(f, step, 0, out);
    return out.back();
}

}  // namespace quadrature

/// F(x_k) = integral of f from the node `anchor` to x_k (signed, so negative
/// to the left of the anchor when f > 0).
inline GridFunction cumulative_integral(const GridFunction& f, std::size_t anchor = 0) {
    if (anchor >= f.size()) throw std::out_of_range("cumulative_integral: anchor outside grid");
    GridFunction out(f.grid());
    quadrature::cumulative(f.values(), f.grid().step(), anchor, out.values());
    return out;
}

inline double definite_integral(const GridFunction& f) { return cumulative_integral(f)[f.size() - 1]; }

/// Central first difference; second-order one-sided stencils at the ends.
inline GridFunction first_difference(const GridFunction& f) {
    const std::size_t n = f.size();
    const double h = f.grid().step();
    GridFunction out(f.grid());
    for (std::size_t k = 1; k + 1 < n; ++k) out[k] = (f[k + 1] - f[k - 1]) / (2.0 * h);
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    return out;
}

/// Central second difference; second-order one-sided stencils at the ends
/// (falls back to the single interior value when n == 3).
inline GridFunction second_difference(const GridFunction& f) {
    const std::size_t n = f.size();
    const double h2 = f.grid().step() * f.grid().step();
    GridFunction out(f.grid());
    for (std::size_t k = 1; k + 1 < n; ++k) out[k] = (f[k - 1] - 2.0 * f[k] + f[k + 1]) / h2;
    if (n >= 4) {
        out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
        out[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
    } else {
        out[0] = out[1];
        out[n - 1] = out[1];
    }
    return out;
}

/// Local cubic (four-node Lagrange) interpolation; exact at nodes.
inline double eval_at(const GridFunction& f, double x) {
    const Grid& g = f.grid();
    if (!g.contains(x)) throw std::out_of_range("eval_at: x=" + std::to_string(x) + " outside grid domain");
    const std::size_t n = f.size();
    const double t = std::clamp((x - g.x_lo()) / g.step(), 0.0, static_cast<double>(n - 1));
    const double nearest = std::round(t);
    if (std::abs(t - nearest) < 1e-12) return f[static_cast<std::size_t>(nearest)];

    const std::size_t points = std::min<std::size_t>(4, n);
    std::size_t cell = static_cast<std::size_t>(std::floor(t));
    std::size_t first = cell >= 1 ? cell - 1 : 0;
    first = std::min(first, n - points);
    double sum = 0.0;
    for (std::size_t i = 0; i < points; ++i) {
        double w = 1.0;
        const double ti = static_cast<double>(first + i);
        for (std::size_t j = 0; j < points; ++j) {
            if (j == i) continue;
            const double tj = static_cast<double>(first + j);
            w *= (t - tj) / (ti - tj);
        }
        sum += w * f[first + i];
    }
    return sum;
}

}  // namespace riccati
