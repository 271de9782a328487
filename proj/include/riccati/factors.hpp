#pragma once

// Integrating factors for y'' + p y' + q y = f.
//
// beta solves beta' = beta p / 2, so beta = exp(integral of p/2).
// alpha solves alpha'' = h alpha with h = -q + p'/2 + p^2/4, normalised to
// alpha = 1, alpha' = 0 at the base point. alpha is the limit of the Picard
// iteration
//
//     alpha_{n+1}(x) = 1 + int_b^x int_b^t h(s) alpha_n(s) ds dt,
//
// whose n-th iterate equals the n-th partial sum of the ordered-exponential
// series in the kernel form sum_j T_j, T_j(x) = int_b^x (x - t) h(t) T_{j-1}(t) dt.

#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "riccati/csv.hpp"
#include "riccati/errors.hpp"
#include "riccati/expr.hpp"
#include "riccati/grid.hpp"

namespace riccati {

struct SolverConfig {
    double tol = 1e-12;           ///< Picard stop: sup correction <= tol * (1 + sup alpha)
    std::size_t max_iter = 200;
    double alpha_floor = 1e-8;    ///< |alpha| at or below this counts as a zero
    /// On an alpha zero, shrink the domain to the zero-free interval around the
    /// base point instead of failing.
    bool restrict_to_alpha_support = false;
};

/// h = -q + p'/2 + p^2/4, built symbolically.
inline Expr alpha_coefficient(const Expr& p, const Expr& q) {
    return -q + constant(0.5) * differentiate(p) + constant(0.25) * power(p, 2.0);
}

/// Base node index; defaults to the left endpoint. A base point that is not a
/// grid node is rejected.
inline std::size_t base_index(const Grid& grid, std::optional<double> base_point) {
    return base_point ? grid.node_index(*base_point) : 0;
}

// ---------------------------------------------------------------------------
// Derived coefficients of the Riccati equation y' = q0 + q1 y + q2 y^2 under
// y = -u'/(q2 u), which gives u'' + p u' + q u = 0.

struct DerivedCoefficients {
    Expr p;       ///< -q1 - (ln q2)'
    Expr q;       ///< q2 q0
    Expr h;       ///< -q + p'/2 + p^2/4
    Expr dp;
    Expr dq1;
    Expr dlnq2;   ///< q2'/q2
    Expr d2lnq2;
    Expr h_expanded;  ///< h written directly in q0, q1, q2 and their derivatives
};

inline DerivedCoefficients derive_coefficients(const Expr& q0, const Expr& q1, const Expr& q2, const Params& params,
                                               const Grid& probe) {
    DerivedCoefficients d;
    d.dq1 = differentiate(q1);
    d.dlnq2 = differentiate(q2) / q2;
    d.d2lnq2 = differentiate(d.dlnq2);
    d.p = -q1 - d.dlnq2;
    d.q = q2 * q0;
    d.dp = differentiate(d.p);
    d.h = -d.q + constant(0.5) * d.dp + constant(0.25) * power(d.p, 2.0);
    d.h_expanded = -(q2 * q0) - constant(0.5) * d.dq1 - constant(0.5) * d.d2lnq2 +
                   constant(0.25) * power(q1, 2.0) + constant(0.5) * q1 * d.dlnq2 +
                   constant(0.25) * power(d.dlnq2, 2.0);

    GridFunction q2v = tabulate(q2, probe, params, "q2");
    for (std::size_t k = 0; k < probe.size(); ++k) {
        if (q2v[k] == 0.0 || (k > 0 && (q2v[k - 1] < 0.0) != (q2v[k] < 0.0))) {
            throw NumericalError("derive_coefficients", "q2 vanishes at x=" + std::to_string(probe.x(k)) +
                                                            " (node " + std::to_string(k) + ")");
        }
    }

    GridFunction hv = tabulate(d.h, probe, params, "h");
    GridFunction hx = tabulate(d.h_expanded, probe, params, "h");
    for (std::size_t k = 0; k < probe.size(); ++k) {
        const double x = probe.x(k);
        const double scale = 1.0 + std::abs(eval(d.q, x, params)) + std::abs(eval(d.dp, x, params)) +
                             std::pow(eval(d.p, x, params), 2) + std::abs(eval(d.d2lnq2, x, params)) +
                             std::pow(eval(q1, x, params), 2) + std::pow(eval(d.dlnq2, x, params), 2);
        if (std::abs(hv[k] - hx[k]) > 1e-10 * scale) {
            throw NumericalError("derive_coefficients",
                                 "composed and expanded h disagree at x=" + std::to_string(x));
        }
    }
    return d;
}

// ---------------------------------------------------------------------------

struct BetaFactor {
    GridFunction beta;
    GridFunction beta_prime;
};

/// beta = exp(int_b^x p/2), beta' = beta p / 2 (from the defining identity).
inline BetaFactor compute_beta(const GridFunction& p, std::size_t base) {
    GridFunction half = 0.5 * p;
    GridFunction beta = cumulative_integral(half, base).map([](double v) { return std::exp(v); });
    for (std::size_t k = 0; k < beta.size(); ++k) {
        if (!std::isfinite(beta[k]) || beta[k] == 0.0) {
            throw NumericalError("beta", "exp overflow at node " + std::to_string(k) +
                                             " (x=" + std::to_string(p.grid().x(k)) + ")");
        }
    }
    return {beta, beta * half};
}

inline BetaFactor compute_beta(const Expr& p, const Grid& grid, const Params& params, std::optional<double> base_point) {
    return compute_beta(tabulate(p, grid, params, "p"), base_index(grid, base_point));
}

// ---------------------------------------------------------------------------

struct AlphaFactor {
    GridFunction alpha;
    GridFunction alpha_prime;
    std::size_t iterations = 0;
    double terminal_correction = 0.0;
    std::vector<double> corrections;  ///< sup-norm of each Picard update
};

/// One Picard update: 1 + int_b int_b h * alpha.
inline GridFunction picard_step(const GridFunction& h, const GridFunction& alpha, std::size_t base) {
    return 1.0 + cumulative_integral(cumulative_integral(h * alpha, base), base);
}

inline AlphaFactor compute_alpha(const GridFunction& h, std::size_t base, double tol, std::size_t max_iter) {
    AlphaFactor out{GridFunction(h.grid(), 1.0), GridFunction(h.grid()), 0, 0.0, {}};
    for (std::size_t it = 1; it <= max_iter; ++it) {
        GridFunction next = picard_step(h, out.alpha, base);
        double corr = 0.0;
        for (std::size_t k = 0; k < next.size(); ++k) {
            if (!std::isfinite(next[k])) {
                out.corrections.push_back(INFINITY);
                throw ConvergenceError("alpha", out.corrections);
            }
            corr = std::max(corr, std::abs(next[k] - out.alpha[k]));
        }
        out.alpha = std::move(next);
        out.corrections.push_back(corr);
        if (corr <= tol * (1.0 + sup_norm(out.alpha))) {
            out.iterations = it;
            out.terminal_correction = corr;
            out.alpha_prime = cumulative_integral(h * out.alpha, base);
            return out;
        }
    }
    throw ConvergenceError("alpha", out.corrections);
}

inline AlphaFactor compute_alpha(const Expr& h, const Grid& grid, const Params& params, std::optional<double> base_point,
                                 double tol, std::size_t max_iter) {
    return compute_alpha(tabulate(h, grid, params, "h"), base_index(grid, base_point), tol, max_iter);
}

/// Terms T_0..T_k of the kernel-form series, each by direct quadrature of
/// int_b^x (x - t) h(t) T_{j-1}(t) dt at every node x. Cost is O(k n^2); meant
/// as an independent check on the Picard iterates.
inline std::vector<GridFunction> alpha_series_terms(const GridFunction& h, std::size_t base, std::size_t k) {
    if (k > 4) throw std::invalid_argument("alpha_series_terms: at most 4 terms");
    const Grid& grid = h.grid();
    const std::size_t n = grid.size();
    const double step = grid.step();
    std::vector<GridFunction> terms{GridFunction(grid, 1.0)};
    std::vector<double> integrand(n), running(n);
    for (std::size_t j = 1; j <= k; ++j) {
        const GridFunction& prev = terms.back();
        GridFunction term(grid);
        for (std::size_t m = 0; m < n; ++m) {
            if (m == base) continue;
            const double xm = grid.x(m);
            for (std::size_t i = 0; i < n; ++i) integrand[i] = (xm - grid.x(i)) * h[i] * prev[i];
            quadrature::cumulative(integrand, step, base, running);
            term[m] = running[m];
        }
        terms.push_back(std::move(term));
    }
    return terms;
}

inline std::vector<GridFunction> alpha_series_terms(const Expr& h, const Grid& grid, const Params& params,
                                                    std::optional<double> base_point, std::size_t k) {
    return alpha_series_terms(tabulate(h, grid, params, "h"), base_index(grid, base_point), k);
}

// ---------------------------------------------------------------------------

struct IntegratingFactors {
    GridFunction alpha;
    GridFunction alpha_prime;
    GridFunction beta;
    GridFunction beta_prime;
    double base_point;
    std::size_t base_index;
    std::size_t iterations;
    double terminal_correction;
    std::vector<double> corrections;

    IntegratingFactors slice(std::size_t lo, std::size_t hi) const {
        return {alpha.slice(lo, hi), alpha_prime.slice(lo, hi), beta.slice(lo, hi), beta_prime.slice(lo, hi),
                base_point,          base_index - lo,           iterations,         terminal_correction,
                corrections};
    }
};

inline IntegratingFactors compute_factors(const GridFunction& p, const GridFunction& h, std::size_t base,
                                          const SolverConfig& cfg) {
    BetaFactor b = compute_beta(p, base);
    AlphaFactor a = compute_alpha(h, base, cfg.tol, cfg.max_iter);
    return {std::move(a.alpha), std::move(a.alpha_prime), std::move(b.beta), std::move(b.beta_prime),
            p.grid().x(base),   base,                      a.iterations,      a.terminal_correction,
            std::move(a.corrections)};
}

/// Cells [x_k, x_{k+1}] where alpha changes sign or touches the floor.
inline std::vector<Interval> alpha_zero_cells(const GridFunction& alpha, double floor) {
    std::vector<Interval> cells;
    const Grid& g = alpha.grid();
    for (std::size_t k = 0; k + 1 < alpha.size(); ++k) {
        const bool small = std::abs(alpha[k]) <= floor || std::abs(alpha[k + 1]) <= floor;
        const bool flips = (alpha[k] < 0.0) != (alpha[k + 1] < 0.0);
        if (small || flips) cells.push_back({g.x(k), g.x(k + 1)});
    }
    return cells;
}

/// Largest node range [lo, hi] around `base` on which |alpha| > floor with one
/// sign, trimmed so that the node count stays odd.
struct NodeRange {
    std::size_t lo;
    std::size_t hi;
};

inline NodeRange alpha_support(const GridFunction& alpha, std::size_t base, double floor) {
    auto ok = [&](std::size_t k) {
        return std::abs(alpha[k]) > floor && (alpha[k] < 0.0) == (alpha[base] < 0.0);
    };
    if (!ok(base)) throw AlphaZeroError("alpha", {{alpha.grid().x(base), alpha.grid().x(base)}});
    std::size_t lo = base;
    std::size_t hi = base;
    while (lo > 0 && ok(lo - 1)) --lo;
    while (hi + 1 < alpha.size() && ok(hi + 1)) ++hi;
    if ((hi - lo) % 2 == 1) {
        if (hi > base) {
            --hi;
        } else {
            ++lo;
        }
    }
    if (hi - lo < 2) throw AlphaZeroError("alpha", alpha_zero_cells(alpha, floor));
    return {lo, hi};
}

/// `iteration,correction` rows for convergence plots.
inline void write_convergence_csv(std::ostream& os, const std::vector<double>& corrections) {
    os << "iteration,correction\n";
    for (std::size_t i = 0; i < corrections.size(); ++i) {
        os << (i + 1) << ',' << csv_number(corrections[i]) << '\n';
    }
}

}  // namespace riccati
