#pragma once

// Riccati equation y' = q0 + q1 y + q2 y^2.
//
// With u'' + p u' + q u = 0 solved by u = (alpha/beta)(C2 + C1 S), S = int_b^x alpha^-2,
// the substitution y = -u'/(q2 u) gives the one-parameter family
//
//   y(x; C) = y_p(x) + y_q(x; C),
//   y_p = beta'/(q2 beta) - alpha'/(q2 alpha),
//   y_q = -1 / (q2 alpha^2 (C + S)).
//
// C = +inf selects y_p itself. Poles of y are the zeros of C + S.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "riccati/csv.hpp"
#include "riccati/errors.hpp"
#include "riccati/expr.hpp"
#include "riccati/factors.hpp"
#include "riccati/grid.hpp"

namespace riccati {

struct RiccatiProblem {
    Expr q0;
    Expr q1;
    Expr q2;
    Params params;
    Grid grid;
    std::optional<double> base_point;
};

/// Sup-norm residuals of y' - (q0 + q1 y + q2 y^2). `identity` uses y' assembled
/// from alpha', beta' and h; `finite_difference` uses central differences of the
/// sampled y on interior nodes, so it also measures how well alpha', S and alpha
/// agree with one another.
struct ResidualReport {
    double identity = 0.0;
    double finite_difference = 0.0;
    std::size_t nodes_checked = 0;
    std::size_t nodes_excluded = 0;

    double worst() const { return std::max(identity, finite_difference); }
};

inline constexpr double particular_constant = std::numeric_limits<double>::infinity();
inline constexpr std::size_t pole_exclusion_steps = 5;

class RiccatiSolution {
public:
    struct Tabulated {
        GridFunction q0, q1, q2, dq2, p, dp, h;
    };

    RiccatiSolution(RiccatiProblem problem, DerivedCoefficients coeffs, IntegratingFactors factors, Tabulated tab,
                    std::vector<double> alpha_zeros, bool restricted)
        : problem_(std::move(problem)), coeffs_(std::move(coeffs)), factors_(std::move(factors)),
          tab_(std::move(tab)), alpha_zeros_(std::move(alpha_zeros)), restricted_(restricted),
          y_p_(tab_.q2.grid()), S_(tab_.q2.grid()) {
        const auto& a = factors_.alpha;
        for (std::size_t k = 0; k < a.size(); ++k) {
            y_p_[k] = factors_.beta_prime[k] / (tab_.q2[k] * factors_.beta[k]) -
                      factors_.alpha_prime[k] / (tab_.q2[k] * a[k]);
        }
        S_ = cumulative_integral(a.map([](double v) { return 1.0 / (v * v); }), factors_.base_index);
    }

    const Grid& grid() const noexcept { return y_p_.grid(); }
    const RiccatiProblem& problem() const noexcept { return problem_; }
    const DerivedCoefficients& coefficients() const noexcept { return coeffs_; }
    const IntegratingFactors& factors() const noexcept { return factors_; }
    const Tabulated& tabulated() const noexcept { return tab_; }
    const GridFunction& y_p() const noexcept { return y_p_; }
    /// int_b^x dt / alpha^2
    const GridFunction& S() const noexcept { return S_; }
    const GridFunction& alpha() const noexcept { return factors_.alpha; }
    const GridFunction& beta() const noexcept { return factors_.beta; }
    /// Located zeros of alpha on the requested domain (non-empty only for restricted solves).
    const std::vector<double>& alpha_zeros() const noexcept { return alpha_zeros_; }
    bool restricted() const noexcept { return restricted_; }

    GridFunction denominator(double c) const { return S_.map([c](double s) { return c + s; }); }

    GridFunction y_q(double c) const {
        GridFunction out(grid());
        if (std::isinf(c)) return out;
        for (std::size_t k = 0; k < out.size(); ++k) {
            const double a = factors_.alpha[k];
            out[k] = -1.0 / (tab_.q2[k] * a * a * (c + S_[k]));
        }
        return out;
    }

    GridFunction y(double c) const { return y_p_ + y_q(c); }

    /// y' from the defining identities alpha'' = h alpha, beta' = beta p/2, S' = alpha^-2.
    GridFunction y_prime(double c) const {
        GridFunction out(grid());
        const auto& a = factors_.alpha;
        const auto& ap = factors_.alpha_prime;
        for (std::size_t k = 0; k < out.size(); ++k) {
            const double q2 = tab_.q2[k];
            const double dq2 = tab_.dq2[k];
            const double w = ap[k] / a[k];
            double d = (0.5 * tab_.dp[k] - tab_.h[k] + w * w) / q2 - y_p_[k] * dq2 / q2;
            if (!std::isinf(c)) {
                const double D = c + S_[k];
                const double g = q2 * a[k] * a[k] * D;
                const double dg = dq2 * a[k] * a[k] * D + 2.0 * q2 * a[k] * ap[k] * D + q2;
                d += dg / (g * g);
            }
            out[k] = d;
        }
        return out;
    }

    double q2_at(double x) const { return eval(problem_.q2, x, problem_.params); }

    /// y(x; C) at an arbitrary domain point, interpolating the grid parts.
    double value_at(double x, double c) const {
        const double yp = eval_at(y_p_, x);
        if (std::isinf(c)) return yp;
        const double a = eval_at(factors_.alpha, x);
        return yp - 1.0 / (q2_at(x) * a * a * (c + eval_at(S_, x)));
    }

private:
    RiccatiProblem problem_;
    DerivedCoefficients coeffs_;
    IntegratingFactors factors_;
    Tabulated tab_;
    std::vector<double> alpha_zeros_;
    bool restricted_;
    GridFunction y_p_;
    GridFunction S_;
};

namespace detail {

/// Root of the interpolant of `f` inside [x_lo, x_hi] by bisection; expects a sign change.
inline double bisect_interpolant(const GridFunction& f, double offset, double lo, double hi, double width) {
    double flo = eval_at(f, lo) + offset;
    while (hi - lo > width) {
        const double mid = 0.5 * (lo + hi);
        const double fm = eval_at(f, mid) + offset;
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

inline std::vector<double> locate_zeros(const GridFunction& f, double offset) {
    std::vector<double> roots;
    const Grid& g = f.grid();
    const double width = g.step() * 1e-6;
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double v = f[k] + offset;
        if (v == 0.0) {
            roots.push_back(g.x(k));
            continue;
        }
        if (k + 1 < f.size()) {
            const double w = f[k + 1] + offset;
            if (w != 0.0 && (v < 0.0) != (w < 0.0)) roots.push_back(bisect_interpolant(f, offset, g.x(k), g.x(k + 1), width));
        }
    }
    return roots;
}

}  // namespace detail

inline RiccatiSolution solve_riccati(const RiccatiProblem& prob, const SolverConfig& cfg = {}) {
    const Grid& grid = prob.grid;
    const std::size_t base = base_index(grid, prob.base_point);
    DerivedCoefficients coeffs = derive_coefficients(prob.q0, prob.q1, prob.q2, prob.params, grid);

    RiccatiSolution::Tabulated tab{
        tabulate(prob.q0, grid, prob.params, "q0"),
        tabulate(prob.q1, grid, prob.params, "q1"),
        tabulate(prob.q2, grid, prob.params, "q2"),
        tabulate(differentiate(prob.q2), grid, prob.params, "q2'"),
        tabulate(coeffs.p, grid, prob.params, "p"),
        tabulate(coeffs.dp, grid, prob.params, "p'"),
        tabulate(coeffs.h, grid, prob.params, "h"),
    };
    IntegratingFactors factors = compute_factors(tab.p, tab.h, base, cfg);

    auto cells = alpha_zero_cells(factors.alpha, cfg.alpha_floor);
    if (cells.empty()) return RiccatiSolution(prob, std::move(coeffs), std::move(factors), std::move(tab), {}, false);
    if (!cfg.restrict_to_alpha_support) throw AlphaZeroError("solve", std::move(cells));

    std::vector<double> zeros = detail::locate_zeros(factors.alpha, 0.0);
    NodeRange r = alpha_support(factors.alpha, base, cfg.alpha_floor);
    RiccatiProblem restricted = prob;
    restricted.grid = grid.sub_grid(r.lo, r.hi);
    RiccatiSolution::Tabulated cut{tab.q0.slice(r.lo, r.hi), tab.q1.slice(r.lo, r.hi), tab.q2.slice(r.lo, r.hi),
                                   tab.dq2.slice(r.lo, r.hi), tab.p.slice(r.lo, r.hi), tab.dp.slice(r.lo, r.hi),
                                   tab.h.slice(r.lo, r.hi)};
    return RiccatiSolution(std::move(restricted), std::move(coeffs), factors.slice(r.lo, r.hi), std::move(cut),
                           std::move(zeros), true);
}

/// Poles of y(.; C): zeros of C + S located by a sign-change scan and bisection
/// to step * 1e-6, followed by any zeros of alpha. Empty for C = +inf.
inline std::vector<double> detect_poles(const RiccatiSolution& sol, double c) {
    std::vector<double> poles;
    if (!std::isinf(c)) poles = detail::locate_zeros(sol.S(), c);
    poles.insert(poles.end(), sol.alpha_zeros().begin(), sol.alpha_zeros().end());
    std::sort(poles.begin(), poles.end());
    return poles;
}

/// Nodes within `radius` steps of a pole.
inline std::vector<bool> pole_mask(const Grid& grid, const std::vector<double>& poles,
                                   std::size_t radius = pole_exclusion_steps) {
    std::vector<bool> mask(grid.size(), false);
    const double reach = static_cast<double>(radius) * grid.step() * (1.0 + 1e-9);
    for (double pole : poles) {
        for (std::size_t k = 0; k < grid.size(); ++k) {
            if (std::abs(grid.x(k) - pole) <= reach) mask[k] = true;
        }
    }
    return mask;
}

/// The constant C with y(x*; C) = y*. Returns +inf when y* is the particular
/// solution's value (the C -> infinity member of the family).
inline double match_constant(const RiccatiSolution& sol, double x_star, double y_star) {
    const double a = eval_at(sol.alpha(), x_star);
    if (a == 0.0) throw NumericalError("match_constant", "alpha vanishes at x*=" + std::to_string(x_star));
    const double yp = eval_at(sol.y_p(), x_star);
    const double diff = y_star - yp;
    if (std::abs(diff) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(yp)))
        return particular_constant;
    return -1.0 / (sol.q2_at(x_star) * a * a * diff) - eval_at(sol.S(), x_star);
}

inline ResidualReport riccati_residual(const RiccatiSolution& sol, double c) {
    ResidualReport rep;
    const auto& tab = sol.tabulated();
    const Grid& grid = sol.grid();
    const GridFunction y = sol.y(c);
    const GridFunction dy = sol.y_prime(c);
    const GridFunction fd = first_difference(y);
    const std::vector<bool> mask = pole_mask(grid, detect_poles(sol, c));
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (mask[k] || !std::isfinite(y[k])) {
            ++rep.nodes_excluded;
            continue;
        }
        ++rep.nodes_checked;
        const double rhs = tab.q0[k] + tab.q1[k] * y[k] + tab.q2[k] * y[k] * y[k];
        rep.identity = std::max(rep.identity, std::abs(dy[k] - rhs));
        if (k > 0 && k + 1 < grid.size() && !mask[k - 1] && !mask[k + 1])
            rep.finite_difference = std::max(rep.finite_difference, std::abs(fd[k] - rhs));
    }
    return rep;
}

/// beta from exp(-1/2 int_b^x q1) / sqrt(q2), scaled to 1 at the base point.
/// Equals the generic exp(int p/2) route; requires q2 > 0.
inline GridFunction riccati_beta_closed_form(const Expr& q1, const Expr& q2, const Grid& grid, const Params& params,
                                             std::optional<double> base_point) {
    const std::size_t base = base_index(grid, base_point);
    GridFunction q2v = tabulate(q2, grid, params, "q2");
    GridFunction iq1 = cumulative_integral(tabulate(q1, grid, params, "q1"), base);
    GridFunction out(grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!(q2v[k] > 0.0)) throw NumericalError("beta", "closed form needs q2 > 0");
        out[k] = std::exp(-0.5 * iq1[k]) * std::sqrt(q2v[base] / q2v[k]);
    }
    return out;
}

/// CSV `x,y_p,S,alpha,beta,y_at_C`.
inline void write_riccati_csv(std::ostream& os, const RiccatiSolution& sol, double c) {
    GridFunction y = sol.y(c);
    const std::string names[] = {"y_p", "S", "alpha", "beta", "y_at_C"};
    const GridFunction* cols[] = {&sol.y_p(), &sol.S(), &sol.alpha(), &sol.beta(), &y};
    write_csv(os, sol.grid(), names, cols);
}

}  // namespace riccati
