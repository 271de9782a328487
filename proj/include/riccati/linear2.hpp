#pragma once

// General solution of y'' + p y' + q y = f through the integrating factors:
//
//   y = C2 u1 + C1 u2 + y_part,
//   u1 = alpha / beta,
//   u2 = u1 * int_b^x dt / alpha^2,
//   y_part = u1 * int_b^x alpha^-2(t) int_b^t alpha beta f.

#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "riccati/csv.hpp"
#include "riccati/expr.hpp"
#include "riccati/factors.hpp"
#include "riccati/grid.hpp"

namespace riccati {

struct LinearProblem {
    Expr p;
    Expr q;
    Expr f;
    Params params;
    Grid grid;
    std::optional<double> base_point;
};

class LinearSolution {
public:
    LinearSolution(IntegratingFactors factors, GridFunction p, GridFunction q, GridFunction f, bool restricted)
        : factors_(std::move(factors)), p_(std::move(p)), q_(std::move(q)), f_(std::move(f)),
          restricted_(restricted), u1_(p_.grid()), u2_(p_.grid()), particular_(p_.grid()),
          inv_alpha_sq_integral_(p_.grid()), forcing_integral_(p_.grid()), particular_integral_(p_.grid()) {
        const auto& a = factors_.alpha;
        const auto& b = factors_.beta;
        const std::size_t base = factors_.base_index;
        const GridFunction inv_a2 = a.map([](double v) { return 1.0 / (v * v); });
        u1_ = a / b;
        inv_alpha_sq_integral_ = cumulative_integral(inv_a2, base);
        u2_ = u1_ * inv_alpha_sq_integral_;
        forcing_integral_ = cumulative_integral(a * b * f_, base);
        particular_integral_ = cumulative_integral(forcing_integral_ * inv_a2, base);
        particular_ = u1_ * particular_integral_;
    }

    const Grid& grid() const noexcept { return p_.grid(); }
    const IntegratingFactors& factors() const noexcept { return factors_; }
    const GridFunction& u1() const noexcept { return u1_; }
    const GridFunction& u2() const noexcept { return u2_; }
    const GridFunction& particular() const noexcept { return particular_; }
    const GridFunction& p() const noexcept { return p_; }
    const GridFunction& q() const noexcept { return q_; }
    const GridFunction& f() const noexcept { return f_; }
    /// int_b^x alpha beta f
    const GridFunction& forcing_integral() const noexcept { return forcing_integral_; }
    /// True when the grid was cut back to the zero-free support of alpha.
    bool restricted() const noexcept { return restricted_; }

    GridFunction y(double c1, double c2) const { return c2 * u1_ + c1 * u2_ + particular_; }

    /// y' assembled from alpha', beta' and the integrands (no differencing).
    GridFunction y_prime(double c1, double c2) const {
        const auto& a = factors_.alpha;
        const auto& ap = factors_.alpha_prime;
        const auto& b = factors_.beta;
        const auto& bp = factors_.beta_prime;
        GridFunction out(grid());
        for (std::size_t k = 0; k < out.size(); ++k) {
            const double du1 = (ap[k] * b[k] - a[k] * bp[k]) / (b[k] * b[k]);
            const double inv_a2 = 1.0 / (a[k] * a[k]);
            out[k] = du1 * (c2 + c1 * inv_alpha_sq_integral_[k] + particular_integral_[k]) +
                     u1_[k] * inv_a2 * (c1 + forcing_integral_[k]);
        }
        return out;
    }

private:
    IntegratingFactors factors_;
    GridFunction p_;
    GridFunction q_;
    GridFunction f_;
    bool restricted_;
    GridFunction u1_;
    GridFunction u2_;
    GridFunction particular_;
    GridFunction inv_alpha_sq_integral_;
    GridFunction forcing_integral_;
    GridFunction particular_integral_;
};

inline LinearSolution solve_linear(const LinearProblem& prob, const SolverConfig& cfg = {}) {
    const Grid& grid = prob.grid;
    const std::size_t base = base_index(grid, prob.base_point);
    GridFunction p = tabulate(prob.p, grid, prob.params, "p");
    GridFunction q = tabulate(prob.q, grid, prob.params, "q");
    GridFunction f = tabulate(prob.f, grid, prob.params, "f");
    GridFunction h = tabulate(alpha_coefficient(prob.p, prob.q), grid, prob.params, "h");
    IntegratingFactors factors = compute_factors(p, h, base, cfg);

    auto zeros = alpha_zero_cells(factors.alpha, cfg.alpha_floor);
    if (zeros.empty()) return LinearSolution(std::move(factors), std::move(p), std::move(q), std::move(f), false);
    if (!cfg.restrict_to_alpha_support) throw AlphaZeroError("solve_linear", std::move(zeros));
    NodeRange r = alpha_support(factors.alpha, base, cfg.alpha_floor);
    return LinearSolution(factors.slice(r.lo, r.hi), p.slice(r.lo, r.hi), q.slice(r.lo, r.hi), f.slice(r.lo, r.hi),
                          true);
}

/// (C1, C2) for the solution with y(b) = y0 and y'(b) = dy0. At the base node
/// u1 = 1, u1' = -p/2, u2 = 0, u2' = 1 and the particular part vanishes to first order.
inline std::pair<double, double> match_constants(const LinearSolution& sol, double y0, double dy0) {
    const std::size_t b = sol.factors().base_index;
    return {dy0 + 0.5 * sol.p()[b] * y0, y0};
}

/// Sup over interior nodes of |alpha beta y' + (-alpha' beta + alpha beta') y - int alpha beta f - C1|,
/// with y' from central differences of the supplied samples.
inline double first_integral_residual(const LinearSolution& sol, const GridFunction& y, double c1) {
    const auto& fac = sol.factors();
    GridFunction dy = first_difference(y);
    double worst = 0.0;
    for (std::size_t k = 1; k + 1 < y.size(); ++k) {
        const double lhs = fac.alpha[k] * fac.beta[k] * dy[k] +
                           (-fac.alpha_prime[k] * fac.beta[k] + fac.alpha[k] * fac.beta_prime[k]) * y[k];
        worst = std::max(worst, std::abs(lhs - sol.forcing_integral()[k] - c1));
    }
    return worst;
}

inline double first_integral_check(const LinearSolution& sol, double c1, double c2) {
    return first_integral_residual(sol, sol.y(c1, c2), c1);
}

/// Sup over interior nodes of |y'' + p y' + q y - f| with differenced derivatives.
inline double linear_residual(const LinearSolution& sol, const GridFunction& y) {
    GridFunction d1 = first_difference(y);
    GridFunction d2 = second_difference(y);
    double worst = 0.0;
    for (std::size_t k = 1; k + 1 < y.size(); ++k) {
        worst = std::max(worst, std::abs(d2[k] + sol.p()[k] * d1[k] + sol.q()[k] * y[k] - sol.f()[k]));
    }
    return worst;
}

/// CSV `x,u1,u2,particular,y`.
inline void write_linear_csv(std::ostream& os, const LinearSolution& sol, double c1, double c2) {
    GridFunction y = sol.y(c1, c2);
    const std::string names[] = {"u1", "u2", "particular", "y"};
    const GridFunction* cols[] = {&sol.u1(), &sol.u2(), &sol.particular(), &y};
    write_csv(os, sol.grid(), names, cols);
}

}  // namespace riccati
