#pragma once

// Checks of an assembled solution against independent evidence: the RK oracle
// and, when one is supplied, a closed-form candidate solution.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "riccati/expr.hpp"
#include "riccati/linear2.hpp"
#include "riccati/reference.hpp"
#include "riccati/solver.hpp"

namespace riccati {

/// Relative sup-norm gap max|a - b| / max(1, max|b|).
struct Deviation {
    double value = 0.0;
    std::size_t nodes = 0;
};

namespace detail {

/// Largest node range [lo, hi] around `base` with no masked node.
inline std::pair<std::size_t, std::size_t> unmasked_run(const std::vector<bool>& mask, std::size_t base) {
    std::size_t lo = base, hi = base;
    while (lo > 0 && !mask[lo - 1]) --lo;
    while (hi + 1 < mask.size() && !mask[hi + 1]) ++hi;
    return {lo, hi};
}

}  // namespace detail

/// RK trajectories launched from (b, y(b; C)) outward to both ends, stopping
/// short of any pole by the exclusion radius, compared node by node with y(.; C).
inline Deviation rk_deviation(const RiccatiSolution& sol, double c, const RkOptions& opt = {}) {
    const Grid& g = sol.grid();
    const GridFunction y = sol.y(c);
    const std::size_t b = sol.factors().base_index;
    const auto mask = pole_mask(g, detect_poles(sol, c));
    Deviation dev;
    if (mask[b]) return dev;
    const auto [lo, hi] = detail::unmasked_run(mask, b);
    double num = 0.0, den = 1.0;
    for (std::size_t end : {hi, lo}) {
        if (end == b) continue;
        Trajectory tr = rk_riccati(sol.problem(), g.x(b), y[b], g.x(end), g.step(), opt);
        if (tr.blew_up) return {std::numeric_limits<double>::infinity(), dev.nodes};
        for (std::size_t i = 0; i < tr.x.size(); ++i) {
            const std::size_t k = end > b ? b + i : b - i;
            num = std::max(num, std::abs(tr.y[i] - y[k]));
            den = std::max(den, std::abs(y[k]));
            ++dev.nodes;
        }
    }
    dev.value = num / den;
    return dev;
}

inline Deviation rk_deviation(const LinearSolution& sol, const LinearProblem& prob, double c1, double c2,
                              const RkOptions& opt = {}) {
    const Grid& g = sol.grid();
    const GridFunction y = sol.y(c1, c2);
    const GridFunction dy = sol.y_prime(c1, c2);
    const std::size_t b = sol.factors().base_index;
    Deviation dev;
    double num = 0.0, den = 1.0;
    for (std::size_t end : {g.size() - 1, std::size_t{0}}) {
        if (end == b) continue;
        Trajectory tr = rk_linear2(prob, g.x(b), y[b], dy[b], g.x(end), g.step(), opt);
        if (tr.blew_up) return {std::numeric_limits<double>::infinity(), dev.nodes};
        for (std::size_t i = 0; i < tr.x.size(); ++i) {
            const std::size_t k = end > b ? b + i : b - i;
            num = std::max(num, std::abs(tr.y[i] - y[k]));
            den = std::max(den, std::abs(y[k]));
            ++dev.nodes;
        }
    }
    dev.value = num / den;
    return dev;
}

/// Sup over nodes of |Y' - (q0 + q1 Y + q2 Y^2)| for a symbolic candidate Y.
/// Nodes where Y cannot be evaluated (its own poles) are skipped.
inline Deviation substitution_residual(const RiccatiProblem& prob, const Expr& y, const Params& params) {
    const Expr dy = differentiate(y);
    Deviation dev;
    for (std::size_t k = 0; k < prob.grid.size(); ++k) {
        const double x = prob.grid.x(k);
        double v = 0.0, d = 0.0;
        try {
            v = eval(y, x, params);
            d = eval(dy, x, params);
        } catch (const EvalError&) {
            continue;
        }
        const double rhs = eval(prob.q0, x, params) + eval(prob.q1, x, params) * v + eval(prob.q2, x, params) * v * v;
        dev.value = std::max(dev.value, std::abs(d - rhs));
        ++dev.nodes;
    }
    return dev;
}

/// Sup over nodes of |Y'' + p Y' + q Y - f| for a symbolic candidate Y.
inline Deviation substitution_residual(const LinearProblem& prob, const Expr& y, const Params& params) {
    const Expr dy = differentiate(y);
    const Expr d2y = differentiate(dy);
    Deviation dev;
    for (std::size_t k = 0; k < prob.grid.size(); ++k) {
        const double x = prob.grid.x(k);
        double v = 0.0, d1 = 0.0, d2 = 0.0;
        try {
            v = eval(y, x, params);
            d1 = eval(dy, x, params);
            d2 = eval(d2y, x, params);
        } catch (const EvalError&) {
            continue;
        }
        const double lhs = d2 + eval(prob.p, x, params) * d1 + eval(prob.q, x, params) * v;
        dev.value = std::max(dev.value, std::abs(lhs - eval(prob.f, x, params)));
        ++dev.nodes;
    }
    return dev;
}

/// The family member through the candidate's value at the base node, compared
/// with the candidate on unmasked nodes. Returns the matched constant too.
inline std::pair<double, Deviation> family_agreement(const RiccatiSolution& sol, const Expr& y, const Params& params) {
    const Grid& g = sol.grid();
    const std::size_t b = sol.factors().base_index;
    const double c = match_constant(sol, g.x(b), eval(y, g.x(b), params));
    const GridFunction ours = sol.y(c);
    const auto mask = pole_mask(g, detect_poles(sol, c));
    double num = 0.0, den = 1.0;
    Deviation dev;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (mask[k]) continue;
        double v = 0.0;
        try {
            v = eval(y, g.x(k), params);
        } catch (const EvalError&) {
            continue;
        }
        num = std::max(num, std::abs(ours[k] - v));
        den = std::max(den, std::abs(v));
        ++dev.nodes;
    }
    dev.value = num / den;
    return {c, dev};
}

inline std::pair<std::pair<double, double>, Deviation> family_agreement(const LinearSolution& sol, const Expr& y,
                                                                        const Params& params) {
    const Grid& g = sol.grid();
    const double xb = g.x(sol.factors().base_index);
    const auto cs = match_constants(sol, eval(y, xb, params), eval(differentiate(y), xb, params));
    const GridFunction ours = sol.y(cs.first, cs.second);
    double num = 0.0, den = 1.0;
    Deviation dev;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double v = eval(y, g.x(k), params);
        num = std::max(num, std::abs(ours[k] - v));
        den = std::max(den, std::abs(v));
        ++dev.nodes;
    }
    dev.value = num / den;
    return {cs, dev};
}

}  // namespace riccati
