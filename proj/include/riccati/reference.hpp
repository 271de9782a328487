#pragma once

// Classical RK4 with step-doubling error control. Used only as an oracle: it
// evaluates the coefficient expressions directly and shares no numerics with
// the integrating-factor path.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "riccati/expr.hpp"

namespace riccati {

struct RkOptions {
    double local_tol = 1e-10;  ///< per-step bound on |y_{h/2,h/2} - y_h|, relative to max(1, |y|)
    double blowup = 1e12;
};

struct Trajectory {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> y_prime;  ///< filled for second-order problems only
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
    double min_step = std::numeric_limits<double>::infinity();
    bool blew_up = false;
    double blowup_x = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

template <std::size_t N, class Rhs>
std::array<double, N> rk4_step(const Rhs& rhs, double x, const std::array<double, N>& y, double h) {
    auto axpy = [](const std::array<double, N>& a, double s, const std::array<double, N>& b) {
        std::array<double, N> r{};
        for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + s * b[i];
        return r;
    };
    const auto k1 = rhs(x, y);
    const auto k2 = rhs(x + 0.5 * h, axpy(y, 0.5 * h, k1));
    const auto k3 = rhs(x + 0.5 * h, axpy(y, 0.5 * h, k2));
    const auto k4 = rhs(x + h, axpy(y, h, k3));
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

template <std::size_t N>
double max_abs(const std::array<double, N>& v) {
    double m = 0.0;
    for (double e : v) m = std::max(m, std::abs(e));
    return m;
}

/// Integrates from x0 to x1, recording the state at equally spaced output
/// nodes no further apart than hmax. Between output nodes the step is halved
/// until the step-doubling estimate meets the tolerance.
template <std::size_t N, class Rhs>
Trajectory integrate(const Rhs& rhs, double x0, std::array<double, N> y, double x1, double hmax,
                     const RkOptions& opt) {
    if (!(hmax > 0.0)) throw std::invalid_argument("rk: hmax must be positive");
    Trajectory tr;
    auto record = [&](double x) {
        tr.x.push_back(x);
        tr.y.push_back(y[0]);
        if constexpr (N > 1) tr.y_prime.push_back(y[1]);
    };
    record(x0);
    if (x1 == x0) return tr;

    const double span = x1 - x0;
    const auto nodes = static_cast<std::size_t>(std::ceil(std::abs(span) / hmax - 1e-9));
    const double H = span / static_cast<double>(nodes);
    double h = H;
    double x = x0;
    for (std::size_t j = 1; j <= nodes; ++j) {
        const double target = j == nodes ? x1 : x0 + static_cast<double>(j) * H;
        while ((H > 0.0 && x < target) || (H < 0.0 && x > target)) {
            const bool last = std::abs(h) >= std::abs(target - x);
            const double step = last ? target - x : h;
            const auto full = rk4_step<N>(rhs, x, y, step);
            const auto half = rk4_step<N>(rhs, x + 0.5 * step, rk4_step<N>(rhs, x, y, 0.5 * step), 0.5 * step);
            double err = 0.0;
            for (std::size_t i = 0; i < N; ++i) err = std::max(err, std::abs(half[i] - full[i]));
            const double scale = std::max(1.0, max_abs(half));
            if (std::isfinite(err) && err <= opt.local_tol * scale) {
                x = last ? target : x + step;
                y = half;
                ++tr.accepted_steps;
                tr.min_step = std::min(tr.min_step, std::abs(step));
                if (max_abs(y) > opt.blowup) {
                    tr.blew_up = true;
                    tr.blowup_x = x;
                    return tr;
                }
                if (!last && err * 32.0 < opt.local_tol * scale) h = std::abs(2.0 * h) > std::abs(H) ? H : 2.0 * h;
            } else {
                ++tr.rejected_steps;
                h = 0.5 * step;
                const double floor = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x));
                if (std::abs(h) < floor) {
                    tr.blew_up = true;
                    tr.blowup_x = x;
                    return tr;
                }
            }
        }
        x = target;
        record(x);
    }
    return tr;
}

}  // namespace detail

/// y' = q0 + q1 y + q2 y^2 from (x0, y0) to x1. Blow-up is reported in the
/// trajectory, never thrown.
inline Trajectory rk_riccati(const Expr& q0, const Expr& q1, const Expr& q2, const Params& params, double x0,
                             double y0, double x1, double hmax, const RkOptions& opt = {}) {
    auto rhs = [&](double x, const std::array<double, 1>& y) {
        const double v = y[0];
        return std::array<double, 1>{eval(q0, x, params) + eval(q1, x, params) * v + eval(q2, x, params) * v * v};
    };
    return detail::integrate<1>(rhs, x0, {y0}, x1, hmax, opt);
}

template <class Problem>
Trajectory rk_riccati(const Problem& prob, double x0, double y0, double x1, double hmax, const RkOptions& opt = {}) {
    return rk_riccati(prob.q0, prob.q1, prob.q2, prob.params, x0, y0, x1, hmax, opt);
}

/// y'' + p y' + q y = f as the first-order system (y, y').
inline Trajectory rk_linear2(const Expr& p, const Expr& q, const Expr& f, const Params& params, double x0, double y0,
                             double y0prime, double x1, double hmax, const RkOptions& opt = {}) {
    auto rhs = [&](double x, const std::array<double, 2>& s) {
        return std::array<double, 2>{
            s[1], eval(f, x, params) - eval(p, x, params) * s[1] - eval(q, x, params) * s[0]};
    };
    return detail::integrate<2>(rhs, x0, {y0, y0prime}, x1, hmax, opt);
}

template <class Problem>
Trajectory rk_linear2(const Problem& prob, double x0, double y0, double y0prime, double x1, double hmax,
                      const RkOptions& opt = {}) {
    return rk_linear2(prob.p, prob.q, prob.f, prob.params, x0, y0, y0prime, x1, hmax, opt);
}

/// CSV `x,y[,yprime]`.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
    const bool second = !tr.y_prime.empty();
    os << (second ? "x,y,yprime\n" : "x,y\n");
    auto num = [](double v) {
        std::array<char, 48> buf{};
        auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
        return std::string(buf.data(), res.ptr);
    };
    for (std::size_t i = 0; i < tr.x.size(); ++i) {
        os << num(tr.x[i]) << ',' << num(tr.y[i]);
        if (second) os << ',' << num(tr.y_prime[i]);
        os << '\n';
    }
}

}  // namespace riccati
