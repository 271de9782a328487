#pragma once

// Seeded smooth Riccati problems on [0, 1] with bounded coefficients and q2 >= 0.5.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "riccati/solver.hpp"

namespace riccati::testing {

struct RandomProblem {
    std::string q0, q1, q2;
    std::vector<double> constants;
};

inline std::vector<RandomProblem> random_problems(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto u = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
    auto num = [](double v) { return "(" + format_number(v) + ")"; };
    std::vector<RandomProblem> out;
    for (std::size_t i = 0; i < count; ++i) {
        RandomProblem r;
        r.q0 = num(u(-1, 1)) + " + " + num(u(-0.5, 0.5)) + "*sin(" + num(u(0.5, 3)) + "*x)";
        r.q1 = num(u(-1, 1)) + " + " + num(u(-0.5, 0.5)) + "*cos(" + num(u(0.5, 3)) + "*x)";
        r.q2 = num(u(0.8, 1.5)) + " + " + num(u(-0.3, 0.3)) + "*sin(" + num(u(0.5, 2)) + "*x)";
        // S increases from 0 at the base point x = 0, so C > 0 keeps C + S away from zero.
        for (int j = 0; j < 3; ++j) r.constants.push_back(u(0.2, 3.0));
        out.push_back(std::move(r));
    }
    return out;
}

inline RiccatiProblem to_problem(const RandomProblem& r, std::size_t n) {
    return {parse(r.q0), parse(r.q1), parse(r.q2), {}, Grid(0, 1, n), std::nullopt};
}

}  // namespace riccati::testing
