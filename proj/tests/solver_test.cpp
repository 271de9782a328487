#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "random_problems.hpp"
#include "riccati/reference.hpp"
#include "riccati/solver.hpp"

using namespace riccati;
using namespace riccati::testing;

namespace {

double relative_sup(const std::vector<double>& a, const GridFunction& b, std::size_t count) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        num = std::max(num, std::abs(a[k] - b[k]));
        den = std::max(den, std::abs(b[k]));
    }
    return num / std::max(den, 1.0);
}

}  // namespace

TEST(SolveRiccati, ExampleOneFamily) {
    RiccatiProblem prob = example1(1.0, Grid(0, 1, 2001));
    RiccatiSolution sol = solve_riccati(prob);
    EXPECT_NEAR(sol.alpha()[2000], std::cosh(1.0), 1e-9);
    for (std::size_t k = 0; k < sol.grid().size(); k += 100) {
        const double x = sol.grid().x(k);
        EXPECT_NEAR(sol.y_p()[k], -std::exp(x * x / 2) * std::tanh(x), 1e-9);
        EXPECT_NEAR(sol.S()[k], std::tanh(x), 1e-9);
    }
    for (double c : {0.75, 1.0, 2.0, particular_constant}) {
        EXPECT_TRUE(detect_poles(sol, c).empty());
        ResidualReport rep = riccati_residual(sol, c);
        EXPECT_LE(rep.identity, 1e-5) << c;
        EXPECT_LE(rep.finite_difference, 1e-5) << c;
        EXPECT_EQ(rep.nodes_excluded, 0u);
    }
}

TEST(SolveRiccati, ExampleOneClosedFormSubstitution) {
    RiccatiProblem prob = example1(1.0, Grid(0, 1, 2001));
    for (double c : {-1.0, 1.0, 2.0}) EXPECT_LE(family_residual(prob, kExample1Family, c), 1e-8) << c;
    EXPECT_LE(substitution_residual(prob, parse(kExample1Particular, prob.params), prob.params), 1e-8);
}

TEST(SolveRiccati, ExampleTwoFamily) {
    RiccatiProblem prob = example2(Grid(0.5, 2.5, 2001));
    RiccatiSolution sol = solve_riccati(prob);
    for (std::size_t k = 0; k < sol.grid().size(); k += 100) {
        const double x = sol.grid().x(k);
        EXPECT_NEAR(sol.alpha()[k], (x * x * x + 2) / (3 * x), 1e-9);
    }
    for (double c : {-1.0, 1.0, 2.0}) {
        EXPECT_TRUE(detect_poles(sol, c).empty()) << c;
        EXPECT_LE(riccati_residual(sol, c).worst(), 1e-4) << c;
    }
    for (double c : {-1.0, 0.0, 3.0}) EXPECT_LE(family_residual(prob, kExample2Family, c), 1e-8) << c;
}

TEST(SolveRiccati, ExampleTwoMatchedPoles) {
    RiccatiProblem prob = example2(Grid(0.5, 2.5, 2001));
    RiccatiSolution sol = solve_riccati(prob);
    struct Case {
        double family_c, x_star;
    };
    for (Case cs : {Case{1.0 / 3.0, 2.0}, Case{1.0 / 24.0, 1.0}}) {
        const double expected = std::cbrt(1.0 / (3.0 * cs.family_c));
        const double y_star = family_value(kExample2Family, {}, cs.family_c, cs.x_star);
        const double c = match_constant(sol, cs.x_star, y_star);
        auto poles = detect_poles(sol, c);
        ASSERT_EQ(poles.size(), 1u) << cs.family_c;
        EXPECT_NEAR(poles[0], expected, 1e-4);
        // matched family member agrees with the closed form away from the pole
        for (std::size_t k = 0; k < sol.grid().size(); k += 50) {
            const double x = sol.grid().x(k);
            if (std::abs(x - expected) < 0.05) continue;
            const double ref = family_value(kExample2Family, {}, cs.family_c, x);
            EXPECT_NEAR(sol.y(c)[k], ref, 1e-6 * std::max(1.0, std::abs(ref))) << x;
        }
    }
}

TEST(SolveRiccati, TanhProblem) {
    // y' = y^2 - 1: alpha = cosh(x), y_p = -tanh(x)
    RiccatiProblem prob{parse("-1"), parse("0"), parse("1"), {}, Grid(0, 2, 1001), std::nullopt};
    RiccatiSolution sol = solve_riccati(prob);
    for (std::size_t k = 0; k < sol.grid().size(); ++k) EXPECT_NEAR(sol.y_p()[k], -std::tanh(sol.grid().x(k)), 1e-9);
    for (double c : {0.5, 3.0, particular_constant}) EXPECT_LE(riccati_residual(sol, c).worst(), 1e-4);
}

TEST(SolveRiccati, AlphaZeroRestrictsDomain) {
    // y' = 1 + y^2: alpha = cos(x) vanishes at pi/2
    RiccatiProblem prob{parse("1"), parse("0"), parse("1"), {}, Grid(0, 2, 401), std::nullopt};
    EXPECT_THROW(solve_riccati(prob), AlphaZeroError);
    SolverConfig cfg;
    cfg.restrict_to_alpha_support = true;
    RiccatiSolution sol = solve_riccati(prob, cfg);
    EXPECT_TRUE(sol.restricted());
    ASSERT_EQ(sol.alpha_zeros().size(), 1u);
    EXPECT_NEAR(sol.alpha_zeros()[0], std::acos(0.0), 1e-6);
    EXPECT_LT(sol.grid().x_hi(), std::acos(0.0));
    auto poles = detect_poles(sol, particular_constant);
    ASSERT_EQ(poles.size(), 1u);
    EXPECT_NEAR(poles[0], std::acos(0.0), 1e-6);
}

TEST(MatchConstant, DefiningIdentity) {
    RiccatiProblem prob = example1(1.0, Grid(0, 1, 2001));
    RiccatiSolution sol = solve_riccati(prob);
    const double c = match_constant(sol, 0.0, -2.0);
    EXPECT_NEAR(c, 0.5, 1e-12);
    EXPECT_NEAR(sol.value_at(0.0, c), -2.0, 1e-12);
    const double c2 = match_constant(sol, 0.4321, -3.0);
    EXPECT_NEAR(sol.value_at(0.4321, c2), -3.0, 1e-12);
}

TEST(MatchConstant, ParticularValueGivesInfinity) {
    RiccatiProblem prob = example1(1.0, Grid(0, 1, 201));
    RiccatiSolution sol = solve_riccati(prob);
    EXPECT_TRUE(std::isinf(match_constant(sol, 0.5, sol.y_p()[100])));
    EXPECT_TRUE(std::isinf(match_constant(sol, 0.0, 0.0)));
}

TEST(MatchConstant, AgreesWithRungeKutta) {
    RiccatiProblem prob = example1(1.0, Grid(0, 1, 2001));
    RiccatiSolution sol = solve_riccati(prob);
    const double c = match_constant(sol, 0.0, -2.0);
    const std::size_t last = sol.grid().node_index(0.8);
    Trajectory tr = rk_riccati(prob, 0.0, -2.0, 0.8, sol.grid().step());
    ASSERT_FALSE(tr.blew_up);
    ASSERT_EQ(tr.x.size(), last + 1);
    EXPECT_LE(relative_sup(tr.y, sol.y(c), last + 1), 1e-6);
}

TEST(DetectPoles, Cases) {
    RiccatiProblem prob = example1(1.0, Grid(0, 1, 401));
    RiccatiSolution sol = solve_riccati(prob);
    EXPECT_TRUE(detect_poles(sol, 1e6).empty());
    EXPECT_TRUE(detect_poles(sol, particular_constant).empty());
    // C + tanh(x) = 0 at x = atanh(0.5)
    auto poles = detect_poles(sol, -0.5);
    ASSERT_EQ(poles.size(), 1u);
    EXPECT_NEAR(poles[0], std::atanh(0.5), 1e-6);
    ResidualReport rep = riccati_residual(sol, -0.5);
    EXPECT_GE(rep.nodes_excluded, 10u);
    EXPECT_LE(rep.nodes_excluded, 11u);
    EXPECT_LE(rep.identity, 1e-4);
}

TEST(RiccatiProperty, RandomProblems) {
    for (const RandomProblem& r : random_problems(20, 97)) {
        RiccatiSolution sol = solve_riccati(to_problem(r, 2001));
        EXPECT_LE(riccati_residual(sol, particular_constant).worst(), 1e-4) << r.q0;
        for (double c : r.constants) {
            EXPECT_TRUE(detect_poles(sol, c).empty());
            EXPECT_LE(riccati_residual(sol, c).worst(), 1e-4) << r.q0 << " C=" << c;
        }
        // family consistency: the value at x* determines C
        const double x_star = sol.grid().x(1234);
        const double cb = r.constants[1];
        const double recovered = match_constant(sol, x_star, sol.y(cb)[1234]);
        EXPECT_NEAR(recovered, cb, 1e-10 * std::abs(cb));
    }
}

TEST(RiccatiProperty, OracleEquivalence) {
    struct Golden {
        RiccatiProblem prob;
        double c;
    };
    std::vector<Golden> golden{
        {example1(1.0, Grid(0, 1, 2001)), 1.0},
        {example1(4.0, Grid(0, 1, 2001)), 0.3},
        {example2(Grid(0.5, 2.5, 2001)), 2.0},
        {example2(Grid(0.5, 2.5, 2001)), 0.03},  // pole inside the domain
        {RiccatiProblem{parse("-1"), parse("0"), parse("1"), {}, Grid(0, 2, 2001), std::nullopt}, 0.5},
    };
    for (const Golden& gd : golden) {
        RiccatiSolution sol = solve_riccati(gd.prob);
        const GridFunction y = sol.y(gd.c);
        const std::size_t b = sol.factors().base_index;
        const auto poles = detect_poles(sol, gd.c);
        const auto mask = pole_mask(sol.grid(), poles);
        // integrate outward from the base node in both directions, stopping before the first masked node
        for (int dir : {+1, -1}) {
            std::size_t end = b;
            while (true) {
                const std::size_t next = dir > 0 ? end + 1 : end - 1;
                if ((dir > 0 && next >= sol.grid().size()) || (dir < 0 && end == 0) || mask[next]) break;
                end = next;
            }
            if (end == b) continue;
            Trajectory tr = rk_riccati(gd.prob, sol.grid().x(b), y[b], sol.grid().x(end), sol.grid().step());
            ASSERT_FALSE(tr.blew_up);
            double num = 0.0, den = 1.0;
            for (std::size_t i = 0; i < tr.x.size(); ++i) {
                const std::size_t k = dir > 0 ? b + i : b - i;
                num = std::max(num, std::abs(tr.y[i] - y[k]));
                den = std::max(den, std::abs(y[k]));
            }
            EXPECT_LE(num / den, 1e-6) << "C=" << gd.c << " dir=" << dir;
        }
    }
}

TEST(RiccatiCsv, Header) {
    RiccatiSolution sol = solve_riccati(example1(1.0, Grid(0, 1, 5)));
    std::ostringstream os;
    write_riccati_csv(os, sol, 1.0);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "x,y_p,S,alpha,beta,y_at_C");
}
