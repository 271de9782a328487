#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "riccati/csv.hpp"
#include "riccati/grid.hpp"

using namespace riccati;

TEST(Grid, Invariants) {
    EXPECT_THROW(Grid(0, 1, 4), std::invalid_argument);
    EXPECT_THROW(Grid(0, 1, 1), std::invalid_argument);
    EXPECT_THROW(Grid(1, 0, 5), std::invalid_argument);
    Grid g(0, 1, 101);
    EXPECT_DOUBLE_EQ(g.step(), 0.01);
    EXPECT_EQ(g.x(100), 1.0);
    EXPECT_EQ(g.node_index(0.5), 50u);
    EXPECT_THROW(g.node_index(0.505), std::invalid_argument);
    EXPECT_THROW(g.node_index(2.0), std::out_of_range);
}

TEST(Tabulate, NodesAndErrors) {
    Grid g(0, 1, 101);
    GridFunction f = tabulate(parse("x"), g);
    for (std::size_t k = 0; k < g.size(); ++k) EXPECT_DOUBLE_EQ(f[k], k / 100.0);
    EXPECT_EQ(tabulate(parse("exp(-x^2/2)"), g)[0], 1.0);
    try {
        tabulate(parse("2/x^2"), g, {}, "h");
        FAIL();
    } catch (const TabulationError& err) {
        EXPECT_EQ(err.node(), 0u);
        EXPECT_EQ(err.x(), 0.0);
        EXPECT_EQ(err.stage(), "h");
    }
}

TEST(CumulativeIntegral, ConstantIsExact) {
    Grid g(0, 1, 101);
    GridFunction F = cumulative_integral(GridFunction(g, 1.0));
    for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(F[k], g.x(k), 1e-15);
}

TEST(CumulativeIntegral, Cosine) {
    Grid g(0, 1, 101);
    GridFunction F = cumulative_integral(tabulate(parse("cos(x)"), g));
    EXPECT_NEAR(F[100], std::sin(1.0), 1e-8);
    for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(F[k], std::sin(g.x(k)), 1e-8);
}

TEST(CumulativeIntegral, DecayingExponential) {
    Params p{{"lambda", 1.0}};
    Grid g(0, 1, 101);
    GridFunction F = cumulative_integral(tabulate(parse("exp(-2*sqrt(lambda)*x)", p), g, p));
    EXPECT_NEAR(F[100], (1 - std::exp(-2.0)) / 2, 1e-8);
}

TEST(CumulativeIntegral, AnchoredInterior) {
    Grid g(-1, 1, 201);
    const std::size_t anchor = 60;
    GridFunction F = cumulative_integral(tabulate(parse("cos(x)"), g), anchor);
    EXPECT_EQ(F[anchor], 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        EXPECT_NEAR(F[k], std::sin(g.x(k)) - std::sin(g.x(anchor)), 1e-9) << k;
    }
}

TEST(DefiniteIntegral, Examples) {
    Grid g(0, 1, 101);
    EXPECT_NEAR(definite_integral(GridFunction(g, 1.0)), 1.0, 1e-15);
    EXPECT_NEAR(definite_integral(tabulate(parse("x"), g)), 0.5, 1e-15);
    EXPECT_NEAR(definite_integral(tabulate(parse("4/(1+x^2)"), g)), std::numbers::pi, 1e-8);
}

TEST(SecondDifference, Examples) {
    Grid g(0, 1, 101);
    GridFunction d = second_difference(tabulate(parse("x^2"), g));
    for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(d[k], 2.0, 1e-9);

    Grid q(0, std::numbers::pi / 4, 79);  // step 1e-2 (approximately)
    ASSERT_NEAR(q.step(), 1e-2, 2e-4);
    GridFunction c = second_difference(tabulate(parse("cos(x)"), q));
    for (std::size_t k = 0; k < q.size(); ++k) EXPECT_NEAR(c[k], -std::cos(q.x(k)), 1e-4);

    GridFunction z = second_difference(GridFunction(g, 3.5));
    EXPECT_EQ(sup_norm(z), 0.0);
}

TEST(EvalAt, NodesMidpointsAndDomain) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1, 1);
    Grid g(0, 2, 21);
    for (int r = 0; r < 3; ++r) {
        GridFunction f(g);
        for (std::size_t k = 0; k < g.size(); ++k) f[k] = u(rng);
        for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(eval_at(f, g.x(k)), f[k]);
    }
    Grid h(0, 1, 101);
    GridFunction s = tabulate(parse("sin(x)"), h);
    for (std::size_t k = 0; k + 1 < h.size(); ++k) {
        const double xm = 0.5 * (h.x(k) + h.x(k + 1));
        EXPECT_NEAR(eval_at(s, xm), std::sin(xm), 1e-7);
    }
    EXPECT_THROW(eval_at(s, 1.5), std::out_of_range);
    EXPECT_THROW(eval_at(s, -0.1), std::out_of_range);
}

TEST(GridProperty, CumulativeIntegralIsLinear) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1, 1);
    Grid g(-0.5, 1.5, 41);
    for (int r = 0; r < 20; ++r) {
        GridFunction f(g), h(g);
        for (std::size_t k = 0; k < g.size(); ++k) {
            f[k] = u(rng);
            h[k] = u(rng);
        }
        const double a = u(rng), b = u(rng);
        const std::size_t anchor = static_cast<std::size_t>(r) % g.size();
        GridFunction lhs = cumulative_integral(a * f + b * h, anchor);
        GridFunction rhs = a * cumulative_integral(f, anchor) + b * cumulative_integral(h, anchor);
        EXPECT_LE(sup_norm(lhs - rhs), 1e-14);
    }
}

TEST(GridProperty, CumulativeIntegralExactOnCubics) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2, 2);
    for (std::size_t n : {5u, 7u, 9u, 21u, 101u}) {
        for (int r = 0; r < 10; ++r) {
            const double lo = u(rng);
            const double hi = lo + 0.5 + std::abs(u(rng));
            Grid g(lo, hi, n);
            const double c0 = u(rng), c1 = u(rng), c2 = u(rng), c3 = u(rng);
            auto F = [&](double x) { return c0 * x + c1 * x * x / 2 + c2 * x * x * x / 3 + c3 * x * x * x * x / 4; };
            GridFunction f(g);
            for (std::size_t k = 0; k < n; ++k) {
                const double x = g.x(k);
                f[k] = c0 + c1 * x + c2 * x * x + c3 * x * x * x;
            }
            const std::size_t anchor = static_cast<std::size_t>(r) % n;
            GridFunction I = cumulative_integral(f, anchor);
            for (std::size_t k = 0; k < n; ++k) {
                EXPECT_NEAR(I[k], F(g.x(k)) - F(g.x(anchor)), 1e-12) << "n=" << n << " k=" << k;
            }
        }
    }
}

TEST(GridProperty, DoubleIntegralThenSecondDifference) {
    double prev = 0.0;
    for (std::size_t n : {101u, 201u, 401u}) {
        Grid g(0, 1, n);
        GridFunction f = tabulate(parse("exp(x)*cos(3*x)"), g);
        GridFunction back = second_difference(cumulative_integral(cumulative_integral(f)));
        const double err = interior_sup_norm(back - f);
        EXPECT_LE(err, 5.0 * g.step() * g.step() * 30.0);
        if (prev > 0) {
            EXPECT_GT(prev / err, 3.5);
        }
        prev = err;
    }
}

TEST(Csv, HeaderAndRoundTrip) {
    Grid g(0, 1, 3);
    GridFunction f(g, std::vector<double>{0.1, 1.0 / 3.0, -2e-300});
    std::ostringstream os;
    write_csv(os, f);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "x,value");
    for (std::size_t k = 0; k < 3; ++k) {
        std::getline(is, line);
        const auto comma = line.find(',');
        EXPECT_EQ(std::stod(line.substr(comma + 1)), f[k]);
    }
}
