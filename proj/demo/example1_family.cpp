// Solves y' = -lambda e^{x^2/2} + x y + e^{-x^2/2} y^2 on [0, 1] and prints a
// few members of the solution family next to an RK integration from the same
// starting value.

#include <cstdio>

#include "riccati/riccati.hpp"

int main() {
    using namespace riccati;
    const Params params{{"lambda", 1.0}};
    RiccatiProblem prob{parse("-lambda*exp(x^2/2)", params), parse("x", params), parse("exp(-x^2/2)", params),
                        params, Grid(0.0, 1.0, 2001), std::nullopt};
    RiccatiSolution sol = solve_riccati(prob);
    std::printf("alpha: %zu Picard iterations, last correction %.2e\n", sol.factors().iterations,
                sol.factors().terminal_correction);

    for (double c : {0.75, 1.0, 2.0}) {
        const GridFunction y = sol.y(c);
        Trajectory rk = rk_riccati(prob, 0.0, y[0], 1.0, sol.grid().step());
        const ResidualReport rep = riccati_residual(sol, c);
        std::printf("\nC = %g  residual %.2e (differenced %.2e)\n", c, rep.identity, rep.finite_difference);
        std::printf("%8s %18s %18s\n", "x", "y(x; C)", "rk");
        for (std::size_t k = 0; k < sol.grid().size(); k += 250) {
            std::printf("%8.3f %18.12f %18.12f\n", sol.grid().x(k), y[k], rk.y[k]);
        }
    }
}
