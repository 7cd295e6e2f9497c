// Walk the actuator through the feasibility window of an unloaded mechanism
// with unequal rods and watch equilibria appear and disappear. Near the window
// edges the crossed configurations merge into the flat ones; in between, the
// mechanism has a genuine self-stressed stable pose.

#include <cstdio>

#include "tensegrity/solver.hpp"

int main() {
    using namespace tensegrity;

    MechanismParams p;
    p.l2 = 0.6;
    p.k = 100.0;

    std::printf("%8s %7s %7s   equilibria (theta1, theta2) [* = stable]\n", "rho", "total",
                "stable");
    for (double rho = 0.1; rho < 0.95; rho += 0.1) {
        const auto eqs = solve_equilibria(p, rho);
        int stable = 0;
        for (const auto& e : eqs) stable += e.stability == StabilityClass::Stable;
        std::printf("%8.2f %7zu %7d  ", rho, eqs.size(), stable);
        for (const auto& e : eqs)
            std::printf(" (%+.3f,%+.3f)%s", e.config.theta1, e.config.theta2,
                        e.stability == StabilityClass::Stable ? "*" : " ");
        std::printf("\n");
    }

    // the crossed pair exists only while the spring triangle can close:
    // |l1 - l2| / 2 < rho < (l1 + l2) / 2
    std::printf("\nwindow edges: %.3f and %.3f\n", 0.5 * (p.l1 - p.l2), 0.5 * (p.l1 + p.l2));
    return 0;
}
