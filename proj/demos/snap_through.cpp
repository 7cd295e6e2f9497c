// Trace equilibrium branches of a loaded mechanism across an actuator sweep
// and classify where they end. With slightly unequal rods the symmetric
// pitchfork detunes into a fold pair, so the stable working branch exists only
// on an island of actuator lengths; leaving the island makes the mechanism
// snap to a distant configuration.

#include <cstdio>

#include "tensegrity/continuation.hpp"

int main() {
    using namespace tensegrity;

    MechanismParams p;
    p.l2 = 1.05;
    p.k = 100.0;
    p.f3 = p.f4 = 5.0;

    const double lo = 0.01, hi = 2.0;
    const int steps = 400;
    const auto trace = trace_branches(p, lo, hi, steps);
    std::printf("%zu branches over rho in [%g, %g]\n", trace.branches.size(), lo, hi);

    const double window = 10.0 * (hi - lo) / steps;
    for (const auto& b : trace.branches)
        for (const auto& ev : b.events) {
            if (ev.kind != EventKind::Terminated) continue;
            const auto rep = classify_endpoint(trace.branches, ev.rho, window, p);
            std::printf("branch %d ends at rho = %.9f: %s, %d branches coalesce", b.id,
                        rep.rho_refined, to_string(rep.kind), rep.coalescing);
            if (rep.jump && rep.jump_target)
                std::printf(", snaps to (%+.4f, %+.4f)", rep.jump_target->config.theta1,
                            rep.jump_target->config.theta2);
            std::printf("\n");
        }
    return 0;
}
