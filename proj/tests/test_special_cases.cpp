#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "tensegrity/mechanism.hpp"
#include "tensegrity/special_cases.hpp"
#include "tensegrity/solver.hpp"

using namespace tensegrity;

namespace {

std::mt19937_64 rng(905118341u);

double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double angle_dist(const Configuration& a, const Configuration& b) {
    const double d1 = std::remainder(a.theta1 - b.theta1, 2.0 * pi);
    const double d2 = std::remainder(a.theta2 - b.theta2, 2.0 * pi);
    return std::max(std::abs(d1), std::abs(d2));
}

void require_same_solutions(const std::vector<Equilibrium>& a, const std::vector<Equilibrium>& b) {
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CAPTURE(i, a[i].config.theta1, a[i].config.theta2);
        REQUIRE(angle_dist(a[i].config, b[i].config) < 1e-8);
        REQUIRE(a[i].stability == b[i].stability);
    }
}

// closed-form boundary sextics for unit rods, frozen from an independent
// derivation; used only to validate the resultant-based residual
double lower_sextic(double f, double k, double rho) {
    return std::pow(f * f + 4.0 * k * k * rho * rho, 3) - 16.0 * std::pow(k, 4) * f * f * rho * rho;
}

double upper_sextic(double f, double k, double rho) {
    const double k2 = k * k, k4 = k2 * k2, k6 = k4 * k2;
    const double f2 = f * f, f4 = f2 * f2;
    return std::pow(f2 + 4.0 * k2 * rho * rho, 3) - 12.0 * k2 * f4 +
           336.0 * k4 * f2 * rho * rho - 192.0 * k6 * std::pow(rho, 4) + 48.0 * k4 * f2 +
           192.0 * k6 * rho * rho - 64.0 * k6;
}

double bisect_boundary(SymmetricBoundary kind, const MechanismParams& p, double lo, double hi) {
    double flo = symmetric_boundary_residual(kind, p, lo);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = symmetric_boundary_residual(kind, p, mid);
        if ((flo < 0.0) == (fm < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("symmetric route agrees with the general solver") {
    for (int trial = 0; trial < 200; ++trial) {
        MechanismParams p;
        p.l1 = p.l2 = uniform(0.5, 2.0);
        p.k = uniform(1.0, 200.0);
        if (trial % 4 != 0) p.f3 = p.f4 = uniform(-40.0, 40.0);
        const double rho = uniform(0.05, 1.95);
        CAPTURE(p.l1, p.k, p.f3, rho);
        require_same_solutions(solve_symmetric(p, rho), solve_equilibria(p, rho));
    }
}

TEST_CASE("unloaded route agrees with the general solver") {
    for (int trial = 0; trial < 200; ++trial) {
        MechanismParams p;
        p.l1 = uniform(0.5, 2.0);
        p.l2 = uniform(0.5, 2.0);
        p.k = uniform(1.0, 200.0);
        const double rho = uniform(0.05, 1.95);
        CAPTURE(p.l1, p.l2, p.k, rho);
        require_same_solutions(solve_unloaded(p, rho), solve_equilibria(p, rho));
    }
}

TEST_CASE("symmetric route with zero load reduces to the unloaded route") {
    for (int trial = 0; trial < 50; ++trial) {
        MechanismParams p;
        p.l1 = p.l2 = uniform(0.5, 2.0);
        p.k = uniform(1.0, 200.0);
        const double rho = uniform(0.05, 1.95);
        require_same_solutions(solve_symmetric(p, rho), solve_unloaded(p, rho));
    }
}

TEST_CASE("crossed unloaded equilibria keep the tip segment parallel to the base") {
    int windows = 0;
    for (int trial = 0; trial < 200; ++trial) {
        MechanismParams p;
        p.l1 = uniform(0.5, 2.0);
        p.l2 = uniform(0.5, 2.0);
        p.k = uniform(1.0, 200.0);
        const double rho = uniform(0.05, 1.95);
        const bool window =
            std::abs(p.l1 - p.l2) < 2.0 * rho && 2.0 * rho < p.l1 + p.l2;

        const auto eqs = solve_unloaded(p, rho);
        int crossed = 0;
        for (const auto& e : eqs) {
            if (std::abs(std::sin(e.config.theta1)) < 1e-9) continue;  // flat shape
            ++crossed;
            const Vec2 a3 = node_a3(p, e.config);
            const Vec2 a4 = node_a4(p, rho, e.config);
            const double scale = std::max({p.l1, p.l2, rho});
            CAPTURE(p.l1, p.l2, rho, e.config.theta1, e.config.theta2);
            REQUIRE_THAT(a3.y, Catch::Matchers::WithinAbs(a4.y, 1e-10 * scale));
            REQUIRE_THAT(a3.x - a4.x, Catch::Matchers::WithinAbs(rho, 1e-10 * scale));
        }
        REQUIRE(crossed == (window ? 2 : 0));
        if (window) ++windows;
    }
    REQUIRE(windows > 40);  // both regimes must actually be exercised
}

TEST_CASE("crossed pair appears and disappears at the window edges") {
    MechanismParams p;
    p.l1 = 1.2;
    p.l2 = 0.7;
    p.k = 50.0;
    const double lo = 0.5 * (p.l1 - p.l2), hi = 0.5 * (p.l1 + p.l2);
    REQUIRE(solve_unloaded(p, lo - 1e-6).size() == 4);
    REQUIRE(solve_unloaded(p, lo + 1e-6).size() == 6);
    REQUIRE(solve_unloaded(p, hi - 1e-6).size() == 6);
    REQUIRE(solve_unloaded(p, hi + 1e-6).size() == 4);
}

TEST_CASE("unloaded stability by regime") {
    for (int trial = 0; trial < 150; ++trial) {
        MechanismParams p;
        p.l1 = uniform(0.5, 2.0);
        p.l2 = uniform(0.5, 2.0);
        p.k = uniform(1.0, 200.0);
        const double rho = uniform(0.05, 1.95);
        const double gap = std::min(std::abs(2.0 * rho - std::abs(p.l1 - p.l2)),
                                    std::abs(2.0 * rho - (p.l1 + p.l2)));
        if (gap < 1e-3) continue;  // stay away from the marginal lines

        const auto eqs = solve_unloaded(p, rho);
        CAPTURE(p.l1, p.l2, rho);
        if (2.0 * rho > p.l1 + p.l2) {
            REQUIRE(count_stable(eqs) == 1);
            REQUIRE(eqs.size() == 4);
            for (const auto& e : eqs)
                if (e.stability == StabilityClass::Stable)
                    REQUIRE(angle_dist(e.config, {0.0, 0.0}) < 1e-9);
        } else if (2.0 * rho < std::abs(p.l1 - p.l2)) {
            REQUIRE(count_stable(eqs) == 1);
            REQUIRE(eqs.size() == 4);
            const Configuration folded =
                p.l1 > p.l2 ? Configuration{0.0, pi} : Configuration{pi, 0.0};
            for (const auto& e : eqs)
                if (e.stability == StabilityClass::Stable)
                    REQUIRE(angle_dist(e.config, folded) < 1e-9);
        } else {
            REQUIRE(eqs.size() == 6);
            REQUIRE(count_stable(eqs) == 2);
            for (const auto& e : eqs)
                if (e.stability == StabilityClass::Stable)
                    REQUIRE(std::abs(std::sin(e.config.theta1)) > 1e-9);
        }
    }
}

TEST_CASE("distinct-angle symmetric solutions are saddles and come in swapped pairs") {
    int with_pairs = 0;
    for (int trial = 0; trial < 200; ++trial) {
        MechanismParams p;
        p.l1 = p.l2 = uniform(0.5, 2.0);
        p.k = uniform(5.0, 150.0);
        p.f3 = p.f4 = uniform(-30.0, 30.0);
        const double rho = uniform(0.05, 1.95);
        const auto eqs = solve_symmetric(p, rho);
        std::vector<Configuration> distinct;
        for (const auto& e : eqs) {
            if (std::abs(std::remainder(e.config.theta1 - e.config.theta2, 2.0 * pi)) < 1e-7)
                continue;
            distinct.push_back(e.config);
            CAPTURE(p.l1, p.k, p.f3, rho, e.config.theta1, e.config.theta2);
            REQUIRE(e.det_h < 0.0);
            REQUIRE(e.stability == StabilityClass::Unstable);
        }
        if (distinct.empty()) continue;
        ++with_pairs;
        REQUIRE(distinct.size() % 2 == 0);
        for (const auto& c : distinct) {
            double best = 1e9;
            for (const auto& o : distinct)
                best = std::min(best, angle_dist({c.theta2, c.theta1}, o));
            REQUIRE(best < 1e-7);
        }
    }
    REQUIRE(with_pairs > 50);
}

TEST_CASE("equal-angle Hessian determinant factors as predicted") {
    for (int trial = 0; trial < 200; ++trial) {
        MechanismParams p;
        p.l1 = p.l2 = uniform(0.5, 2.0);
        p.k = uniform(1.0, 200.0);
        p.f3 = p.f4 = uniform(-40.0, 40.0);
        const double rho = uniform(0.05, 1.95);
        for (const auto& e : solve_symmetric(p, rho)) {
            const double th = e.config.theta1;
            if (std::abs(std::remainder(th - e.config.theta2, 2.0 * pi)) > 1e-9) continue;
            const double fa = 2.0 * p.k * rho * std::cos(th) + p.f3 * std::sin(th);
            const double fb = fa - 2.0 * p.k * p.l1 * std::cos(2.0 * th);
            const double predicted = p.l1 * p.l1 * fa * fb;
            CAPTURE(p.l1, p.k, p.f3, rho, th);
            REQUIRE_THAT(e.det_h, Catch::Matchers::WithinAbs(
                                      predicted, 1e-9 * std::abs(predicted) + 1e-12));
        }
    }
}

TEST_CASE("boundary residual matches the closed-form sextics for unit rods") {
    for (int trial = 0; trial < 200; ++trial) {
        MechanismParams p;
        p.l1 = p.l2 = 1.0;
        p.k = uniform(1.0, 200.0);
        p.f3 = p.f4 = (rng() % 2 ? 1.0 : -1.0) * uniform(0.5, 25.0);
        const double rho = uniform(0.05, 1.95);
        const double lower = symmetric_boundary_residual(SymmetricBoundary::Lower, p, rho);
        const double upper = symmetric_boundary_residual(SymmetricBoundary::Upper, p, rho);
        const double el = -16.0 * lower_sextic(p.f3, p.k, rho);
        const double eu = -1024.0 * p.k * p.k * upper_sextic(p.f3, p.k, rho);
        CAPTURE(p.k, p.f3, rho);
        REQUIRE_THAT(lower, Catch::Matchers::WithinAbs(el, 1e-8 * std::abs(el)));
        REQUIRE_THAT(upper, Catch::Matchers::WithinAbs(eu, 1e-8 * std::abs(eu) + 1e-6));
    }
}

TEST_CASE("boundary residual scales homogeneously in load and stiffness") {
    MechanismParams p;
    p.l1 = p.l2 = 1.3;
    p.k = 37.0;
    p.f3 = p.f4 = 8.5;
    const double rho = 0.62;
    const double rl = symmetric_boundary_residual(SymmetricBoundary::Lower, p, rho);
    const double ru = symmetric_boundary_residual(SymmetricBoundary::Upper, p, rho);
    for (double lam : {2.0, 0.5, 10.0}) {
        MechanismParams s = p;
        s.k *= lam;
        s.f3 = s.f4 = p.f3 * lam;
        const double sl = symmetric_boundary_residual(SymmetricBoundary::Lower, s, rho);
        const double su = symmetric_boundary_residual(SymmetricBoundary::Upper, s, rho);
        REQUIRE_THAT(sl, Catch::Matchers::WithinAbs(std::pow(lam, 6) * rl,
                                                    1e-10 * std::abs(std::pow(lam, 6) * rl)));
        REQUIRE_THAT(su, Catch::Matchers::WithinAbs(std::pow(lam, 8) * ru,
                                                    1e-10 * std::abs(std::pow(lam, 8) * ru)));
    }
}

TEST_CASE("boundary crossings sit at the frozen reference lengths") {
    MechanismParams p;
    p.l1 = p.l2 = 1.0;
    p.k = 100.0;
    p.f3 = p.f4 = 5.0;
    const double c1 = bisect_boundary(SymmetricBoundary::Lower, p, 0.01, 0.5);
    REQUIRE_THAT(c1, Catch::Matchers::WithinAbs(0.155101376256, 1e-9));
    const double tiny = bisect_boundary(SymmetricBoundary::Lower, p, 1e-4, 0.01);
    REQUIRE_THAT(tiny, Catch::Matchers::WithinAbs(0.000625587, 1e-8));
    const double c2 = bisect_boundary(SymmetricBoundary::Upper, p, 0.5, 1.5);
    REQUIRE_THAT(c2, Catch::Matchers::WithinAbs(0.874533441919, 1e-9));
}

TEST_CASE("stable count switches exactly at the boundary curves") {
    MechanismParams p;
    p.l1 = p.l2 = 1.0;
    p.k = 100.0;
    p.f3 = p.f4 = 5.0;
    const double c1 = bisect_boundary(SymmetricBoundary::Lower, p, 0.01, 0.5);
    const double c2 = bisect_boundary(SymmetricBoundary::Upper, p, 0.5, 1.5);

    REQUIRE(count_stable(solve_symmetric(p, c1 - 0.01)) == 1);
    REQUIRE(count_stable(solve_symmetric(p, c1 + 0.01)) == 2);
    REQUIRE(count_stable(solve_symmetric(p, 0.5)) == 2);
    REQUIRE(count_stable(solve_symmetric(p, c2 - 0.01)) == 2);
    REQUIRE(count_stable(solve_symmetric(p, c2 + 0.01)) == 1);
}

TEST_CASE("special-case routes validate their preconditions") {
    MechanismParams p;
    p.l1 = 1.0;
    p.l2 = 1.5;
    REQUIRE_THROWS_AS(solve_symmetric(p, 0.5), std::invalid_argument);
    p.l2 = 1.0;
    p.f3 = 2.0;
    p.f4 = 3.0;
    REQUIRE_THROWS_AS(solve_symmetric(p, 0.5), std::invalid_argument);
    REQUIRE_THROWS_AS(solve_unloaded(p, 0.5), std::invalid_argument);
    p.f3 = p.f4 = 2.0;
    p.f3x = 1.0;
    REQUIRE_THROWS_AS(solve_symmetric(p, 0.5), std::invalid_argument);
    REQUIRE_THROWS_AS(symmetric_boundary_residual(SymmetricBoundary::Lower, p, 0.5),
                      std::invalid_argument);
}
