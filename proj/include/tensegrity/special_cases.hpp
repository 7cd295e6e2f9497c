#pragma once

// Closed-form solution routes for the two structured parameter families: equal
// rods under equal vertical loads, and the fully unloaded mechanism. These
// exist both as fast paths and as independent cross-checks of the general
// polynomial solver.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tensegrity/mechanism.hpp"
#include "tensegrity/polynomial.hpp"
#include "tensegrity/solver.hpp"

namespace tensegrity {

namespace detail {

inline void require_symmetric(const MechanismParams& m) {
    if (m.l1 != m.l2 || m.f3 != m.f4 || m.f3x != 0.0 || m.f4x != 0.0)
        throw std::invalid_argument(
            "symmetric routines need equal rods, equal vertical loads, no horizontal loads");
}

/// Stationarity along the equal-angle line theta1 = theta2 = 2*atan(t),
/// written as a quartic in t.
inline UnivariatePoly equal_angle_quartic(double l, double k, double f, double rho) {
    return UnivariatePoly({-f, 4.0 * k * (rho - l), 0.0, 4.0 * k * (l + rho), f});
}

}  // namespace detail

/// Equilibria of the symmetric mechanism (l1 == l2, f3 == f4, vertical loads
/// only). Solutions split into an equal-angle family and swapped pairs with
/// distinct angles; both are obtained from low-degree polynomials instead of
/// the full resultant.
inline std::vector<Equilibrium> solve_symmetric(const MechanismParams& mp, double rho,
                                                const Tolerances& tol = {}) {
    check_params(mp);
    check_rho(rho);
    detail::require_symmetric(mp);
    const double l = mp.l1, k = mp.k, f = mp.f3;

    std::vector<Configuration> cands;
    for (const auto& rc : real_roots(detail::equal_angle_quartic(l, k, f, rho))) {
        const double th = 2.0 * std::atan(rc.value);
        cands.push_back({th, th});
    }
    // the quartic cannot represent theta = pi; probe that flat shape directly
    cands.push_back({pi, pi});

    // Distinct-angle solutions satisfy f*(t1 + t2) + 2*k*rho*(1 - t1*t2) = 0,
    // so t1 = N(t2)/D(t2). Substituting into the second balance equation and
    // clearing D^2 leaves a quartic with a spurious (1 + t2^2) factor.
    const auto [bp, bq] = halfangle_system(mp, rho);
    (void)bp;
    const UnivariatePoly nrat({2.0 * k * rho, f});
    const UnivariatePoly drat({-f, 2.0 * k * rho});
    const UnivariatePoly npow[3] = {UnivariatePoly({1.0}), nrat, nrat * nrat};
    const UnivariatePoly dpow[3] = {UnivariatePoly({1.0}), drat, drat * drat};
    UnivariatePoly cleared;
    for (int i = 0; i <= 2; ++i) {
        for (int j = 0; j <= 2; ++j) {
            const double qij = bq.coeff(i, j);
            if (qij == 0.0) continue;
            UnivariatePoly term = qij * (npow[i] * dpow[2 - i]);
            std::vector<double> shifted(static_cast<size_t>(j), 0.0);
            shifted.insert(shifted.end(), term.coeffs().begin(), term.coeffs().end());
            cleared = cleared + UnivariatePoly(std::move(shifted));
        }
    }
    cleared = cleared.trimmed();
    if (cleared.degree() >= 0) {
        auto [quo, rem] = UnivariatePoly::divrem(cleared, UnivariatePoly({1.0, 0.0, 1.0}));
        const UnivariatePoly reduced =
            (rem.max_abs_coeff() <= 1e-8 * cleared.max_abs_coeff()) ? quo.trimmed() : cleared;
        for (const auto& rc : real_roots(reduced)) {
            const double t2 = rc.value;
            // atan2 keeps the partner angle well defined when D(t2) = 0,
            // which is the partner sitting at pi
            const double th1 = wrap_angle(2.0 * std::atan2(nrat(t2), drat(t2)));
            const double th2 = 2.0 * std::atan(t2);
            cands.push_back({th1, th2});
            // the swapped configuration is an equilibrium by symmetry; when a
            // partner angle sits at pi its own parameter is at infinity and
            // only the swap recovers it
            cands.push_back({th2, th1});
        }
    }

    return detail::finalize_candidates(mp, rho, cands, tol);
}

/// Equilibria of the unloaded mechanism: the four flat shapes plus, inside the
/// triangle-inequality window |l1 - l2| < 2 rho < l1 + l2, the crossed pair
/// whose tip segment runs parallel to the base.
inline std::vector<Equilibrium> solve_unloaded(const MechanismParams& mp, double rho,
                                               const Tolerances& tol = {}) {
    check_params(mp);
    check_rho(rho);
    if (mp.f3 != 0.0 || mp.f4 != 0.0 || mp.f3x != 0.0 || mp.f4x != 0.0)
        throw std::invalid_argument("solve_unloaded requires all external loads to be zero");

    std::vector<Configuration> cands = {{0.0, 0.0}, {0.0, pi}, {pi, 0.0}, {pi, pi}};
    const double c1 = (mp.l1 * mp.l1 + 4.0 * rho * rho - mp.l2 * mp.l2) / (4.0 * rho * mp.l1);
    const double c2 = (mp.l2 * mp.l2 + 4.0 * rho * rho - mp.l1 * mp.l1) / (4.0 * rho * mp.l2);
    if (std::abs(c1) < 1.0 && std::abs(c2) < 1.0) {
        const double a1 = std::acos(c1), a2 = std::acos(c2);
        cands.push_back({a1, a2});
        cands.push_back({-a1, -a2});
    }
    return detail::finalize_candidates(mp, rho, cands, tol);
}

/// The two boundary curves bounding the two-stable-state interval of the
/// symmetric mechanism. Lower: an equal-angle equilibrium meets the first
/// factor of the Hessian determinant (the symmetry-breaking transition).
/// Upper: it meets the second factor (the fold of the equal-angle family).
enum class SymmetricBoundary { Lower, Upper };

/// Signed residual whose zero set in (f3, rho) is the requested boundary.
/// Computed as the resultant of the equal-angle stationarity quartic with the
/// matching Hessian-determinant factor, so it vanishes exactly when an
/// equal-angle equilibrium becomes marginally stable.
inline double symmetric_boundary_residual(SymmetricBoundary kind, const MechanismParams& mp,
                                          double rho) {
    check_params(mp);
    check_rho(rho);
    detail::require_symmetric(mp);
    const double l = mp.l1, k = mp.k, f = mp.f3;
    const UnivariatePoly quartic = detail::equal_angle_quartic(l, k, f, rho);

    UnivariatePoly factor;
    if (kind == SymmetricBoundary::Lower) {
        // (1 + t^2) (2 k rho cos + f sin)
        factor = UnivariatePoly({2.0 * k * rho, 2.0 * f, -2.0 * k * rho});
    } else {
        // (1 + t^2)^2 (2 k rho cos + f sin - 2 k l cos 2theta)
        factor = UnivariatePoly({2.0 * k * (rho - l), 2.0 * f, 12.0 * k * l, 2.0 * f,
                                 -2.0 * k * (rho + l)});
    }
    return resultant(quartic, factor);
}

}  // namespace tensegrity
