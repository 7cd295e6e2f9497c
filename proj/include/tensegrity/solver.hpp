#pragma once

// Exhaustive equilibrium solver. The two equilibrium equations are converted
// to polynomials via the tangent half-angle substitution, the second angle is
// eliminated with a resultant, and the surviving univariate polynomial is
// solved by the companion-matrix root finder. Because the substitution cannot
// represent angles at pi, the system is solved in four charts with each angle
// optionally shifted by pi; the union of charts covers the whole torus.

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tensegrity/mechanism.hpp"
#include "tensegrity/polynomial.hpp"

namespace tensegrity {

struct DegenerateResultant : std::runtime_error {
    explicit DegenerateResultant(const std::string& what) : std::runtime_error(what) {}
};

/// The equilibrium equations as bivariate polynomials in t1 = tan(theta1/2),
/// t2 = tan(theta2/2). With sigma1 or sigma2 set to -1 the corresponding angle
/// is measured from pi instead of 0, which amounts to flipping the sign of the
/// matching rod length in the coupling terms.
inline std::pair<BivariatePoly, BivariatePoly> halfangle_system(const MechanismParams& m,
                                                                double rho, int sigma1 = 1,
                                                                int sigma2 = 1) {
    const double kl1 = m.k * m.l1 * sigma1;
    const double kl2 = m.k * m.l2 * sigma2;
    const double krho = m.k * rho;

    BivariatePoly p;  // balance about the first rod
    p.set_coeff(0, 0, -m.f3);
    p.set_coeff(0, 1, -2.0 * kl2);
    p.set_coeff(0, 2, -m.f3);
    p.set_coeff(1, 0, 2.0 * m.f3x - 2.0 * kl2 + 4.0 * krho);
    p.set_coeff(1, 2, 2.0 * m.f3x + 2.0 * kl2 + 4.0 * krho);
    p.set_coeff(2, 0, m.f3);
    p.set_coeff(2, 1, 2.0 * kl2);
    p.set_coeff(2, 2, m.f3);

    BivariatePoly q;  // balance about the second rod
    q.set_coeff(0, 0, -m.f4);
    q.set_coeff(0, 1, -2.0 * m.f4x - 2.0 * kl1 + 4.0 * krho);
    q.set_coeff(0, 2, m.f4);
    q.set_coeff(1, 0, -2.0 * kl1);
    q.set_coeff(1, 2, 2.0 * kl1);
    q.set_coeff(2, 0, -m.f4);
    q.set_coeff(2, 1, -2.0 * m.f4x + 2.0 * kl1 + 4.0 * krho);
    q.set_coeff(2, 2, m.f4);

    return {p, q};
}

/// Resultant of p and q with respect to t2, as a polynomial in t1. The factor
/// (1 + t1^2) that the substitution always introduces is divided out, so the
/// generic degree is 6. Throws DegenerateResultant when the resultant vanishes
/// identically, meaning the two curves share a component.
inline UnivariatePoly eliminate(const BivariatePoly& p_in, const BivariatePoly& q_in) {
    const double scale = std::max(p_in.max_abs_coeff(), q_in.max_abs_coeff());
    if (scale <= 0.0) throw DegenerateResultant("equilibrium polynomials vanish identically");

    // normalize so the degeneracy threshold below is dimensionless
    BivariatePoly p, q;
    for (int i = 0; i <= 2; ++i)
        for (int j = 0; j <= 2; ++j) {
            p.set_coeff(i, j, p_in.coeff(i, j) / scale);
            q.set_coeff(i, j, q_in.coeff(i, j) / scale);
        }

    const auto a = p.coeffs_in_t2();
    const auto b = q.coeffs_in_t2();
    auto effective_degree = [](const std::array<UnivariatePoly, 3>& cs) {
        for (int j = 2; j >= 0; --j)
            if (cs[static_cast<size_t>(j)].max_abs_coeff() > 1e-13) return j;
        return -1;
    };
    const int dp = effective_degree(a), dq = effective_degree(b);
    if (dp < 0 || dq < 0) throw DegenerateResultant("an equilibrium polynomial vanishes identically");

    UnivariatePoly r;
    if (dp == 0) {
        r = a[0];  // p does not involve t2, so it constrains t1 directly
    } else if (dq == 0) {
        r = b[0];
    } else if (dp == 2 && dq == 2) {
        const UnivariatePoly u = a[2] * b[0] - a[0] * b[2];
        const UnivariatePoly v = a[2] * b[1] - a[1] * b[2];
        const UnivariatePoly w = a[1] * b[0] - a[0] * b[1];
        r = u * u - v * w;
    } else if (dp == 2 && dq == 1) {
        r = a[2] * b[0] * b[0] - a[1] * b[1] * b[0] + a[0] * b[1] * b[1];
    } else if (dp == 1 && dq == 2) {
        r = b[2] * a[0] * a[0] - b[1] * a[1] * a[0] + b[0] * a[1] * a[1];
    } else {
        r = a[1] * b[0] - a[0] * b[1];
    }

    r = r.trimmed();
    if (r.degree() < 0 || r.max_abs_coeff() <= 1e-12)
        throw DegenerateResultant("resultant vanishes identically");

    const UnivariatePoly structural({1.0, 0.0, 1.0});
    while (r.degree() > 6) {
        auto [quo, rem] = UnivariatePoly::divrem(r, structural);
        if (rem.max_abs_coeff() > 1e-8 * r.max_abs_coeff()) break;
        r = quo.trimmed();
    }
    return r;
}

namespace detail {

/// Sum of |c_ij| |t1|^i |t2|^j, the natural residual scale at a point.
inline double residual_scale(const BivariatePoly& b, double t1, double t2) {
    double s = 0.0;
    double p1 = 1.0;
    for (int i = 0; i <= 2; ++i) {
        double p2 = 1.0;
        for (int j = 0; j <= 2; ++j) {
            s += std::abs(b.coeff(i, j)) * p1 * p2;
            p2 *= std::abs(t2);
        }
        p1 *= std::abs(t1);
    }
    return std::max(s, 1e-300);
}

inline void push_quadratic_roots(double c2, double c1, double c0, std::vector<double>& out) {
    const double s = std::abs(c2) + std::abs(c1) + std::abs(c0);
    if (s == 0.0) return;
    if (std::abs(c2) <= 1e-14 * s) {
        if (std::abs(c1) > 1e-14 * s) out.push_back(-c0 / c1);
        return;
    }
    const double disc = c1 * c1 - 4.0 * c2 * c0;
    if (disc < 0.0) return;
    const double root = std::sqrt(disc);
    const double num = -0.5 * (c1 + std::copysign(root, c1));
    out.push_back(num / c2);
    if (num != 0.0) out.push_back(c0 / num);
}

}  // namespace detail

/// Values of t2 solving both equations at a fixed root t1 of the resultant.
/// Two routes feed the candidate list: the linear combination that cancels the
/// quadratic term, and the roots of each quadratic individually. Candidates
/// are kept when both residuals are small relative to the coefficient scale.
inline std::vector<double> back_substitute(const BivariatePoly& p, const BivariatePoly& q,
                                           double t1, double rel_tol = 1e-5) {
    const auto a = p.coeffs_in_t2();
    const auto b = q.coeffs_in_t2();
    const double A2 = a[2](t1), A1 = a[1](t1), A0 = a[0](t1);
    const double B2 = b[2](t1), B1 = b[1](t1), B0 = b[0](t1);

    std::vector<double> cand;
    const double u = A2 * B0 - A0 * B2;
    const double v = A2 * B1 - A1 * B2;
    const double w = A1 * B0 - A0 * B1;
    const double cs = std::abs(A2) + std::abs(A1) + std::abs(A0) + std::abs(B2) + std::abs(B1) +
                      std::abs(B0);
    if (std::abs(v) > 1e-12 * cs * cs) cand.push_back(-u / v);
    if (std::abs(u) > 1e-12 * cs * cs) cand.push_back(-w / u);
    detail::push_quadratic_roots(A2, A1, A0, cand);
    detail::push_quadratic_roots(B2, B1, B0, cand);

    std::vector<double> out;
    for (double t2 : cand) {
        if (!std::isfinite(t2)) continue;
        const double rp = std::abs(p(t1, t2)) / detail::residual_scale(p, t1, t2);
        const double rq = std::abs(q(t1, t2)) / detail::residual_scale(q, t1, t2);
        if (std::max(rp, rq) > rel_tol) continue;
        bool dup = false;
        for (double prev : out)
            if (std::abs(t2 - prev) <= 1e-7 * (1.0 + std::abs(prev))) dup = true;
        if (!dup) out.push_back(t2);
    }
    return out;
}

/// Damped Newton iteration on the gradient in angle space. Returns the final
/// gradient max-norm; the configuration is updated in place.
inline double refine_equilibrium(const MechanismParams& p, double rho, Configuration& c,
                                 int max_iter = 60) {
    auto norm = [](const std::array<double, 2>& g) {
        return std::max(std::abs(g[0]), std::abs(g[1]));
    };
    auto g = gradient(p, rho, c);
    double best = norm(g);
    for (int it = 0; it < max_iter; ++it) {
        const SymMat2 h = hessian(p, rho, c);
        const double det = h.det();
        if (std::abs(det) < 1e-300) break;
        double d1 = (h.h22 * g[0] - h.h12 * g[1]) / det;
        double d2 = (h.h11 * g[1] - h.h12 * g[0]) / det;
        double step = 1.0;
        Configuration next = c;
        std::array<double, 2> gn = g;
        bool improved = false;
        for (int bt = 0; bt < 20; ++bt) {
            next = {c.theta1 - step * d1, c.theta2 - step * d2};
            gn = gradient(p, rho, next);
            if (norm(gn) < best) {
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) break;
        c = next;
        g = gn;
        best = norm(g);
        if (std::abs(step * d1) + std::abs(step * d2) < 1e-15) break;
    }
    return best;
}

namespace detail {

/// Polish raw candidate configurations, drop the ones that fail the residual
/// test, deduplicate, and sort by theta1 then theta2.
inline std::vector<Equilibrium> finalize_candidates(const MechanismParams& mp, double rho,
                                                    const std::vector<Configuration>& candidates,
                                                    const Tolerances& tol) {
    const double accept = tol.tol_eq_abs(mp, rho);
    std::vector<Equilibrium> out;
    for (Configuration c : candidates) {
        const double residual = refine_equilibrium(mp, rho, c);
        if (residual > accept) continue;
        c.theta1 = wrap_angle(c.theta1);
        c.theta2 = wrap_angle(c.theta2);
        bool dup = false;
        for (const auto& e : out) {
            const double d1 = std::remainder(c.theta1 - e.config.theta1, 2.0 * pi);
            const double d2 = std::remainder(c.theta2 - e.config.theta2, 2.0 * pi);
            if (std::max(std::abs(d1), std::abs(d2)) < 1e-7) {
                dup = true;
                break;
            }
        }
        if (!dup) out.push_back(make_equilibrium(mp, rho, c, tol));
    }
    std::sort(out.begin(), out.end(), [](const Equilibrium& a, const Equilibrium& b) {
        if (a.config.theta1 != b.config.theta1) return a.config.theta1 < b.config.theta1;
        return a.config.theta2 < b.config.theta2;
    });
    return out;
}

}  // namespace detail

/// All equilibrium configurations at a given actuator length, sorted by theta1
/// then theta2. Throws DegenerateResultant if the polynomial system is
/// degenerate in every chart.
inline std::vector<Equilibrium> solve_equilibria(const MechanismParams& mp, double rho,
                                                 const Tolerances& tol = {}) {
    check_params(mp);
    check_rho(rho);

    std::vector<Configuration> candidates;
    int degenerate_charts = 0;
    for (int s1 = 0; s1 < 2; ++s1) {
        for (int s2 = 0; s2 < 2; ++s2) {
            const auto [p, q] = halfangle_system(mp, rho, s1 ? -1 : 1, s2 ? -1 : 1);
            std::vector<RootCluster> roots;
            try {
                roots = real_roots(eliminate(p, q));
            } catch (const DegenerateResultant&) {
                ++degenerate_charts;
                continue;
            }
            for (const auto& rc : roots) {
                for (double t2 : back_substitute(p, q, rc.value)) {
                    Configuration c{wrap_angle(2.0 * std::atan(rc.value) + (s1 ? pi : 0.0)),
                                    wrap_angle(2.0 * std::atan(t2) + (s2 ? pi : 0.0))};
                    candidates.push_back(c);
                }
            }
        }
    }
    if (degenerate_charts == 4)
        throw DegenerateResultant("equilibrium system is degenerate in every chart");

    return detail::finalize_candidates(mp, rho, candidates, tol);
}

/// Number of stable entries in a solution set.
inline int count_stable(const std::vector<Equilibrium>& eqs) {
    int n = 0;
    for (const auto& e : eqs)
        if (e.stability == StabilityClass::Stable) ++n;
    return n;
}

}  // namespace tensegrity
