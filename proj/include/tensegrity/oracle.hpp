#pragma once

// Brute-force checks that deliberately avoid the closed-form gradient and
// Hessian. Everything here is derived from potential_energy alone, so the
// polynomial solver and the analytic derivatives can be validated against an
// independent route.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "tensegrity/mechanism.hpp"

namespace tensegrity {

/// Central-difference gradient of the potential, energy evaluations only.
inline std::array<double, 2> fd_gradient(const MechanismParams& p, double rho,
                                         const Configuration& c, double h = 1e-6) {
    const double up1 = potential_energy(p, rho, {c.theta1 + h, c.theta2});
    const double um1 = potential_energy(p, rho, {c.theta1 - h, c.theta2});
    const double up2 = potential_energy(p, rho, {c.theta1, c.theta2 + h});
    const double um2 = potential_energy(p, rho, {c.theta1, c.theta2 - h});
    return {(up1 - um1) / (2.0 * h), (up2 - um2) / (2.0 * h)};
}

/// Central-difference Hessian of the potential.
inline SymMat2 fd_hessian(const MechanismParams& p, double rho, const Configuration& c,
                          double h = 1e-5) {
    const double u0 = potential_energy(p, rho, c);
    const double upp = potential_energy(p, rho, {c.theta1 + h, c.theta2 + h});
    const double upm = potential_energy(p, rho, {c.theta1 + h, c.theta2 - h});
    const double ump = potential_energy(p, rho, {c.theta1 - h, c.theta2 + h});
    const double umm = potential_energy(p, rho, {c.theta1 - h, c.theta2 - h});
    const double u1p = potential_energy(p, rho, {c.theta1 + h, c.theta2});
    const double u1m = potential_energy(p, rho, {c.theta1 - h, c.theta2});
    const double u2p = potential_energy(p, rho, {c.theta1, c.theta2 + h});
    const double u2m = potential_energy(p, rho, {c.theta1, c.theta2 - h});
    SymMat2 m;
    m.h11 = (u1p - 2.0 * u0 + u1m) / (h * h);
    m.h22 = (u2p - 2.0 * u0 + u2m) / (h * h);
    m.h12 = (upp - upm - ump + umm) / (4.0 * h * h);
    return m;
}

struct OracleOptions {
    int grid = 400;        ///< samples per angle over one period
    int refine_iters = 60;
    double h = 1e-6;       ///< finite difference step for refinement
};

/// Local minima of the potential over the torus, found by exhaustive grid
/// comparison plus Newton refinement on finite differences.
inline std::vector<Configuration> oracle_local_minima(const MechanismParams& p, double rho,
                                                      OracleOptions opt = {}) {
    const int n = opt.grid;
    std::vector<double> u(static_cast<size_t>(n) * static_cast<size_t>(n));
    auto angle = [&](int i) { return -pi + 2.0 * pi * (i + 0.5) / n; };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            u[static_cast<size_t>(i) * n + j] = potential_energy(p, rho, {angle(i), angle(j)});

    std::vector<Configuration> minima;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double v = u[static_cast<size_t>(i) * n + j];
            bool lowest = true;
            for (int di = -1; di <= 1 && lowest; ++di)
                for (int dj = -1; dj <= 1 && lowest; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    const int ii = (i + di + n) % n, jj = (j + dj + n) % n;
                    const double vn = u[static_cast<size_t>(ii) * n + jj];
                    // symmetric mechanisms produce exact ties across the
                    // mirror line; break them by cell index
                    if (vn < v || (vn == v && ii * n + jj < i * n + j)) lowest = false;
                }
            if (!lowest) continue;

            Configuration c{angle(i), angle(j)};
            auto newton = [&](Configuration& x) {
                for (int it = 0; it < opt.refine_iters; ++it) {
                    const auto g = fd_gradient(p, rho, x, opt.h);
                    const SymMat2 hm = fd_hessian(p, rho, x, 1e-4);
                    const double det = hm.det();
                    if (std::abs(det) < 1e-300) break;
                    double d1 = (hm.h22 * g[0] - hm.h12 * g[1]) / det;
                    double d2 = (hm.h11 * g[1] - hm.h12 * g[0]) / det;
                    // clamp to stay inside the starting basin
                    const double cap = 2.0 * pi / n;
                    d1 = std::clamp(d1, -cap, cap);
                    d2 = std::clamp(d2, -cap, cap);
                    x.theta1 -= d1;
                    x.theta2 -= d2;
                    if (std::abs(d1) + std::abs(d2) < 1e-12) break;
                }
            };
            auto grad_norm = [&](const Configuration& x) {
                const auto g = fd_gradient(p, rho, x, opt.h);
                return std::max(std::abs(g[0]), std::abs(g[1]));
            };
            // converged when the difference gradient is within a small factor
            // of its round-off floor u*|U|/h
            auto thresh = [&](const Configuration& x) {
                const double uref = std::max(1.0, std::abs(potential_energy(p, rho, x)));
                return std::max(1e-9, 4.5e-9 * uref);
            };
            newton(c);
            // Newton can stall in the nearly flat valley left behind by a fold;
            // energy-monotone descent walks out of it, then Newton repolishes.
            for (int round = 0; round < 8 && grad_norm(c) > thresh(c); ++round) {
                double alpha = 1e-3;
                for (int it = 0; it < 200; ++it) {
                    const auto g = fd_gradient(p, rho, c, opt.h);
                    const double gn2 = g[0] * g[0] + g[1] * g[1];
                    if (std::sqrt(gn2) <= thresh(c)) break;
                    const double u0 = potential_energy(p, rho, c);
                    double a = alpha;
                    bool moved = false;
                    for (int bt = 0; bt < 40; ++bt) {
                        const Configuration t{c.theta1 - a * g[0], c.theta2 - a * g[1]};
                        if (potential_energy(p, rho, t) <= u0 - 0.25 * a * gn2) {
                            c = t;
                            alpha = std::min(1.5 * a, 0.1);
                            moved = true;
                            break;
                        }
                        a *= 0.5;
                    }
                    if (!moved) break;
                }
                newton(c);
            }
            c.theta1 = wrap_angle(c.theta1);
            c.theta2 = wrap_angle(c.theta2);
            // the grid test can mistake a saddle whose descent direction lies
            // between the eight sampled directions for a minimum; reject
            // anything that did not land on a verified strict minimum
            if (grad_norm(c) > thresh(c)) continue;
            const SymMat2 hm = fd_hessian(p, rho, c, 1e-4);
            if (hm.h11 <= 0.0 || hm.det() <= 0.0) continue;
            minima.push_back(c);
        }
    }

    // merge duplicates that refined into the same point
    std::vector<Configuration> out;
    for (const auto& c : minima) {
        bool dup = false;
        for (const auto& o : out) {
            const double d1 = std::remainder(c.theta1 - o.theta1, 2.0 * pi);
            const double d2 = std::remainder(c.theta2 - o.theta2, 2.0 * pi);
            if (std::max(std::abs(d1), std::abs(d2)) < 1e-5) dup = true;
        }
        if (!dup) out.push_back(c);
    }
    std::sort(out.begin(), out.end(), [](const Configuration& a, const Configuration& b) {
        return a.theta1 != b.theta1 ? a.theta1 < b.theta1 : a.theta2 < b.theta2;
    });
    return out;
}

}  // namespace tensegrity
