#pragma once

// Kinetostatic model of a planar two-rod tensegrity mechanism.
//
// Two rigid rods A1A3 (length l1) and A2A4 (length l2) are hinged at the base
// points A1 = (0,0) and A2 = (rho,0); rho is the prismatic actuator input.
// Three zero-free-length springs of stiffness k connect A1A4, A2A3 and A3A4.
// External loads act at the rod tips: vertical components f3 (at A3) and f4
// (at A4), positive upward, plus optional horizontal components f3x, f4x,
// positive along +x.
//
// With theta1, theta2 the rod angles measured from the x-axis,
//   A3 = A1 + l1 (cos theta1,  sin theta1)
//   A4 = A2 + l2 (-cos theta2, sin theta2)
// the rods cross for small angles, which is the tensegrity posture.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

namespace tensegrity {

inline constexpr double pi = std::numbers::pi;

/// Normalize an angle to (-pi, pi].
inline double wrap_angle(double a) {
    double w = std::remainder(a, 2.0 * pi);
    if (w <= -pi) w += 2.0 * pi;
    return w;
}

/// Geometric and loading parameters; rod lengths and stiffness must be positive.
struct MechanismParams {
    double l1 = 1.0;
    double l2 = 1.0;
    double k = 100.0;
    double f3 = 0.0;
    double f4 = 0.0;
    double f3x = 0.0;
    double f4x = 0.0;
};

inline void check_params(const MechanismParams& p) {
    if (!(p.l1 > 0.0) || !(p.l2 > 0.0) || !(p.k > 0.0))
        throw std::invalid_argument("mechanism parameters require l1 > 0, l2 > 0, k > 0");
}

inline void check_rho(double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("actuator input requires rho > 0");
}

/// A candidate posture of the mechanism, angles in radians.
struct Configuration {
    double theta1 = 0.0;
    double theta2 = 0.0;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 node_a3(const MechanismParams& p, const Configuration& c) {
    return {p.l1 * std::cos(c.theta1), p.l1 * std::sin(c.theta1)};
}

inline Vec2 node_a4(const MechanismParams& p, double rho, const Configuration& c) {
    return {rho - p.l2 * std::cos(c.theta2), p.l2 * std::sin(c.theta2)};
}

/// Current lengths of the springs A1A4, A2A3, A3A4 (in that order).
inline std::array<double, 3> spring_lengths(const MechanismParams& p, double rho,
                                            const Configuration& c) {
    const Vec2 a3 = node_a3(p, c);
    const Vec2 a4 = node_a4(p, rho, c);
    const auto dist = [](Vec2 u, Vec2 v) { return std::hypot(u.x - v.x, u.y - v.y); };
    return {dist({0.0, 0.0}, a4), dist({rho, 0.0}, a3), dist(a3, a4)};
}

/// Total potential energy: spring energy minus work of the tip loads.
///
/// Closed form of (k/2)(l14^2 + l23^2 + l34^2) - f3 y3 - f4 y4 - f3x x3 - f4x x4:
///   U = k/2 (3 rho^2 - 4 l1 rho cos t1 - 4 l2 rho cos t2
///            + 2 (l1^2 + l2^2 + l1 l2 cos(t1 + t2)))
///       - f3 l1 sin t1 - f4 l2 sin t2 - f3x l1 cos t1 - f4x (rho - l2 cos t2)
inline double potential_energy(const MechanismParams& p, double rho, const Configuration& c) {
    const double c1 = std::cos(c.theta1), s1 = std::sin(c.theta1);
    const double c2 = std::cos(c.theta2), s2 = std::sin(c.theta2);
    const double c12 = std::cos(c.theta1 + c.theta2);
    double u = 0.5 * p.k *
               (3.0 * rho * rho - 4.0 * p.l1 * rho * c1 - 4.0 * p.l2 * rho * c2 +
                2.0 * (p.l1 * p.l1 + p.l2 * p.l2 + p.l1 * p.l2 * c12));
    u -= p.f3 * p.l1 * s1 + p.f4 * p.l2 * s2;
    u -= p.f3x * p.l1 * c1 + p.f4x * (rho - p.l2 * c2);
    return u;
}

/// Gradient of U with respect to (theta1, theta2).
inline std::array<double, 2> gradient(const MechanismParams& p, double rho,
                                      const Configuration& c) {
    const double c1 = std::cos(c.theta1), s1 = std::sin(c.theta1);
    const double c2 = std::cos(c.theta2), s2 = std::sin(c.theta2);
    const double s12 = std::sin(c.theta1 + c.theta2);
    const double g1 = 2.0 * p.k * rho * p.l1 * s1 - p.k * p.l1 * p.l2 * s12 -
                      p.f3 * p.l1 * c1 + p.f3x * p.l1 * s1;
    const double g2 = 2.0 * p.k * rho * p.l2 * s2 - p.k * p.l1 * p.l2 * s12 -
                      p.f4 * p.l2 * c2 - p.f4x * p.l2 * s2;
    return {g1, g2};
}

/// Symmetric 2x2 matrix; h12 is stored once, so H(1,2) == H(2,1) structurally.
struct SymMat2 {
    double h11 = 0.0;
    double h12 = 0.0;
    double h22 = 0.0;
    double det() const { return h11 * h22 - h12 * h12; }
};

/// Hessian of U with respect to (theta1, theta2).
inline SymMat2 hessian(const MechanismParams& p, double rho, const Configuration& c) {
    const double c1 = std::cos(c.theta1), s1 = std::sin(c.theta1);
    const double c2 = std::cos(c.theta2), s2 = std::sin(c.theta2);
    const double c12 = std::cos(c.theta1 + c.theta2);
    SymMat2 h;
    h.h11 = 2.0 * p.k * rho * p.l1 * c1 - p.k * p.l1 * p.l2 * c12 + p.f3 * p.l1 * s1 +
            p.f3x * p.l1 * c1;
    h.h22 = 2.0 * p.k * rho * p.l2 * c2 - p.k * p.l1 * p.l2 * c12 + p.f4 * p.l2 * s2 -
            p.f4x * p.l2 * c2;
    h.h12 = -p.k * p.l1 * p.l2 * c12;
    return h;
}

enum class StabilityClass { Stable, Unstable, Degenerate };

inline const char* to_string(StabilityClass s) {
    switch (s) {
        case StabilityClass::Stable: return "stable";
        case StabilityClass::Unstable: return "unstable";
        default: return "degenerate";
    }
}

inline StabilityClass stability_from_name(const std::string& name) {
    if (name == "stable") return StabilityClass::Stable;
    if (name == "unstable") return StabilityClass::Unstable;
    if (name == "degenerate") return StabilityClass::Degenerate;
    throw std::invalid_argument("unknown stability class: " + name);
}

/// Classify an equilibrium by the leading principal minors of its Hessian.
/// A minor within +-eps of zero makes the point Degenerate unless the other
/// minor already proves instability.
inline StabilityClass classify_stability(const SymMat2& h, double eps) {
    const double det = h.det();
    if (h.h11 > eps && det > eps) return StabilityClass::Stable;
    if ((std::abs(det) <= eps && h.h11 >= -eps) || (std::abs(h.h11) <= eps && det >= -eps))
        return StabilityClass::Degenerate;
    return StabilityClass::Unstable;
}

/// Characteristic energy scale used to make tolerances dimensionless.
inline double energy_scale(const MechanismParams& p, double rho) {
    const double m = std::max({p.l1, p.l2, rho});
    return p.k * m * m;
}

/// Relative tolerances; absolute values are obtained by multiplying with
/// energy_scale. tol_eq bounds the residual |grad U| at accepted equilibria,
/// eps_h is the Hessian degeneracy band.
struct Tolerances {
    double tol_eq = 1e-9;
    double eps_h = 1e-8;

    double tol_eq_abs(const MechanismParams& p, double rho) const {
        return tol_eq * energy_scale(p, rho);
    }
    double eps_h_abs(const MechanismParams& p, double rho) const {
        return eps_h * energy_scale(p, rho);
    }
};

/// One equilibrium configuration together with its derived data.
struct Equilibrium {
    double rho = 0.0;
    Configuration config;
    double energy = 0.0;
    double grad_residual = 0.0;   ///< max-norm of grad U at the configuration
    double h11 = 0.0;
    double det_h = 0.0;
    StabilityClass stability = StabilityClass::Degenerate;
    std::optional<int> branch_tag;   ///< set by continuation tracing
};

/// Assemble the Equilibrium record for a configuration (no residual filtering).
inline Equilibrium make_equilibrium(const MechanismParams& p, double rho, Configuration c,
                                    const Tolerances& tol = {}) {
    c.theta1 = wrap_angle(c.theta1);
    c.theta2 = wrap_angle(c.theta2);
    const auto g = gradient(p, rho, c);
    const SymMat2 h = hessian(p, rho, c);
    Equilibrium e;
    e.rho = rho;
    e.config = c;
    e.energy = potential_energy(p, rho, c);
    e.grad_residual = std::max(std::abs(g[0]), std::abs(g[1]));
    e.h11 = h.h11;
    e.det_h = h.det();
    e.stability = classify_stability(h, tol.eps_h_abs(p, rho));
    return e;
}

}  // namespace tensegrity
