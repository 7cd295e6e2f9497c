#pragma once

// Classification of parameter-plane slices by number of stable equilibria.
// Cells of a regular grid are classified independently; boundaries between
// cells with different counts are sharpened by bisection and can be validated
// against known analytic boundary curves.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tensegrity/mechanism.hpp"
#include "tensegrity/parallel.hpp"
#include "tensegrity/solver.hpp"
#include "tensegrity/special_cases.hpp"

namespace tensegrity {

enum class PlaneAxis { Rho, L2, F3, F4 };

inline std::string to_string(PlaneAxis a) {
    switch (a) {
        case PlaneAxis::Rho: return "rho";
        case PlaneAxis::L2: return "l2";
        case PlaneAxis::F3: return "f3";
        case PlaneAxis::F4: return "f4";
    }
    return "?";
}

inline PlaneAxis axis_from_name(const std::string& name) {
    if (name == "rho") return PlaneAxis::Rho;
    if (name == "l2") return PlaneAxis::L2;
    if (name == "f3") return PlaneAxis::F3;
    if (name == "f4") return PlaneAxis::F4;
    throw std::invalid_argument("unknown plane axis: " + name);
}

/// A rectangular slice of the parameter space. Two of {rho, l2, f3, f4} vary;
/// everything else is frozen at `fixed` (and `fixed_rho` when rho is not an
/// axis). With tie_forces set, assigning either vertical force assigns both,
/// which keeps a force sweep inside the symmetric family.
struct PlaneSpec {
    PlaneAxis axis_x = PlaneAxis::Rho;
    PlaneAxis axis_y = PlaneAxis::L2;
    double x_lo = 0.01, x_hi = 2.0;
    double y_lo = 0.01, y_hi = 2.0;
    int resolution = 400;
    MechanismParams fixed;
    double fixed_rho = 0.5;
    bool tie_forces = false;
};

inline void check_plane(const PlaneSpec& s) {
    if (s.axis_x == s.axis_y) throw std::invalid_argument("plane axes must be distinct");
    if (s.resolution < 2) throw std::invalid_argument("plane resolution must be at least 2");
    if (!(s.x_lo < s.x_hi) || !(s.y_lo < s.y_hi))
        throw std::invalid_argument("plane ranges must be nonempty");
    auto check_axis = [](PlaneAxis a, double lo) {
        if ((a == PlaneAxis::Rho || a == PlaneAxis::L2) && lo <= 0.0)
            throw std::invalid_argument(to_string(a) + " range must be strictly positive");
    };
    check_axis(s.axis_x, s.x_lo);
    check_axis(s.axis_y, s.y_lo);
    if (s.axis_x != PlaneAxis::Rho && s.axis_y != PlaneAxis::Rho) check_rho(s.fixed_rho);
    check_params(s.fixed);
}

/// Mechanism parameters and actuator length at plane coordinates (x, y).
inline std::pair<MechanismParams, double> plane_point(const PlaneSpec& s, double x, double y) {
    MechanismParams p = s.fixed;
    double rho = s.fixed_rho;
    auto assign = [&](PlaneAxis a, double v) {
        switch (a) {
            case PlaneAxis::Rho: rho = v; break;
            case PlaneAxis::L2: p.l2 = v; break;
            case PlaneAxis::F3:
                p.f3 = v;
                if (s.tie_forces) p.f4 = v;
                break;
            case PlaneAxis::F4:
                p.f4 = v;
                if (s.tie_forces) p.f3 = v;
                break;
        }
    };
    assign(s.axis_x, x);
    assign(s.axis_y, y);
    return {p, rho};
}

/// Stable-solution count at one parameter point. `stable` is -1 when the
/// polynomial system was degenerate; `degenerate` also flags points where any
/// individual solution failed strict classification.
struct CellClass {
    int stable = -1;
    bool degenerate = false;
};

inline CellClass count_stable_at(const MechanismParams& p, double rho, const Tolerances& tol = {}) {
    CellClass c;
    try {
        const auto eqs = solve_equilibria(p, rho, tol);
        c.stable = 0;
        for (const auto& e : eqs) {
            if (e.stability == StabilityClass::Stable) ++c.stable;
            if (e.stability == StabilityClass::Degenerate) c.degenerate = true;
        }
    } catch (const DegenerateResultant&) {
        c.stable = -1;
        c.degenerate = true;
    }
    return c;
}

struct BoundaryPoint {
    double x = 0.0, y = 0.0;
};

struct RegionMap {
    PlaneSpec spec;
    int refinement_depth = 4;
    std::vector<int> counts;                         ///< row-major [iy * res + ix], -1 marker
    std::vector<unsigned char> degenerate;           ///< per-cell degeneracy flag
    std::vector<std::pair<int, int>> boundary_cells; ///< (ix, iy) of cells disagreeing with a neighbor
    std::vector<BoundaryPoint> boundary_points;      ///< bisection-refined transition locations

    double dx() const { return (spec.x_hi - spec.x_lo) / spec.resolution; }
    double dy() const { return (spec.y_hi - spec.y_lo) / spec.resolution; }
    double x_center(int ix) const { return spec.x_lo + (ix + 0.5) * dx(); }
    double y_center(int iy) const { return spec.y_lo + (iy + 0.5) * dy(); }
    int count_at(int ix, int iy) const {
        return counts[static_cast<size_t>(iy) * static_cast<size_t>(spec.resolution) +
                      static_cast<size_t>(ix)];
    }
};

/// Classify a full plane. Cells are solved independently (parallel across
/// `jobs` threads, deterministic output); disagreeing 4-neighbor pairs are then
/// bisected `depth` times along the segment joining the cell centers.
inline RegionMap map_region(const PlaneSpec& spec, int depth = 4, int jobs = 1,
                            const Tolerances& tol = {}) {
    check_plane(spec);
    RegionMap map;
    map.spec = spec;
    map.refinement_depth = depth;
    const int n = spec.resolution;
    map.counts.assign(static_cast<size_t>(n) * static_cast<size_t>(n), -1);
    map.degenerate.assign(static_cast<size_t>(n) * static_cast<size_t>(n), 0);

    parallel_for(static_cast<size_t>(n) * static_cast<size_t>(n), jobs, [&](std::size_t idx) {
        const int ix = static_cast<int>(idx % static_cast<size_t>(n));
        const int iy = static_cast<int>(idx / static_cast<size_t>(n));
        const auto [p, rho] = plane_point(spec, map.x_center(ix), map.y_center(iy));
        const CellClass c = count_stable_at(p, rho, tol);
        map.counts[idx] = c.stable;
        map.degenerate[idx] = c.degenerate ? 1 : 0;
    });

    // collect disagreeing neighbor pairs (right and up) in deterministic order
    std::vector<std::array<int, 4>> pairs;  // ix, iy, jx, jy
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const int c = map.count_at(ix, iy);
            bool disagrees = false;
            if (ix + 1 < n && map.count_at(ix + 1, iy) != c) {
                pairs.push_back({ix, iy, ix + 1, iy});
                disagrees = true;
            }
            if (iy + 1 < n && map.count_at(ix, iy + 1) != c) {
                pairs.push_back({ix, iy, ix, iy + 1});
                disagrees = true;
            }
            if (ix > 0 && map.count_at(ix - 1, iy) != c) disagrees = true;
            if (iy > 0 && map.count_at(ix, iy - 1) != c) disagrees = true;
            if (disagrees) map.boundary_cells.push_back({ix, iy});
        }
    }

    map.boundary_points.resize(pairs.size());
    parallel_for(pairs.size(), jobs, [&](std::size_t idx) {
        const auto [ix, iy, jx, jy] = pairs[idx];
        double ax = map.x_center(ix), ay = map.y_center(iy);
        double bx = map.x_center(jx), by = map.y_center(jy);
        const int ca = map.count_at(ix, iy);
        for (int d = 0; d < depth; ++d) {
            const double mx = 0.5 * (ax + bx), my = 0.5 * (ay + by);
            const auto [p, rho] = plane_point(spec, mx, my);
            if (count_stable_at(p, rho, tol).stable == ca) {
                ax = mx;
                ay = my;
            } else {
                bx = mx;
                by = my;
            }
        }
        map.boundary_points[idx] = {0.5 * (ax + bx), 0.5 * (ay + by)};
    });
    return map;
}

enum class BoundaryFamily { UnloadedLines, SymmetricSextics, None };

inline std::string to_string(BoundaryFamily f) {
    switch (f) {
        case BoundaryFamily::UnloadedLines: return "unloaded_lines";
        case BoundaryFamily::SymmetricSextics: return "symmetric_sextics";
        case BoundaryFamily::None: return "none";
    }
    return "?";
}

inline BoundaryFamily family_from_name(const std::string& name) {
    if (name == "unloaded_lines") return BoundaryFamily::UnloadedLines;
    if (name == "symmetric_sextics") return BoundaryFamily::SymmetricSextics;
    if (name == "none") return BoundaryFamily::None;
    throw std::invalid_argument("unknown boundary family: " + name);
}

struct ValidationReport {
    BoundaryFamily family = BoundaryFamily::None;
    int points = 0;
    bool has_residuals = false;
    double max_normalized = 0.0;
    double median_normalized = 0.0;
};

namespace detail {

/// |r| / ||grad r|| in plane coordinates, the first-order distance to r = 0.
template <class F>
double normalized_distance(const F& r, double x, double y, double hx, double hy) {
    const double v = r(x, y);
    const double gx = (r(x + hx, y) - r(x - hx, y)) / (2.0 * hx);
    const double gy = (r(x, y + hy) - r(x, y - hy)) / (2.0 * hy);
    const double g = std::hypot(gx, gy);
    if (g <= 0.0) return std::abs(v) > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return std::abs(v) / g;
}

}  // namespace detail

/// Distance statistics between refined boundary points and the named analytic
/// boundary family. Distances are |r|/||grad r|| to the nearest family curve,
/// evaluated through the plane mapping, so the statistic is in plane units.
inline ValidationReport validate_boundaries(const RegionMap& map, BoundaryFamily family) {
    ValidationReport rep;
    rep.family = family;
    rep.points = static_cast<int>(map.boundary_points.size());
    if (family == BoundaryFamily::None) return rep;
    rep.has_residuals = true;

    const double hx = 1e-6 * (map.spec.x_hi - map.spec.x_lo);
    const double hy = 1e-6 * (map.spec.y_hi - map.spec.y_lo);

    std::vector<std::function<double(double, double)>> curves;
    if (family == BoundaryFamily::UnloadedLines) {
        auto line = [&map](int which) {
            return [&map, which](double x, double y) {
                const auto [p, rho] = plane_point(map.spec, x, y);
                switch (which) {
                    case 0: return 2.0 * rho - p.l2 - p.l1;
                    case 1: return 2.0 * rho - p.l2 + p.l1;
                    default: return 2.0 * rho + p.l2 - p.l1;
                }
            };
        };
        curves.push_back(line(0));
        curves.push_back(line(1));
        curves.push_back(line(2));
    } else {
        auto sextic = [&map](SymmetricBoundary kind) {
            return [&map, kind](double x, double y) {
                const auto [p, rho] = plane_point(map.spec, x, y);
                return symmetric_boundary_residual(kind, p, rho);
            };
        };
        curves.push_back(sextic(SymmetricBoundary::Lower));
        curves.push_back(sextic(SymmetricBoundary::Upper));
    }

    std::vector<double> dists;
    dists.reserve(map.boundary_points.size());
    for (const auto& bp : map.boundary_points) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& c : curves)
            best = std::min(best, detail::normalized_distance(c, bp.x, bp.y, hx, hy));
        dists.push_back(best);
    }
    if (!dists.empty()) {
        rep.max_normalized = *std::max_element(dists.begin(), dists.end());
        std::nth_element(dists.begin(), dists.begin() + dists.size() / 2, dists.end());
        rep.median_normalized = dists[dists.size() / 2];
    }
    return rep;
}

/// Measured x-extent of the 2-count band in one grid row.
inline double two_count_width_row(const RegionMap& map, int iy) {
    int cells = 0;
    for (int ix = 0; ix < map.spec.resolution; ++ix)
        if (map.count_at(ix, iy) == 2) ++cells;
    return cells * map.dx();
}

/// Number of 4-connected components of cells holding exactly `value`.
inline int count_regions(const RegionMap& map, int value) {
    const int n = map.spec.resolution;
    std::vector<char> seen(static_cast<size_t>(n) * static_cast<size_t>(n), 0);
    int components = 0;
    std::vector<std::pair<int, int>> stack;
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const size_t idx = static_cast<size_t>(iy) * static_cast<size_t>(n) + static_cast<size_t>(ix);
            if (seen[idx] || map.count_at(ix, iy) != value) continue;
            ++components;
            stack.push_back({ix, iy});
            seen[idx] = 1;
            while (!stack.empty()) {
                const auto [cx, cy] = stack.back();
                stack.pop_back();
                const int nbr[4][2] = {{cx + 1, cy}, {cx - 1, cy}, {cx, cy + 1}, {cx, cy - 1}};
                for (const auto& nb : nbr) {
                    if (nb[0] < 0 || nb[0] >= n || nb[1] < 0 || nb[1] >= n) continue;
                    const size_t nidx = static_cast<size_t>(nb[1]) * static_cast<size_t>(n) +
                                        static_cast<size_t>(nb[0]);
                    if (seen[nidx] || map.count_at(nb[0], nb[1]) != value) continue;
                    seen[nidx] = 1;
                    stack.push_back({nb[0], nb[1]});
                }
            }
        }
    }
    return components;
}

/// Location of the tip of the 2-count region along a force-valued y axis: the
/// largest force row still containing a 2-count cell, bracketed by the first
/// row without one. Returns nothing if the region never appears or still
/// touches the top edge of the plane.
struct ForceExtremum {
    double f_lo = 0.0;   ///< y center of the last row with a 2-count cell
    double f_hi = 0.0;   ///< y center of the first row above it without one
    double rho_at = 0.0; ///< mean x center of the 2-count cells in that row
};

inline std::optional<ForceExtremum> two_count_force_extremum(const RegionMap& map) {
    if (map.spec.axis_y != PlaneAxis::F3 && map.spec.axis_y != PlaneAxis::F4)
        throw std::invalid_argument("force extremum requires a force on the y axis");
    const int n = map.spec.resolution;
    for (int iy = n - 1; iy >= 0; --iy) {
        double sum = 0.0;
        int cnt = 0;
        for (int ix = 0; ix < n; ++ix) {
            if (map.count_at(ix, iy) == 2) {
                sum += map.x_center(ix);
                ++cnt;
            }
        }
        if (cnt > 0) {
            if (iy == n - 1) return std::nullopt;
            return ForceExtremum{map.y_center(iy), map.y_center(iy + 1), sum / cnt};
        }
    }
    return std::nullopt;
}

/// Sweep a third parameter across `layers` values (cell-centered) and build
/// one plane map per layer. The volume helper integrates 2-count cells.
inline std::vector<RegionMap> map_stack(PlaneSpec plane, PlaneAxis axis_z, double z_lo, double z_hi,
                                        int layers, int depth = 0, int jobs = 1,
                                        const Tolerances& tol = {}) {
    if (axis_z == plane.axis_x || axis_z == plane.axis_y)
        throw std::invalid_argument("stack axis must differ from the plane axes");
    if (layers < 1 || !(z_lo < z_hi)) throw std::invalid_argument("bad stack axis range");
    std::vector<RegionMap> out;
    out.reserve(static_cast<size_t>(layers));
    const double dz = (z_hi - z_lo) / layers;
    for (int iz = 0; iz < layers; ++iz) {
        const double z = z_lo + (iz + 0.5) * dz;
        PlaneSpec s = plane;
        switch (axis_z) {
            case PlaneAxis::Rho: s.fixed_rho = z; break;
            case PlaneAxis::L2: s.fixed.l2 = z; break;
            case PlaneAxis::F3:
                s.fixed.f3 = z;
                if (s.tie_forces) s.fixed.f4 = z;
                break;
            case PlaneAxis::F4:
                s.fixed.f4 = z;
                if (s.tie_forces) s.fixed.f3 = z;
                break;
        }
        out.push_back(map_region(s, depth, jobs, tol));
    }
    return out;
}

/// Total volume of 2-count cells in a stack, in plane-area times z-step units.
inline double two_count_volume(const std::vector<RegionMap>& stack, double dz) {
    double v = 0.0;
    for (const auto& m : stack) {
        int cells = 0;
        for (int c : m.counts)
            if (c == 2) ++cells;
        v += cells * m.dx() * m.dy() * dz;
    }
    return v;
}

/// CSV export: fixed parameters as '#' comments, then one row per cell.
inline void write_csv(std::ostream& os, const RegionMap& map) {
    const auto& s = map.spec;
    char buf[256];
    auto put = [&](const char* key, double v) {
        std::snprintf(buf, sizeof(buf), "# %s %.12g\n", key, v);
        os << buf;
    };
    os << "# region map\n";
    os << "# axis_x " << to_string(s.axis_x) << "\n";
    os << "# axis_y " << to_string(s.axis_y) << "\n";
    put("l1", s.fixed.l1);
    if (s.axis_x != PlaneAxis::L2 && s.axis_y != PlaneAxis::L2) put("l2", s.fixed.l2);
    put("k", s.fixed.k);
    if (s.axis_x != PlaneAxis::F3 && s.axis_y != PlaneAxis::F3) put("f3", s.fixed.f3);
    if (s.axis_x != PlaneAxis::F4 && s.axis_y != PlaneAxis::F4) put("f4", s.fixed.f4);
    if (s.fixed.f3x != 0.0) put("f3x", s.fixed.f3x);
    if (s.fixed.f4x != 0.0) put("f4x", s.fixed.f4x);
    if (s.axis_x != PlaneAxis::Rho && s.axis_y != PlaneAxis::Rho) put("rho", s.fixed_rho);
    put("resolution", s.resolution);
    put("refinement_depth", map.refinement_depth);
    os << to_string(s.axis_x) << "," << to_string(s.axis_y) << ",count,degenerate\n";
    for (int iy = 0; iy < s.resolution; ++iy) {
        for (int ix = 0; ix < s.resolution; ++ix) {
            const size_t idx = static_cast<size_t>(iy) * static_cast<size_t>(s.resolution) +
                               static_cast<size_t>(ix);
            std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%d,%d\n", map.x_center(ix),
                          map.y_center(iy), map.counts[idx], static_cast<int>(map.degenerate[idx]));
            os << buf;
        }
    }
}

}  // namespace tensegrity
