#pragma once

// The verification suite: ten numbered checks covering solution counts,
// derivative correctness, boundary geometry, special-case agreement and
// branch-continuation phenomenology. Each check returns a pass/fail outcome
// with the measured values, so the same code backs both the acceptance test
// binary and the `verify` CLI command.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "tensegrity/continuation.hpp"
#include "tensegrity/oracle.hpp"
#include "tensegrity/parallel.hpp"
#include "tensegrity/region_map.hpp"
#include "tensegrity/solver.hpp"
#include "tensegrity/special_cases.hpp"

namespace tensegrity {

struct CriterionOutcome {
    int id = 0;
    std::string name;
    bool pass = false;
    double seconds = 0.0;
    std::string detail;
};

struct VerifyOptions {
    std::uint64_t seed = 20260823ull;
    int jobs = 1;
    std::string only;  ///< substring filter on criterion names; empty runs all
};

namespace detail {

inline std::string format(const char* fmt, ...) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof(buf), fmt, args);
    va_end(args);
    return buf;
}

inline double wrapped_gap(const Configuration& a, const Configuration& b) {
    return std::max(std::abs(std::remainder(a.theta1 - b.theta1, 2.0 * pi)),
                    std::abs(std::remainder(a.theta2 - b.theta2, 2.0 * pi)));
}

/// (0, hi] draw: complement of the half-open uniform sample.
inline double positive_uniform(std::mt19937_64& eng, double hi) {
    return hi * (1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(eng));
}

inline double uniform(std::mt19937_64& eng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(eng);
}

/// Central-difference Hessian built from the analytic gradient. Differencing
/// the gradient instead of the energy keeps round-off far below truncation at
/// h = 1e-4, which the quadratic-decay check needs.
inline SymMat2 fd_hessian_of_gradient(const MechanismParams& p, double rho,
                                      const Configuration& c, double h) {
    const auto g1p = gradient(p, rho, {c.theta1 + h, c.theta2});
    const auto g1m = gradient(p, rho, {c.theta1 - h, c.theta2});
    const auto g2p = gradient(p, rho, {c.theta1, c.theta2 + h});
    const auto g2m = gradient(p, rho, {c.theta1, c.theta2 - h});
    SymMat2 m;
    m.h11 = (g1p[0] - g1m[0]) / (2.0 * h);
    m.h22 = (g2p[1] - g2m[1]) / (2.0 * h);
    m.h12 = 0.5 * ((g1p[1] - g1m[1]) + (g2p[0] - g2m[0])) / (2.0 * h);
    return m;
}

inline int count_stable_strict(const std::vector<Equilibrium>& eqs) {
    int n = 0;
    for (const auto& e : eqs) n += e.stability == StabilityClass::Stable;
    return n;
}

inline bool any_degenerate(const std::vector<Equilibrium>& eqs) {
    for (const auto& e : eqs)
        if (e.stability == StabilityClass::Degenerate) return true;
    return false;
}

// ---- criterion bodies ------------------------------------------------------

inline void criterion_counts(const VerifyOptions& opt, CriterionOutcome& out) {
    const int n = 10000;
    struct Inst {
        MechanismParams p;
        double rho;
    };
    std::mt19937_64 eng(opt.seed * 1000003ull + 1);
    std::vector<Inst> inst(n);
    for (auto& i : inst) {
        i.p.l2 = positive_uniform(eng, 2.0);
        i.p.k = 100.0;
        i.p.f3 = uniform(eng, -10.0, 10.0);
        i.p.f4 = uniform(eng, -10.0, 10.0);
        i.rho = positive_uniform(eng, 2.0);
    }

    struct Slot {
        int count = -1;
        int stable = -1;
        bool degenerate = false;
        bool threw = false;
    };
    std::vector<Slot> res(n);
    parallel_for(static_cast<size_t>(n), opt.jobs, [&](size_t i) {
        try {
            const auto eqs = solve_equilibria(inst[i].p, inst[i].rho);
            res[i].count = static_cast<int>(eqs.size());
            res[i].stable = count_stable_strict(eqs);
            res[i].degenerate = any_degenerate(eqs);
        } catch (const DegenerateResultant&) {
            res[i].threw = true;
        }
    });

    int over_six = 0, over_two = 0, zero_ok = 0, zero_bad = 0, threw = 0, max_count = 0;
    int hist[3] = {0, 0, 0};
    for (const auto& r : res) {
        if (r.threw) {
            ++threw;
            continue;
        }
        max_count = std::max(max_count, r.count);
        if (r.count > 6) ++over_six;
        if (r.stable > 2) ++over_two;
        if (r.stable >= 1 && r.stable <= 2) ++hist[r.stable];
        if (r.stable == 0) (r.degenerate ? zero_ok : zero_bad) += 1;
    }
    out.pass = over_six == 0 && over_two == 0 && zero_bad == 0 && threw == 0;
    out.detail = format(
        "n=%d max_count=%d stable{1:%d 2:%d} zero_on_boundary=%d zero_elsewhere=%d "
        ">6:%d >2stable:%d solver_failures=%d",
        n, max_count, hist[1], hist[2], zero_ok, zero_bad, over_six, over_two, threw);
}

inline void criterion_derivatives(const VerifyOptions& opt, CriterionOutcome& out) {
    const int n = 1000;
    std::mt19937_64 eng(opt.seed * 1000003ull + 2);
    double se_g[2] = {0.0, 0.0}, se_h[2] = {0.0, 0.0};
    const double hs[2] = {1e-3, 1e-4};
    for (int i = 0; i < n; ++i) {
        MechanismParams p;
        p.l2 = uniform(eng, 0.05, 2.0);
        p.k = 100.0;
        p.f3 = uniform(eng, -10.0, 10.0);
        p.f4 = uniform(eng, -10.0, 10.0);
        p.f3x = uniform(eng, -10.0, 10.0);
        p.f4x = uniform(eng, -10.0, 10.0);
        const double rho = uniform(eng, 0.05, 2.0);
        const Configuration c{uniform(eng, -pi, pi), uniform(eng, -pi, pi)};
        const auto ga = gradient(p, rho, c);
        const SymMat2 ha = hessian(p, rho, c);
        for (int s = 0; s < 2; ++s) {
            const auto gf = fd_gradient(p, rho, c, hs[s]);
            const double eg = std::max(std::abs(gf[0] - ga[0]), std::abs(gf[1] - ga[1]));
            const SymMat2 hf = fd_hessian_of_gradient(p, rho, c, hs[s]);
            const double eh = std::max({std::abs(hf.h11 - ha.h11), std::abs(hf.h22 - ha.h22),
                                        std::abs(hf.h12 - ha.h12)});
            se_g[s] += eg * eg;
            se_h[s] += eh * eh;
        }
    }
    const double ratio_g = std::sqrt(se_g[0] / se_g[1]);
    const double ratio_h = std::sqrt(se_h[0] / se_h[1]);
    const auto ok = [](double r) { return r >= 80.0 && r <= 120.0; };
    out.pass = ok(ratio_g) && ok(ratio_h);
    out.detail = format("n=%d gradient_decay_ratio=%.2f hessian_decay_ratio=%.2f (want 100+-20)",
                        n, ratio_g, ratio_h);
}

inline void criterion_unloaded_map(const VerifyOptions& opt, CriterionOutcome& out) {
    PlaneSpec s;
    s.axis_x = PlaneAxis::Rho;
    s.axis_y = PlaneAxis::L2;
    s.x_lo = 0.01;
    s.x_hi = 2.0;
    s.y_lo = 0.01;
    s.y_hi = 2.0;
    s.resolution = 400;
    s.fixed.k = 100.0;
    const RegionMap map = map_region(s, 4, opt.jobs);
    const auto rep = validate_boundaries(map, BoundaryFamily::UnloadedLines);
    const double cell = map.dx();

    double worst_dev = 0.0;
    int rows = 0;
    for (int iy = 0; iy < s.resolution; ++iy) {
        const double l2 = map.y_center(iy);
        if (l2 < 1.05 || l2 > 2.0) continue;
        ++rows;
        worst_dev = std::max(worst_dev, std::abs(two_count_width_row(map, iy) - 1.0));
    }
    out.pass = rep.has_residuals && rep.max_normalized < 2.0 * cell && rows > 0 &&
               worst_dev <= 0.01;
    out.detail = format(
        "res=400 depth=4 boundary_pts=%d max_dist=%.3f cells (limit 2) width_rows=%d "
        "worst|drho-1|=%.4f (limit 0.01)",
        rep.points, rep.max_normalized / cell, rows, worst_dev);
}

inline void criterion_parallelogram(const VerifyOptions& opt, CriterionOutcome& out) {
    const int n = 1000;
    std::mt19937_64 eng(opt.seed * 1000003ull + 4);
    int bad_geom = 0, bad_count = 0;
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        MechanismParams p;
        p.k = uniform(eng, 1.0, 200.0);
        do {
            p.l2 = positive_uniform(eng, 2.0);
        } while (std::abs(p.l2 - p.l1) < 1e-3);
        const double w_lo = 0.5 * std::abs(p.l1 - p.l2);
        const double w_hi = 0.5 * (p.l1 + p.l2);
        const double rho = w_lo + (w_hi - w_lo) * uniform(eng, 0.01, 0.99);

        int crossed = 0;
        for (const auto& e : solve_unloaded(p, rho)) {
            if (std::abs(std::sin(e.config.theta1)) < 1e-3) continue;  // flat shapes
            ++crossed;
            const Vec2 a3 = node_a3(p, e.config);
            const Vec2 a4 = node_a4(p, rho, e.config);
            const double dev = std::max(std::abs(a3.y - a4.y), std::abs(a3.x - a4.x - rho));
            worst = std::max(worst, dev);
            if (dev >= 1e-10) ++bad_geom;
        }
        if (crossed != 2) ++bad_count;
    }
    out.pass = bad_geom == 0 && bad_count == 0;
    out.detail = format("n=%d worst_deviation=%.2e (limit 1e-10) non_pair_instances=%d", n,
                        worst, bad_count);
}

inline void criterion_symmetric_instability(const VerifyOptions& opt, CriterionOutcome& out) {
    const int wanted = 1000;
    std::mt19937_64 eng(opt.seed * 1000003ull + 5);
    int found = 0, attempts = 0, nonneg = 0, pairs = 0;
    double closest = -1e300;  // largest det seen; all must stay below zero
    while (found < wanted && attempts < 100000) {
        ++attempts;
        MechanismParams p;
        p.l1 = p.l2 = uniform(eng, 0.1, 2.0);
        p.k = 100.0;
        p.f3 = p.f4 = uniform(eng, -10.0, 10.0);
        const double rho = uniform(eng, 0.05, 2.0);
        std::vector<const Equilibrium*> distinct;
        std::vector<Equilibrium> eqs;
        try {
            eqs = solve_symmetric(p, rho);
        } catch (const DegenerateResultant&) {
            continue;
        }
        for (const auto& e : eqs)
            if (std::abs(std::remainder(e.config.theta1 - e.config.theta2, 2.0 * pi)) > 1e-6)
                distinct.push_back(&e);
        if (distinct.empty()) continue;
        ++found;
        for (const auto* e : distinct) {
            ++pairs;
            closest = std::max(closest, e->det_h);
            if (!(e->det_h < 0.0)) ++nonneg;
        }
    }
    out.pass = found == wanted && nonneg == 0;
    out.detail = format("instances=%d (of %d draws) asymmetric_solutions=%d det_h_max=%.3e "
                        "nonnegative=%d",
                        found, attempts, pairs, closest, nonneg);
}

inline void criterion_symmetric_sextics(const VerifyOptions& opt, CriterionOutcome& out) {
    PlaneSpec s;
    s.axis_x = PlaneAxis::Rho;
    s.axis_y = PlaneAxis::F4;
    s.x_lo = 0.01;
    s.x_hi = 2.0;
    s.y_lo = -10.0;
    s.y_hi = 10.0;
    s.resolution = 400;
    s.fixed.k = 100.0;
    s.tie_forces = true;
    const RegionMap map = map_region(s, 4, opt.jobs);
    const auto rep = validate_boundaries(map, BoundaryFamily::SymmetricSextics);
    const double cell = std::max(map.dx(), map.dy());
    out.pass = rep.has_residuals && rep.points > 0 && rep.max_normalized < 2.0 * cell;
    out.detail = format("res=400 depth=4 boundary_pts=%d max_dist=%.3f cells (limit 2) "
                        "median=%.3f cells",
                        rep.points, rep.max_normalized / cell, rep.median_normalized / cell);
}

inline void criterion_reference_points(const VerifyOptions&, CriterionOutcome& out) {
    struct Case {
        double l2, rho, f;
        int stable;
    };
    const Case cases[] = {
        {1.5, 1.0, 0.0, 2},  {1.0, 0.75, -10.0, 2}, {1.0, 0.75, 10.0, 2}, {1.0, 0.2, -10.0, 1},
        {1.0, 1.5, -10.0, 1}, {1.5, 0.7, -10.0, 2},  {1.5, 1.5, -10.0, 1},
    };
    out.pass = true;
    std::string got;
    for (const auto& c : cases) {
        MechanismParams p;
        p.l2 = c.l2;
        p.k = 100.0;
        p.f3 = p.f4 = c.f;
        const int stable = count_stable_strict(solve_equilibria(p, c.rho));
        if (stable != c.stable) out.pass = false;
        got += format("%s%d", got.empty() ? "" : ",", stable);
    }
    out.detail = format("stable counts [%s] want [2,2,2,1,1,2,1]", got.c_str());
}

inline void criterion_oracle_equivalence(const VerifyOptions& opt, CriterionOutcome& out) {
    std::mt19937_64 eng(opt.seed * 1000003ull + 8);

    // two solution lists agree: same size, matched angles, same stability
    const auto lists_agree = [](const std::vector<Equilibrium>& a,
                                const std::vector<Equilibrium>& b, double tol_angle) {
        if (a.size() != b.size()) return false;
        std::vector<char> used(b.size(), 0);
        for (const auto& ea : a) {
            bool hit = false;
            for (size_t j = 0; j < b.size() && !hit; ++j) {
                if (used[j]) continue;
                if (wrapped_gap(ea.config, b[j].config) < tol_angle &&
                    ea.stability == b[j].stability) {
                    used[j] = 1;
                    hit = true;
                }
            }
            if (!hit) return false;
        }
        return true;
    };

    int sym_bad = 0, unl_bad = 0;
    for (int i = 0; i < 200; ++i) {
        MechanismParams p;
        p.l1 = p.l2 = uniform(eng, 0.2, 2.0);
        p.k = 100.0;
        p.f3 = p.f4 = uniform(eng, -10.0, 10.0);
        const double rho = uniform(eng, 0.1, 1.9);
        std::vector<Equilibrium> a, b;
        try {
            a = solve_symmetric(p, rho);
            b = solve_equilibria(p, rho);
        } catch (const DegenerateResultant&) {
            --i;
            continue;
        }
        if (any_degenerate(a) || any_degenerate(b)) {
            --i;  // boundary instance: counts are tolerance-dependent there
            continue;
        }
        if (!lists_agree(a, b, 1e-8)) ++sym_bad;
    }
    for (int i = 0; i < 200; ++i) {
        MechanismParams p;
        p.k = uniform(eng, 10.0, 200.0);
        p.l2 = uniform(eng, 0.2, 2.0);
        const double rho = uniform(eng, 0.1, 1.9);
        std::vector<Equilibrium> a, b;
        try {
            a = solve_unloaded(p, rho);
            b = solve_equilibria(p, rho);
        } catch (const DegenerateResultant&) {
            --i;
            continue;
        }
        if (any_degenerate(a) || any_degenerate(b)) {
            --i;
            continue;
        }
        if (!lists_agree(a, b, 1e-8)) ++unl_bad;
    }

    // stable sets against the energy-grid oracle
    int grid_bad = 0;
    double worst_gap = 0.0;
    OracleOptions oopt;
    oopt.grid = 400;
    oopt.refine_iters = 80;
    for (int i = 0; i < 50; ++i) {
        MechanismParams p;
        p.l2 = uniform(eng, 0.2, 2.0);
        p.k = 100.0;
        p.f3 = uniform(eng, -10.0, 10.0);
        p.f4 = uniform(eng, -10.0, 10.0);
        const double rho = uniform(eng, 0.1, 1.9);
        std::vector<Equilibrium> eqs;
        try {
            eqs = solve_equilibria(p, rho);
        } catch (const DegenerateResultant&) {
            --i;
            continue;
        }
        if (any_degenerate(eqs)) {
            --i;
            continue;
        }
        std::vector<Configuration> stable;
        for (const auto& e : eqs)
            if (e.stability == StabilityClass::Stable) stable.push_back(e.config);
        const auto minima = oracle_local_minima(p, rho, oopt);
        if (stable.size() != minima.size()) {
            ++grid_bad;
            continue;
        }
        for (const auto& m : minima) {
            double best = 1e300;
            for (const auto& s : stable)
                best = std::min(best, wrapped_gap(s, m));
            worst_gap = std::max(worst_gap, best);
            if (best >= 1e-6) ++grid_bad;
        }
    }

    out.pass = sym_bad == 0 && unl_bad == 0 && grid_bad == 0;
    out.detail = format("symmetric_mismatches=%d/200 unloaded_mismatches=%d/200 "
                        "grid_mismatches=%d/50 worst_minimum_gap=%.2e (limit 1e-6)",
                        sym_bad, unl_bad, grid_bad, worst_gap);
}

inline void criterion_continuation(const VerifyOptions& opt, CriterionOutcome& out) {
    const double lo = 0.01, hi = 2.0;
    const int steps = 400;
    const double window = 10.0 * (hi - lo) / steps;

    MechanismParams p;
    p.k = 100.0;
    p.f3 = p.f4 = 5.0;
    const TraceResult tr = trace_branches(p, lo, hi, steps, {}, opt.jobs);

    const Branch* neg = nullptr;
    for (const auto& b : tr.branches)
        for (const auto& ev : b.events)
            if (ev.kind == EventKind::StabilityChange) neg = &b;
    double c1 = 0.0, c2 = 0.0;
    bool c1_is_bp = false, c2_is_fold = false;
    if (neg) {
        for (const auto& ev : neg->events) {
            if (ev.kind == EventKind::StabilityChange) c1 = ev.rho;
            if (ev.kind == EventKind::Terminated) c2 = ev.rho;
        }
        try {
            const auto lo_rep = classify_endpoint(tr.branches, c1, window, p);
            c1_is_bp = lo_rep.kind == EventKind::BranchPoint;
            c1 = lo_rep.rho_refined;
            const auto hi_rep = classify_endpoint(tr.branches, c2, window, p);
            c2_is_fold = hi_rep.kind == EventKind::Fold;
            c2 = hi_rep.rho_refined;
        } catch (const InsufficientData&) {
        }
    }

    MechanismParams pd = p;
    pd.l2 = 1.05;
    const TraceResult td = trace_branches(pd, lo, hi, steps, {}, opt.jobs);
    const Branch* island = nullptr;
    for (const auto& b : td.branches) {
        bool all_stable = true;
        for (const auto& pt : b.points) all_stable &= pt.stability == StabilityClass::Stable;
        if (all_stable && b.rho_min() > lo + 0.05 && b.rho_max() < hi - 0.05) island = &b;
    }
    double d1 = 0.0, d2 = 0.0;
    bool both_folds = false;
    if (island && island->events.size() == 2) {
        try {
            const auto a = classify_endpoint(td.branches, island->events[0].rho, window, pd);
            const auto b = classify_endpoint(td.branches, island->events[1].rho, window, pd);
            both_folds = a.kind == EventKind::Fold && b.kind == EventKind::Fold;
            d1 = a.rho_refined;
            d2 = b.rho_refined;
        } catch (const InsufficientData&) {
        }
    }

    out.pass = neg != nullptr && c1_is_bp && c2_is_fold && island != nullptr && both_folds;
    out.detail = format("l2=1: C1=%.9f (%s) C2=%.9f (%s); l2=1.05: %.9f and %.9f (%s)",
                        c1, c1_is_bp ? "branch_point" : "NOT branch_point", c2,
                        c2_is_fold ? "fold" : "NOT fold", d1, d2,
                        both_folds ? "both folds" : "NOT both folds");
}

inline void criterion_volume_monotonicity(const VerifyOptions& opt, CriterionOutcome& out) {
    const int res = 50;
    auto volume_at = [&](double l2) {
        PlaneSpec s;
        s.axis_x = PlaneAxis::Rho;
        s.axis_y = PlaneAxis::F3;
        s.x_lo = 0.01;
        s.x_hi = 2.0;
        s.y_lo = -10.0;
        s.y_hi = 10.0;
        s.resolution = res;
        s.fixed.l2 = l2;
        s.fixed.k = 100.0;
        const auto stack = map_stack(s, PlaneAxis::F4, -10.0, 10.0, res, 0, opt.jobs);
        return two_count_volume(stack, 20.0 / res);
    };
    const double v_half = volume_at(0.5);
    const double v_one = volume_at(1.0);
    const double v_three_half = volume_at(1.5);
    out.pass = v_half < v_one && v_one < v_three_half;
    out.detail = format("2-count volume: l2=0.5: %.3f < l2=1: %.3f < l2=1.5: %.3f", v_half,
                        v_one, v_three_half);
}

}  // namespace detail

/// Run the acceptance checks (optionally a name-filtered subset), streaming
/// one PASS/FAIL line per criterion to `os`. Returns the outcomes.
inline std::vector<CriterionOutcome> run_acceptance(const VerifyOptions& opt, std::ostream& os) {
    struct Entry {
        int id;
        const char* name;
        void (*fn)(const VerifyOptions&, CriterionOutcome&);
        double budget;  // seconds; 0 = no stated budget
    };
    const Entry entries[] = {
        {1, "solution-count-bound", detail::criterion_counts, 60.0},
        {2, "derivative-quadratic-decay", detail::criterion_derivatives, 5.0},
        {3, "unloaded-boundary-lines", detail::criterion_unloaded_map, 300.0},
        {4, "unloaded-parallelogram", detail::criterion_parallelogram, 0.0},
        {5, "symmetric-asymmetric-instability", detail::criterion_symmetric_instability, 0.0},
        {6, "symmetric-boundary-sextics", detail::criterion_symmetric_sextics, 0.0},
        {7, "reference-point-counts", detail::criterion_reference_points, 0.0},
        {8, "oracle-equivalence", detail::criterion_oracle_equivalence, 180.0},
        {9, "continuation-events", detail::criterion_continuation, 120.0},
        {10, "region-volume-monotonicity", detail::criterion_volume_monotonicity, 900.0},
    };

    std::vector<CriterionOutcome> results;
    for (const auto& e : entries) {
        if (!opt.only.empty() && std::string(e.name).find(opt.only) == std::string::npos)
            continue;
        CriterionOutcome r;
        r.id = e.id;
        r.name = e.name;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            e.fn(opt, r);
        } catch (const std::exception& ex) {
            r.pass = false;
            r.detail = std::string("exception: ") + ex.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (e.budget > 0.0 && r.seconds >= e.budget) {
            r.pass = false;
            r.detail += detail::format(" [over %.0fs budget]", e.budget);
        }
        os << detail::format("%-4s %2d %-33s %7.1fs  %s\n", r.pass ? "PASS" : "FAIL", r.id,
                             r.name.c_str(), r.seconds, r.detail.c_str());
        os.flush();
        results.push_back(std::move(r));
    }
    return results;
}

inline bool all_passed(const std::vector<CriterionOutcome>& results) {
    if (results.empty()) return false;
    for (const auto& r : results)
        if (!r.pass) return false;
    return true;
}

}  // namespace tensegrity
