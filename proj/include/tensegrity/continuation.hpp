#pragma once

// Branch tracing over the actuator input: solve from scratch at each rho
// sample, match solutions to branches by nearest neighbor in wrapped angle
// distance, and refine branch endpoints by bisection. Sweep-and-match keeps
// disconnected branches, which predictor-corrector following would miss.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "tensegrity/mechanism.hpp"
#include "tensegrity/parallel.hpp"
#include "tensegrity/solver.hpp"

namespace tensegrity {

enum class EventKind { Fold, BranchPoint, StabilityChange, Terminated };

inline const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::Fold: return "fold";
        case EventKind::BranchPoint: return "branch_point";
        case EventKind::StabilityChange: return "stability_change";
        case EventKind::Terminated: return "terminated";
    }
    return "?";
}

inline EventKind event_kind_from_name(const std::string& name) {
    if (name == "fold") return EventKind::Fold;
    if (name == "branch_point") return EventKind::BranchPoint;
    if (name == "stability_change") return EventKind::StabilityChange;
    if (name == "terminated") return EventKind::Terminated;
    throw std::invalid_argument("unknown event kind: " + name);
}

struct BranchEvent {
    double rho = 0.0;
    EventKind kind = EventKind::Terminated;
};

/// One connected equilibrium curve. Points are ordered by rho; a Terminated
/// event marks a refined endpoint where the solution ceases to exist (on
/// either side), and StabilityChange marks a refined stability flip.
struct Branch {
    int id = 0;
    std::vector<Equilibrium> points;
    std::vector<BranchEvent> events;

    double rho_min() const { return points.front().rho; }
    double rho_max() const { return points.back().rho; }
};

struct TraceResult {
    std::vector<Branch> branches;
    std::vector<double> gaps;  ///< samples where the solver failed; sweep continues past them
    double rho_lo = 0.0, rho_hi = 0.0;
    int steps = 0;
};

struct InsufficientData : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline double config_distance(const Configuration& a, const Configuration& b) {
    const double d1 = std::remainder(a.theta1 - b.theta1, 2.0 * pi);
    const double d2 = std::remainder(a.theta2 - b.theta2, 2.0 * pi);
    return std::max(std::abs(d1), std::abs(d2));
}

/// Estimated angular speed |dtheta/drho| from the last two points, with the
/// 1 rad per unit rho floor that keeps the matching radius meaningful when a
/// branch is new or flat.
inline double branch_speed(const Branch& b) {
    double speed = 1.0;
    const size_t n = b.points.size();
    if (n >= 2) {
        const auto& p = b.points[n - 2];
        const auto& q = b.points[n - 1];
        const double dr = q.rho - p.rho;
        if (dr > 0.0) speed = std::max(speed, config_distance(p.config, q.config) / dr);
    }
    return speed;
}

inline std::optional<std::vector<Equilibrium>> try_solve(const MechanismParams& p, double rho,
                                                         const Tolerances& tol) {
    try {
        return solve_equilibria(p, rho, tol);
    } catch (const DegenerateResultant&) {
        return std::nullopt;
    }
}

inline std::optional<Equilibrium> nearest_within(const std::vector<Equilibrium>& sols,
                                                 const Configuration& c, double radius) {
    const Equilibrium* best = nullptr;
    double best_d = radius;
    for (const auto& s : sols) {
        const double d = config_distance(s.config, c);
        if (d <= best_d) {
            best_d = d;
            best = &s;
        }
    }
    if (!best) return std::nullopt;
    return *best;
}

/// Matching radius over a rho gap dr. One-point branches have no usable speed
/// estimate, and solutions born at a fold move like sqrt(rho - rho*), so they
/// get a flat angular allowance instead; nearest-first assignment keeps the
/// generous radius from bridging unrelated branches.
inline double match_radius(const Branch& b, double dr) {
    double r = 5.0 * dr * branch_speed(b);
    if (b.points.size() < 2) r = std::max(r, 0.35);
    return r;
}

/// Wrapped linear interpolation of a branch's configuration at rho, if the
/// branch brackets it.
inline std::optional<Configuration> interp_config(const Branch& b, double rho) {
    for (size_t i = 0; i + 1 < b.points.size(); ++i) {
        const auto& p = b.points[i];
        const auto& q = b.points[i + 1];
        if (p.rho <= rho && rho <= q.rho && q.rho > p.rho) {
            const double w = (rho - p.rho) / (q.rho - p.rho);
            return Configuration{
                p.config.theta1 + w * std::remainder(q.config.theta1 - p.config.theta1, 2.0 * pi),
                p.config.theta2 + w * std::remainder(q.config.theta2 - p.config.theta2, 2.0 * pi)};
        }
    }
    return std::nullopt;
}

}  // namespace detail

/// Trace all equilibrium branches over [rho_lo, rho_hi] using steps+1 evenly
/// spaced samples. Matching radius is 5 * (local step) * branch speed; lost
/// branches and mid-sweep births are bisected to 1e-6 in rho and marked with
/// a Terminated event at the refined endpoint.
inline TraceResult trace_branches(const MechanismParams& params, double rho_lo, double rho_hi,
                                  int steps, const Tolerances& tol = {}, int jobs = 1) {
    check_params(params);
    if (!(rho_lo > 0.0) || !(rho_hi > rho_lo))
        throw std::invalid_argument("rho range must satisfy 0 < lo < hi");
    if (steps < 2) throw std::invalid_argument("need at least 2 sweep steps");

    TraceResult out;
    out.rho_lo = rho_lo;
    out.rho_hi = rho_hi;
    out.steps = steps;

    const double h = (rho_hi - rho_lo) / steps;
    std::vector<std::optional<std::vector<Equilibrium>>> samples(static_cast<size_t>(steps) + 1);
    parallel_for(samples.size(), jobs, [&](std::size_t i) {
        samples[i] = detail::try_solve(params, rho_lo + static_cast<double>(i) * h, tol);
    });

    auto solve_at = [&](double rho) { return detail::try_solve(params, rho, tol); };

    std::vector<int> alive;  // branch indices still being continued

    // Nearest solution to ref within radius that is not better explained by
    // another branch passing through the probe rho. Without the second check a
    // dying branch bisected near a coalescence would latch onto its surviving
    // partner and overshoot the true endpoint.
    auto pick_match = [&](const std::vector<Equilibrium>& sols, const Configuration& ref,
                          double radius, double mid,
                          const std::vector<int>& others) -> std::optional<Equilibrium> {
        const Equilibrium* best = nullptr;
        double best_d = radius;
        for (const auto& s : sols) {
            const double d = detail::config_distance(s.config, ref);
            if (d > best_d) continue;
            bool foreign = false;
            for (int oi : others) {
                if (auto c = detail::interp_config(out.branches[static_cast<size_t>(oi)], mid)) {
                    if (detail::config_distance(s.config, *c) < d) {
                        foreign = true;
                        break;
                    }
                }
            }
            if (foreign) continue;
            best = &s;
            best_d = d;
        }
        if (!best) return std::nullopt;
        return *best;
    };

    // Bisect the upper endpoint of a dying branch between its last point and
    // rho_fail, appending the matched tail so the curve reaches the endpoint.
    auto terminate_up = [&](Branch& b, double rho_fail, const std::vector<int>& others) {
        double lo = b.points.back().rho;
        double hi = rho_fail;
        int it = 0;
        while (hi - lo > 1e-6 && it++ < 80) {
            const double mid = 0.5 * (lo + hi);
            const auto sols = solve_at(mid);
            bool matched = false;
            if (sols) {
                const double radius = detail::match_radius(b, mid - b.points.back().rho);
                if (auto m = pick_match(*sols, b.points.back().config, radius, mid, others)) {
                    Equilibrium e = *m;
                    e.branch_tag = b.id;
                    b.points.push_back(e);
                    matched = true;
                }
            }
            if (matched)
                lo = mid;
            else
                hi = mid;
        }
        b.events.push_back({0.5 * (lo + hi), EventKind::Terminated});
    };

    // Bisect the birth point of a branch first seen mid-sweep, prepending the
    // matched head, so folds opening upward also carry a refined endpoint.
    auto refine_birth = [&](Branch& b, double rho_absent, const std::vector<int>& others) {
        double lo = rho_absent;
        double hi = b.points.front().rho;
        std::vector<Equilibrium> head;  // collected downward, reversed on insert
        auto speed = [&]() {
            const Equilibrium* a = nullptr;
            const Equilibrium* c = nullptr;
            if (head.size() >= 2) {
                a = &head[head.size() - 1];
                c = &head[head.size() - 2];
            } else if (head.size() == 1) {
                a = &head[0];
                c = &b.points.front();
            } else if (b.points.size() >= 2) {
                a = &b.points[0];
                c = &b.points[1];
            }
            if (!a) return 1.0;
            const double dr = std::abs(c->rho - a->rho);
            if (dr <= 0.0) return 1.0;
            return std::max(1.0, detail::config_distance(a->config, c->config) / dr);
        };
        int it = 0;
        while (hi - lo > 1e-6 && it++ < 80) {
            const double mid = 0.5 * (lo + hi);
            const auto sols = solve_at(mid);
            bool matched = false;
            if (sols) {
                const Equilibrium& front = head.empty() ? b.points.front() : head.back();
                const double radius = 5.0 * (front.rho - mid) * speed();
                if (auto m = pick_match(*sols, front.config, radius, mid, others)) {
                    Equilibrium e = *m;
                    e.branch_tag = b.id;
                    head.push_back(e);
                    matched = true;
                }
            }
            if (matched)
                hi = mid;
            else
                lo = mid;
        }
        std::reverse(head.begin(), head.end());
        b.points.insert(b.points.begin(), head.begin(), head.end());
        b.events.push_back({0.5 * (lo + hi), EventKind::Terminated});
    };

    // Joint birth refinement for solutions appearing together: a fold (or a
    // pair of branch-point legs) creates at least two nearby solutions at
    // once, so presence below is tested as "at least two solutions near the
    // group centroid". A single surviving neighbor, like the branch passing
    // through a pitchfork, does not count, which stops the bisection from
    // walking past the true birth.
    auto refine_birth_cluster = [&](const std::vector<int>& ids, double rho_absent) {
        double lo = rho_absent;
        double hi = out.branches[static_cast<size_t>(ids[0])].points.front().rho;
        std::vector<std::vector<Equilibrium>> heads(ids.size());
        auto front_of = [&](size_t j) -> const Equilibrium& {
            return heads[j].empty() ? out.branches[static_cast<size_t>(ids[j])].points.front()
                                    : heads[j].back();
        };
        auto centroid = [&]() {
            Configuration m = front_of(0).config;
            double s1 = 0.0, s2 = 0.0;
            for (size_t j = 1; j < ids.size(); ++j) {
                s1 += std::remainder(front_of(j).config.theta1 - m.theta1, 2.0 * pi);
                s2 += std::remainder(front_of(j).config.theta2 - m.theta2, 2.0 * pi);
            }
            m.theta1 += s1 / static_cast<double>(ids.size());
            m.theta2 += s2 / static_cast<double>(ids.size());
            return m;
        };
        int it = 0;
        while (hi - lo > 1e-6 && it++ < 80) {
            const double mid = 0.5 * (lo + hi);
            const auto sols = solve_at(mid);
            bool present = false;
            if (sols) {
                const Configuration m = centroid();
                double spread = 0.0;
                for (size_t j = 0; j < ids.size(); ++j)
                    spread = std::max(spread, detail::config_distance(front_of(j).config, m));
                const double radius = std::max(1.5 * spread, 0.02);
                std::vector<const Equilibrium*> near;
                for (const auto& s : *sols)
                    if (detail::config_distance(s.config, m) <= radius) near.push_back(&s);
                if (near.size() >= 2) {
                    struct Cand {
                        double dist;
                        size_t j, s;
                    };
                    std::vector<Cand> cands;
                    for (size_t j = 0; j < ids.size(); ++j)
                        for (size_t s = 0; s < near.size(); ++s)
                            cands.push_back(
                                {detail::config_distance(front_of(j).config, near[s]->config), j, s});
                    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
                        if (a.dist != b.dist) return a.dist < b.dist;
                        if (a.j != b.j) return a.j < b.j;
                        return a.s < b.s;
                    });
                    std::vector<char> jt(ids.size(), 0), st(near.size(), 0);
                    int assigned = 0;
                    for (const auto& c : cands) {
                        if (jt[c.j] || st[c.s]) continue;
                        jt[c.j] = 1;
                        st[c.s] = 1;
                        Equilibrium e = *near[c.s];
                        e.branch_tag = ids[c.j];
                        heads[c.j].push_back(e);
                        ++assigned;
                    }
                    present = assigned >= 2;
                }
            }
            if (present)
                hi = mid;
            else
                lo = mid;
        }
        const double ev_rho = 0.5 * (lo + hi);
        for (size_t j = 0; j < ids.size(); ++j) {
            Branch& b = out.branches[static_cast<size_t>(ids[j])];
            std::reverse(heads[j].begin(), heads[j].end());
            b.points.insert(b.points.begin(), heads[j].begin(), heads[j].end());
            b.events.push_back({ev_rho, EventKind::Terminated});
        }
    };

    // Locate a stability flip between the branch tail and a newly matched
    // point; the probe follows the nearest solution to the last accepted one.
    auto refine_flip = [&](const Branch& b, const Equilibrium& next) {
        double lo = b.points.back().rho;
        double hi = next.rho;
        Configuration ref = b.points.back().config;
        const StabilityClass s_lo = b.points.back().stability;
        int it = 0;
        while (hi - lo > 1e-6 && it++ < 80) {
            const double mid = 0.5 * (lo + hi);
            const auto sols = solve_at(mid);
            if (!sols) {
                hi = mid;
                continue;
            }
            const auto m = detail::nearest_within(*sols, ref, 1e30);
            if (!m) {
                hi = mid;
                continue;
            }
            if (m->stability == s_lo) {
                lo = mid;
                ref = m->config;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    };

    double last_good_rho = -1.0;
    for (int i = 0; i <= steps; ++i) {
        const double rho = rho_lo + static_cast<double>(i) * h;
        const auto& sols_opt = samples[static_cast<size_t>(i)];
        if (!sols_opt) {
            out.gaps.push_back(rho);
            continue;
        }
        const auto& sols = *sols_opt;

        // candidate matches, closest pairs first; ties resolved by index order
        struct Cand {
            double dist;
            int branch, sol;
        };
        std::vector<Cand> cands;
        for (int bi : alive) {
            const Branch& b = out.branches[static_cast<size_t>(bi)];
            const double radius = detail::match_radius(b, rho - b.points.back().rho);
            for (size_t si = 0; si < sols.size(); ++si) {
                const double d = detail::config_distance(sols[si].config, b.points.back().config);
                if (d <= radius) cands.push_back({d, bi, static_cast<int>(si)});
            }
        }
        std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
            if (a.dist != b.dist) return a.dist < b.dist;
            if (a.branch != b.branch) return a.branch < b.branch;
            return a.sol < b.sol;
        });

        std::vector<int> sol_branch(sols.size(), -1);
        std::vector<char> branch_matched(out.branches.size(), 0);
        for (const auto& c : cands) {
            if (branch_matched[static_cast<size_t>(c.branch)] || sol_branch[static_cast<size_t>(c.sol)] >= 0)
                continue;
            branch_matched[static_cast<size_t>(c.branch)] = 1;
            sol_branch[static_cast<size_t>(c.sol)] = c.branch;
        }

        std::vector<int> next_alive;
        std::vector<int> dying;
        for (int bi : alive) {
            if (branch_matched[static_cast<size_t>(bi)])
                next_alive.push_back(bi);
            else
                dying.push_back(bi);
        }

        std::vector<int> born;
        for (size_t si = 0; si < sols.size(); ++si) {
            if (sol_branch[si] >= 0) {
                Branch& b = out.branches[static_cast<size_t>(sol_branch[si])];
                Equilibrium e = sols[si];
                e.branch_tag = b.id;
                if (e.stability != b.points.back().stability)
                    b.events.push_back({refine_flip(b, e), EventKind::StabilityChange});
                b.points.push_back(e);
            } else {
                Branch b;
                const int id = static_cast<int>(out.branches.size());
                b.id = id;
                Equilibrium e = sols[si];
                e.branch_tag = id;
                b.points.push_back(e);
                out.branches.push_back(std::move(b));
                born.push_back(id);
            }
        }

        // endpoint refinement happens after survivors were extended to the
        // current rho, so probes can tell their solutions apart from ours
        for (int bi : dying) terminate_up(out.branches[static_cast<size_t>(bi)], rho, next_alive);

        if (last_good_rho >= 0.0 && !born.empty()) {
            // group simultaneous births by proximity; coalescing partners are
            // refined together, stragglers individually
            std::vector<int> label(born.size());
            for (size_t a = 0; a < born.size(); ++a) label[a] = static_cast<int>(a);
            for (size_t a = 0; a < born.size(); ++a)
                for (size_t c = a + 1; c < born.size(); ++c) {
                    const auto& pa = out.branches[static_cast<size_t>(born[a])].points.front();
                    const auto& pc = out.branches[static_cast<size_t>(born[c])].points.front();
                    if (detail::config_distance(pa.config, pc.config) <= 0.8) {
                        const int la = label[a], lc = label[c];
                        for (auto& l : label)
                            if (l == lc) l = la;
                    }
                }
            for (size_t a = 0; a < born.size(); ++a) {
                if (label[a] != static_cast<int>(a)) continue;
                std::vector<int> cluster;
                for (size_t c = 0; c < born.size(); ++c)
                    if (label[c] == static_cast<int>(a)) cluster.push_back(born[c]);
                if (cluster.size() >= 2)
                    refine_birth_cluster(cluster, last_good_rho);
                else
                    refine_birth(out.branches[static_cast<size_t>(cluster[0])], last_good_rho,
                                 next_alive);
            }
        }
        next_alive.insert(next_alive.end(), born.begin(), born.end());
        alive = std::move(next_alive);
        last_good_rho = rho;
    }

    for (auto& b : out.branches) std::sort(b.events.begin(), b.events.end(),
                                           [](const BranchEvent& a, const BranchEvent& e) {
                                               return a.rho < e.rho;
                                           });
    return out;
}

/// Classification of a refined branch endpoint: how many branches meet there,
/// whether the meeting is a fold or a branch point, and whether a quasistatic
/// sweep past it forces a jump to another stable equilibrium.
struct EndpointReport {
    EventKind kind = EventKind::Fold;
    int coalescing = 0;
    double rho_refined = 0.0;
    std::optional<Equilibrium> critical_point;  ///< Newton-sharpened det(H)=0 solution
    bool jump = false;
    std::optional<Equilibrium> jump_target;
};

namespace detail {

/// Angular distance covered by the branch over the last `window` of rho before
/// its endpoint nearest rho_star; the scale of the coalescence.
inline double approach_scale(const Branch& b, double rho_star, double window) {
    const bool at_back = std::abs(b.points.back().rho - rho_star) <=
                         std::abs(b.points.front().rho - rho_star);
    const Equilibrium& end = at_back ? b.points.back() : b.points.front();
    double best_gap = 1e300;
    const Equilibrium* ref = nullptr;
    for (const auto& p : b.points) {
        const double d = std::abs(std::abs(p.rho - end.rho) - window);
        if (d < best_gap) {
            best_gap = d;
            ref = &p;
        }
    }
    return ref ? config_distance(end.config, ref->config) : 0.0;
}

/// Newton iteration on (grad U, det H) = 0 in (theta1, theta2, rho): lands on
/// the degenerate equilibrium that a fold or branch point sits on.
inline std::optional<std::pair<double, Configuration>> sharpen_degenerate(
    const MechanismParams& p, Configuration c, double rho, const Tolerances& tol) {
    const double rho0 = rho;
    for (int it = 0; it < 60; ++it) {
        const auto g = gradient(p, rho, c);
        const SymMat2 hm = hessian(p, rho, c);
        const double det = hm.det();
        const double res = std::max({std::abs(g[0]), std::abs(g[1])});
        if (res < tol.tol_eq_abs(p, rho) && std::abs(det) < 1e-9 * std::pow(energy_scale(p, rho), 2))
            return std::make_pair(rho, c);
        // analytic derivatives for grad rows, finite differences for det row
        const double hfd = 1e-6;
        auto det_at = [&](double t1, double t2, double r) {
            return hessian(p, r, {t1, t2}).det();
        };
        Eigen::Matrix3d J;
        J(0, 0) = hm.h11;
        J(0, 1) = hm.h12;
        J(0, 2) = 2.0 * p.k * p.l1 * std::sin(c.theta1);
        J(1, 0) = hm.h12;
        J(1, 1) = hm.h22;
        J(1, 2) = 2.0 * p.k * p.l2 * std::sin(c.theta2);
        J(2, 0) = (det_at(c.theta1 + hfd, c.theta2, rho) - det_at(c.theta1 - hfd, c.theta2, rho)) /
                  (2.0 * hfd);
        J(2, 1) = (det_at(c.theta1, c.theta2 + hfd, rho) - det_at(c.theta1, c.theta2 - hfd, rho)) /
                  (2.0 * hfd);
        J(2, 2) = (det_at(c.theta1, c.theta2, rho + hfd) - det_at(c.theta1, c.theta2, rho - hfd)) /
                  (2.0 * hfd);
        const Eigen::Vector3d rhs(-g[0], -g[1], -det);
        const Eigen::Vector3d step = J.fullPivLu().solve(rhs);
        if (!step.allFinite()) return std::nullopt;
        const double damp = std::min(1.0, 0.2 / std::max(1e-12, step.cwiseAbs().maxCoeff()));
        c.theta1 += damp * step[0];
        c.theta2 += damp * step[1];
        rho += damp * step[2];
        if (!(rho > 0.0) || std::abs(rho - rho0) > 0.2) return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace detail

/// Classify the Terminated endpoint at rho_star: count the branches dying
/// there plus branches passing through the same configuration. Exactly two
/// meeting curves make a fold; three or more make a branch point. Also probes
/// the far side for the quasistatic jump target when a stable branch dies.
inline EndpointReport classify_endpoint(const std::vector<Branch>& branches, double rho_star,
                                        double window, const MechanismParams& params,
                                        const Tolerances& tol = {}) {
    if (!(window > 0.0)) throw std::invalid_argument("classification window must be positive");

    struct Dying {
        const Branch* b;
        const Equilibrium* end;
        bool from_below;  // branch lives at rho < rho_star
    };
    std::vector<Dying> dying;
    for (const auto& b : branches) {
        for (const auto& ev : b.events) {
            if (ev.kind != EventKind::Terminated) continue;
            if (std::abs(ev.rho - rho_star) > 0.5 * window) continue;
            const bool at_back = std::abs(b.points.back().rho - rho_star) <=
                                 std::abs(b.points.front().rho - rho_star);
            dying.push_back({&b, at_back ? &b.points.back() : &b.points.front(), at_back});
            break;
        }
    }
    if (dying.size() < 2)
        throw InsufficientData("fewer than two branches terminate near the given rho");

    const Configuration star = dying.front().end->config;
    double scale = 0.0;
    for (const auto& d : dying)
        scale = std::max(scale, detail::approach_scale(*d.b, rho_star, window));
    double spread = 0.0;
    for (const auto& d : dying) spread = std::max(spread, detail::config_distance(d.end->config, star));
    const double pass_radius = std::max({0.2 * scale, 2.0 * spread, 1e-2});

    int passing = 0;
    for (const auto& b : branches) {
        if (b.points.size() < 2) continue;
        if (!(b.rho_min() < rho_star - 1e-9 && b.rho_max() > rho_star + 1e-9)) continue;
        const auto c = detail::interp_config(b, rho_star);
        if (c && detail::config_distance(*c, star) <= pass_radius) ++passing;
    }

    EndpointReport rep;
    rep.coalescing = static_cast<int>(dying.size()) + passing;
    rep.kind = rep.coalescing >= 3 ? EventKind::BranchPoint : EventKind::Fold;
    rep.rho_refined = rho_star;

    if (auto sharp = detail::sharpen_degenerate(params, star, rho_star, tol)) {
        rep.rho_refined = sharp->first;
        rep.critical_point = make_equilibrium(params, sharp->first, sharp->second, tol);
    }

    // Quasistatic jump: a stable branch dies and no stable solution remains
    // nearby on the far side, so the mechanism must fall to a remote one.
    bool dying_stable = false;
    for (const auto& d : dying) {
        const auto& pts = d.b->points;
        const size_t n = pts.size();
        // look a few points behind the endpoint: at the endpoint itself the
        // classification can read Degenerate
        const size_t probe_idx = d.from_below ? (n >= 4 ? n - 4 : 0) : std::min<size_t>(3, n - 1);
        if (pts[probe_idx].stability == StabilityClass::Stable) dying_stable = true;
    }
    const bool from_below = dying.front().from_below;
    const double rho_far = rho_star + (from_below ? 1.0 : -1.0) * std::max(0.1 * window, 2e-3);
    if (dying_stable && rho_far > 0.0) {
        if (const auto far = detail::try_solve(params, rho_far, tol)) {
            const Equilibrium* best = nullptr;
            double best_d = 1e300;
            bool survivor = false;
            for (const auto& s : *far) {
                if (s.stability != StabilityClass::Stable) continue;
                const double d = detail::config_distance(s.config, star);
                if (d <= pass_radius) survivor = true;
                if (d < best_d) {
                    best_d = d;
                    best = &s;
                }
            }
            if (!survivor) {
                rep.jump = true;
                if (best) rep.jump_target = *best;
            }
        }
    }
    return rep;
}

/// CSV export: point rows ordered by branch then rho, with each branch's
/// events appended as rows carrying the event kind in the last column.
inline void write_branch_csv(std::ostream& os, const TraceResult& trace) {
    os << "rho,branch_id,theta1,theta2,energy,h11,detH,stability\n";
    char buf[320];
    for (const auto& b : trace.branches) {
        for (const auto& e : b.points) {
            std::snprintf(buf, sizeof(buf), "%.12g,%d,%.12g,%.12g,%.12g,%.12g,%.12g,%s\n", e.rho,
                          b.id, e.config.theta1, e.config.theta2, e.energy, e.h11, e.det_h,
                          to_string(e.stability));
            os << buf;
        }
        for (const auto& ev : b.events) {
            std::snprintf(buf, sizeof(buf), "%.12g,%d,,,,,,%s\n", ev.rho, b.id,
                          to_string(ev.kind));
            os << buf;
        }
    }
}

}  // namespace tensegrity
