#pragma once

// JSON bindings for the solver's record types, built on nlohmann::json. Every
// type serialized here parses back bit-exactly: doubles survive the round trip
// because the library prints shortest-round-trip representations.

#include <utility>
#include <vector>

#include <json.hpp>

#include "tensegrity/continuation.hpp"
#include "tensegrity/mechanism.hpp"
#include "tensegrity/region_map.hpp"

namespace tensegrity {

inline void to_json(nlohmann::json& j, const MechanismParams& p) {
    j = {{"l1", p.l1}, {"l2", p.l2}, {"k", p.k},
         {"f3", p.f3}, {"f4", p.f4}, {"f3x", p.f3x}, {"f4x", p.f4x}};
}

inline void from_json(const nlohmann::json& j, MechanismParams& p) {
    j.at("l1").get_to(p.l1);
    j.at("l2").get_to(p.l2);
    j.at("k").get_to(p.k);
    j.at("f3").get_to(p.f3);
    j.at("f4").get_to(p.f4);
    j.at("f3x").get_to(p.f3x);
    j.at("f4x").get_to(p.f4x);
}

inline void to_json(nlohmann::json& j, const Configuration& c) {
    j = {{"theta1", c.theta1}, {"theta2", c.theta2}};
}

inline void from_json(const nlohmann::json& j, Configuration& c) {
    j.at("theta1").get_to(c.theta1);
    j.at("theta2").get_to(c.theta2);
}

inline void to_json(nlohmann::json& j, const Equilibrium& e) {
    j = {{"rho", e.rho},
         {"theta1", e.config.theta1},
         {"theta2", e.config.theta2},
         {"energy", e.energy},
         {"grad_residual", e.grad_residual},
         {"h11", e.h11},
         {"det_h", e.det_h},
         {"stability", to_string(e.stability)}};
    if (e.branch_tag) j["branch"] = *e.branch_tag;
}

inline void from_json(const nlohmann::json& j, Equilibrium& e) {
    j.at("rho").get_to(e.rho);
    j.at("theta1").get_to(e.config.theta1);
    j.at("theta2").get_to(e.config.theta2);
    j.at("energy").get_to(e.energy);
    j.at("grad_residual").get_to(e.grad_residual);
    j.at("h11").get_to(e.h11);
    j.at("det_h").get_to(e.det_h);
    e.stability = stability_from_name(j.at("stability").get<std::string>());
    e.branch_tag.reset();
    if (j.contains("branch")) e.branch_tag = j.at("branch").get<int>();
}

inline void to_json(nlohmann::json& j, const PlaneSpec& s) {
    j = {{"axis_x", to_string(s.axis_x)},
         {"axis_y", to_string(s.axis_y)},
         {"x_lo", s.x_lo},
         {"x_hi", s.x_hi},
         {"y_lo", s.y_lo},
         {"y_hi", s.y_hi},
         {"resolution", s.resolution},
         {"fixed", s.fixed},
         {"fixed_rho", s.fixed_rho},
         {"tie_forces", s.tie_forces}};
}

inline void from_json(const nlohmann::json& j, PlaneSpec& s) {
    s.axis_x = axis_from_name(j.at("axis_x").get<std::string>());
    s.axis_y = axis_from_name(j.at("axis_y").get<std::string>());
    j.at("x_lo").get_to(s.x_lo);
    j.at("x_hi").get_to(s.x_hi);
    j.at("y_lo").get_to(s.y_lo);
    j.at("y_hi").get_to(s.y_hi);
    j.at("resolution").get_to(s.resolution);
    j.at("fixed").get_to(s.fixed);
    j.at("fixed_rho").get_to(s.fixed_rho);
    j.at("tie_forces").get_to(s.tie_forces);
}

inline void to_json(nlohmann::json& j, const BoundaryPoint& p) {
    j = {{"x", p.x}, {"y", p.y}};
}

inline void from_json(const nlohmann::json& j, BoundaryPoint& p) {
    j.at("x").get_to(p.x);
    j.at("y").get_to(p.y);
}

inline void to_json(nlohmann::json& j, const RegionMap& m) {
    j = {{"spec", m.spec},
         {"refinement_depth", m.refinement_depth},
         {"counts", m.counts},
         {"degenerate", m.degenerate},
         {"boundary_points", m.boundary_points}};
    auto& cells = j["boundary_cells"] = nlohmann::json::array();
    for (const auto& [ix, iy] : m.boundary_cells) cells.push_back({ix, iy});
}

inline void from_json(const nlohmann::json& j, RegionMap& m) {
    j.at("spec").get_to(m.spec);
    j.at("refinement_depth").get_to(m.refinement_depth);
    j.at("counts").get_to(m.counts);
    j.at("degenerate").get_to(m.degenerate);
    j.at("boundary_points").get_to(m.boundary_points);
    m.boundary_cells.clear();
    for (const auto& c : j.at("boundary_cells"))
        m.boundary_cells.emplace_back(c.at(0).get<int>(), c.at(1).get<int>());
}

inline void to_json(nlohmann::json& j, const ValidationReport& r) {
    j = {{"family", to_string(r.family)},
         {"points", r.points},
         {"has_residuals", r.has_residuals},
         {"max_normalized_distance", r.max_normalized},
         {"median_normalized_distance", r.median_normalized}};
}

inline void from_json(const nlohmann::json& j, ValidationReport& r) {
    r.family = family_from_name(j.at("family").get<std::string>());
    j.at("points").get_to(r.points);
    j.at("has_residuals").get_to(r.has_residuals);
    j.at("max_normalized_distance").get_to(r.max_normalized);
    j.at("median_normalized_distance").get_to(r.median_normalized);
}

inline void to_json(nlohmann::json& j, const BranchEvent& e) {
    j = {{"rho", e.rho}, {"kind", to_string(e.kind)}};
}

inline void from_json(const nlohmann::json& j, BranchEvent& e) {
    j.at("rho").get_to(e.rho);
    e.kind = event_kind_from_name(j.at("kind").get<std::string>());
}

inline void to_json(nlohmann::json& j, const Branch& b) {
    j = {{"id", b.id}, {"points", b.points}, {"events", b.events}};
}

inline void from_json(const nlohmann::json& j, Branch& b) {
    j.at("id").get_to(b.id);
    j.at("points").get_to(b.points);
    j.at("events").get_to(b.events);
}

inline void to_json(nlohmann::json& j, const TraceResult& t) {
    j = {{"rho_lo", t.rho_lo},
         {"rho_hi", t.rho_hi},
         {"steps", t.steps},
         {"gaps", t.gaps},
         {"branches", t.branches}};
}

inline void from_json(const nlohmann::json& j, TraceResult& t) {
    j.at("rho_lo").get_to(t.rho_lo);
    j.at("rho_hi").get_to(t.rho_hi);
    j.at("steps").get_to(t.steps);
    j.at("gaps").get_to(t.gaps);
    j.at("branches").get_to(t.branches);
}

/// Full solve report as the CLI emits it: the inputs echoed back, solution
/// counts, and every equilibrium record.
inline nlohmann::json solve_report_json(const MechanismParams& p, double rho,
                                        const std::vector<Equilibrium>& eqs) {
    int stable = 0;
    for (const auto& e : eqs) stable += e.stability == StabilityClass::Stable;
    return {{"params", p},
            {"rho", rho},
            {"count", eqs.size()},
            {"count_stable", stable},
            {"equilibria", eqs}};
}

}  // namespace tensegrity
