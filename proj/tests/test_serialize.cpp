#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "tensegrity/serialize.hpp"
#include "tensegrity/solver.hpp"

using namespace tensegrity;
using nlohmann::json;

namespace {

void require_same(const Equilibrium& a, const Equilibrium& b) {
    REQUIRE(a.rho == b.rho);
    REQUIRE(a.config.theta1 == b.config.theta1);
    REQUIRE(a.config.theta2 == b.config.theta2);
    REQUIRE(a.energy == b.energy);
    REQUIRE(a.grad_residual == b.grad_residual);
    REQUIRE(a.h11 == b.h11);
    REQUIRE(a.det_h == b.det_h);
    REQUIRE(a.stability == b.stability);
    REQUIRE(a.branch_tag == b.branch_tag);
}

void require_same(const PlaneSpec& a, const PlaneSpec& b) {
    REQUIRE(a.axis_x == b.axis_x);
    REQUIRE(a.axis_y == b.axis_y);
    REQUIRE(a.x_lo == b.x_lo);
    REQUIRE(a.x_hi == b.x_hi);
    REQUIRE(a.y_lo == b.y_lo);
    REQUIRE(a.y_hi == b.y_hi);
    REQUIRE(a.resolution == b.resolution);
    REQUIRE(a.fixed_rho == b.fixed_rho);
    REQUIRE(a.tie_forces == b.tie_forces);
    REQUIRE(a.fixed.l1 == b.fixed.l1);
    REQUIRE(a.fixed.l2 == b.fixed.l2);
    REQUIRE(a.fixed.k == b.fixed.k);
    REQUIRE(a.fixed.f3 == b.fixed.f3);
    REQUIRE(a.fixed.f4 == b.fixed.f4);
    REQUIRE(a.fixed.f3x == b.fixed.f3x);
    REQUIRE(a.fixed.f4x == b.fixed.f4x);
}

}  // namespace

TEST_CASE("equilibrium records survive a json round trip bit-exactly") {
    MechanismParams p;
    p.k = 1.0;
    const auto eqs = solve_equilibria(p, 0.4);
    REQUIRE(eqs.size() == 6);
    for (const auto& e : eqs) {
        const json j = e;
        // through text as well: shortest-round-trip printing must not lose bits
        const json reparsed = json::parse(j.dump());
        const auto back = reparsed.get<Equilibrium>();
        require_same(e, back);
    }
}

TEST_CASE("branch tags serialize only when present") {
    MechanismParams p;
    const auto eqs = solve_equilibria(p, 0.5);
    Equilibrium e = eqs.front();

    e.branch_tag.reset();
    json j = e;
    CHECK_FALSE(j.contains("branch"));
    CHECK_FALSE(json::parse(j.dump()).get<Equilibrium>().branch_tag.has_value());

    e.branch_tag = 3;
    j = e;
    REQUIRE(j.at("branch").get<int>() == 3);
    const auto back = json::parse(j.dump()).get<Equilibrium>();
    REQUIRE(back.branch_tag.has_value());
    CHECK(*back.branch_tag == 3);
}

TEST_CASE("parameters and plane specs round trip through text") {
    MechanismParams p;
    p.l1 = 0.75;
    p.l2 = 1.9375;
    p.k = 250.0;
    p.f3 = -7.3;
    p.f4 = 0.1;
    p.f3x = 1e-7;
    p.f4x = -2.25;
    const auto pb = json::parse(json(p).dump()).get<MechanismParams>();
    REQUIRE(pb.l1 == p.l1);
    REQUIRE(pb.l2 == p.l2);
    REQUIRE(pb.k == p.k);
    REQUIRE(pb.f3 == p.f3);
    REQUIRE(pb.f4 == p.f4);
    REQUIRE(pb.f3x == p.f3x);
    REQUIRE(pb.f4x == p.f4x);

    PlaneSpec s;
    s.axis_x = PlaneAxis::F3;
    s.axis_y = PlaneAxis::Rho;
    s.x_lo = -10.0;
    s.x_hi = 10.0;
    s.y_lo = 0.3;
    s.y_hi = 0.9;
    s.resolution = 17;
    s.fixed = p;
    s.fixed_rho = 0.123456789012345;
    s.tie_forces = true;
    require_same(s, json::parse(json(s).dump()).get<PlaneSpec>());
}

TEST_CASE("region maps round trip including refined boundary data") {
    PlaneSpec s;
    s.x_lo = 0.1;
    s.x_hi = 1.9;
    s.y_lo = 0.1;
    s.y_hi = 1.9;
    s.resolution = 10;
    s.fixed.k = 100.0;
    const RegionMap m = map_region(s, 3);
    REQUIRE(!m.boundary_cells.empty());

    const auto back = json::parse(json(m).dump()).get<RegionMap>();
    require_same(m.spec, back.spec);
    REQUIRE(back.refinement_depth == m.refinement_depth);
    REQUIRE(back.counts == m.counts);
    REQUIRE(back.degenerate == m.degenerate);
    REQUIRE(back.boundary_cells == m.boundary_cells);
    REQUIRE(back.boundary_points.size() == m.boundary_points.size());
    for (size_t i = 0; i < m.boundary_points.size(); ++i) {
        REQUIRE(back.boundary_points[i].x == m.boundary_points[i].x);
        REQUIRE(back.boundary_points[i].y == m.boundary_points[i].y);
    }
}

TEST_CASE("validation reports round trip") {
    ValidationReport r;
    r.family = BoundaryFamily::SymmetricSextics;
    r.points = 42;
    r.has_residuals = true;
    r.max_normalized = 0.001220703125;
    r.median_normalized = 3.0517578125e-05;
    const auto back = json::parse(json(r).dump()).get<ValidationReport>();
    REQUIRE(back.family == r.family);
    REQUIRE(back.points == r.points);
    REQUIRE(back.has_residuals == r.has_residuals);
    REQUIRE(back.max_normalized == r.max_normalized);
    REQUIRE(back.median_normalized == r.median_normalized);
}

TEST_CASE("trace results round trip with events intact") {
    MechanismParams p;
    p.l2 = 0.6;
    p.k = 100.0;
    const TraceResult tr = trace_branches(p, 0.05, 1.2, 46);
    size_t events = 0;
    for (const auto& b : tr.branches) events += b.events.size();
    REQUIRE(events > 0);

    const auto back = json::parse(json(tr).dump()).get<TraceResult>();
    REQUIRE(back.rho_lo == tr.rho_lo);
    REQUIRE(back.rho_hi == tr.rho_hi);
    REQUIRE(back.steps == tr.steps);
    REQUIRE(back.gaps == tr.gaps);
    REQUIRE(back.branches.size() == tr.branches.size());
    for (size_t bi = 0; bi < tr.branches.size(); ++bi) {
        const Branch& a = tr.branches[bi];
        const Branch& b = back.branches[bi];
        REQUIRE(a.id == b.id);
        REQUIRE(a.points.size() == b.points.size());
        for (size_t i = 0; i < a.points.size(); ++i) require_same(a.points[i], b.points[i]);
        REQUIRE(a.events.size() == b.events.size());
        for (size_t i = 0; i < a.events.size(); ++i) {
            REQUIRE(a.events[i].rho == b.events[i].rho);
            REQUIRE(a.events[i].kind == b.events[i].kind);
        }
    }
}

TEST_CASE("solve report carries counts and parseable records") {
    MechanismParams p;
    p.l2 = 1.5;
    p.k = 100.0;
    const auto eqs = solve_equilibria(p, 1.0);
    const json rep = solve_report_json(p, 1.0, eqs);
    REQUIRE(rep.at("rho").get<double>() == 1.0);
    REQUIRE(rep.at("count").get<size_t>() == eqs.size());
    REQUIRE(rep.at("count_stable").get<int>() == 2);
    const auto records = rep.at("equilibria").get<std::vector<Equilibrium>>();
    REQUIRE(records.size() == eqs.size());
    for (size_t i = 0; i < eqs.size(); ++i) require_same(eqs[i], records[i]);
    const auto pb = rep.at("params").get<MechanismParams>();
    REQUIRE(pb.l2 == 1.5);
}

TEST_CASE("malformed json is rejected with clear errors") {
    json j = json::parse(R"({"rho": 1.0, "kind": "rift"})");
    CHECK_THROWS_AS(j.get<BranchEvent>(), std::invalid_argument);
    json nostab = json::parse(R"({"rho":1.0,"theta1":0.0,"theta2":0.0,"energy":0.0,
        "grad_residual":0.0,"h11":1.0,"det_h":1.0,"stability":"meta"})");
    CHECK_THROWS_AS(nostab.get<Equilibrium>(), std::invalid_argument);
    json missing = json::parse(R"({"theta1": 0.0})");
    CHECK_THROWS_AS(missing.get<Configuration>(), json::out_of_range);
    CHECK_THROWS_AS(axis_from_name("z"), std::invalid_argument);
    CHECK_THROWS_AS(family_from_name("lines"), std::invalid_argument);
    CHECK_THROWS_AS(stability_from_name(""), std::invalid_argument);
    CHECK_THROWS_AS(event_kind_from_name("Fold"), std::invalid_argument);
}
