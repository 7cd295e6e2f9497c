// Command-line front end: solve one actuator position, map stable-count
// regions, trace branches over an actuator sweep, or run the verification
// suite. All numeric output uses 12 significant digits and is deterministic
// for identical flags.
//
// Exit codes: 0 success, 1 verification failure, 2 invalid flags or values,
// 3 degenerate polynomial system in solve.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tensegrity/continuation.hpp"
#include "tensegrity/region_map.hpp"
#include "tensegrity/serialize.hpp"
#include "tensegrity/solver.hpp"
#include "tensegrity/verification.hpp"

namespace {

using namespace tensegrity;

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

struct RhoArg {
    double lo = 0.0;
    double hi = 0.0;
    bool is_range = false;
};

RhoArg parse_rho_arg(const std::string& s) {
    RhoArg r;
    const auto colon = s.find(':');
    size_t used = 0;
    if (colon == std::string::npos) {
        r.lo = r.hi = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("malformed rho value: " + s);
    } else {
        r.lo = std::stod(s.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument("malformed rho range: " + s);
        const std::string rest = s.substr(colon + 1);
        r.hi = std::stod(rest, &used);
        if (used != rest.size()) throw std::invalid_argument("malformed rho range: " + s);
        r.is_range = true;
    }
    return r;
}

/// "rho=0.01:2,l2=0.01:2" -> axes and ranges of a PlaneSpec.
void parse_plane_arg(const std::string& s, PlaneSpec& spec) {
    const auto comma = s.find(',');
    if (comma == std::string::npos)
        throw std::invalid_argument("plane needs two axes, e.g. rho=0.01:2,l2=0.01:2");
    auto parse_axis = [](const std::string& part, PlaneAxis& axis, double& lo, double& hi) {
        const auto eq = part.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("malformed plane axis: " + part);
        axis = axis_from_name(part.substr(0, eq));
        const RhoArg r = parse_rho_arg(part.substr(eq + 1));
        if (!r.is_range) throw std::invalid_argument("plane axis needs lo:hi, got: " + part);
        lo = r.lo;
        hi = r.hi;
    };
    parse_axis(s.substr(0, comma), spec.axis_x, spec.x_lo, spec.x_hi);
    parse_axis(s.substr(comma + 1), spec.axis_y, spec.y_lo, spec.y_hi);
}

/// Built-in defaults, then environment overrides, then explicit flags.
Tolerances resolve_tolerances(const std::optional<double>& tol_eq_flag,
                              const std::optional<double>& eps_h_flag) {
    Tolerances tol;
    if (const char* e = std::getenv("TENSEGRITY_TOL_EQ")) tol.tol_eq = std::atof(e);
    if (const char* e = std::getenv("TENSEGRITY_EPS_H")) tol.eps_h = std::atof(e);
    if (tol_eq_flag) tol.tol_eq = *tol_eq_flag;
    if (eps_h_flag) tol.eps_h = *eps_h_flag;
    if (!(tol.tol_eq > 0.0) || !(tol.eps_h > 0.0))
        throw std::invalid_argument("tolerances must be positive");
    return tol;
}

std::ostream& open_output(const std::string& path, std::ofstream& file) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw std::invalid_argument("cannot open output file: " + path);
    return file;
}

void print_params_comment(std::ostream& os, const MechanismParams& p) {
    os << "# l1 " << fmt("%.12g", p.l1) << "  l2 " << fmt("%.12g", p.l2) << "  k "
       << fmt("%.12g", p.k) << "  f3 " << fmt("%.12g", p.f3) << "  f4 " << fmt("%.12g", p.f4);
    if (p.f3x != 0.0) os << "  f3x " << fmt("%.12g", p.f3x);
    if (p.f4x != 0.0) os << "  f4x " << fmt("%.12g", p.f4x);
    os << "\n";
}

int run_solve(const MechanismParams& params, const RhoArg& rho_arg, const std::string& format,
              const std::string& out_path, const Tolerances& tol) {
    if (rho_arg.is_range)
        throw std::invalid_argument("solve expects a single rho, not a range");
    const double rho = rho_arg.lo;

    std::vector<Equilibrium> eqs;
    try {
        eqs = solve_equilibria(params, rho, tol);
    } catch (const DegenerateResultant& e) {
        std::cerr << "solver degeneracy: " << e.what()
                  << "\nhint: perturb a parameter slightly (the polynomial system loses rank "
                     "at this exact point) or relax tolerances via --tol-eq / TENSEGRITY_TOL_EQ."
                  << std::endl;
        return 3;
    }

    std::ofstream file;
    std::ostream& os = open_output(out_path, file);
    if (format == "json") {
        os << solve_report_json(params, rho, eqs).dump(2) << "\n";
        return 0;
    }

    int stable = 0;
    for (const auto& e : eqs) stable += e.stability == StabilityClass::Stable;
    os << "# solve  rho " << fmt("%.12g", rho) << "\n";
    print_params_comment(os, params);
    os << "# stable " << stable << " of " << eqs.size() << "\n";
    char buf[420];
    std::snprintf(buf, sizeof(buf), "%18s %12s %18s %12s %13s %13s %13s %13s %16s %13s %13s %9s %12s\n",
                  "theta1_rad", "theta1_deg", "theta2_rad", "theta2_deg", "x3", "y3", "x4", "y4",
                  "energy", "h11", "detH", "residual", "stability");
    os << buf;
    for (const auto& e : eqs) {
        const Vec2 a3 = node_a3(params, e.config);
        const Vec2 a4 = node_a4(params, rho, e.config);
        std::snprintf(buf, sizeof(buf),
                      "%18.12g %12.7g %18.12g %12.7g %13.8g %13.8g %13.8g %13.8g %16.12g "
                      "%13.6g %13.6g %9.2e %12s\n",
                      e.config.theta1, e.config.theta1 * 180.0 / pi, e.config.theta2,
                      e.config.theta2 * 180.0 / pi, a3.x, a3.y, a4.x, a4.y, e.energy, e.h11,
                      e.det_h, e.grad_residual, to_string(e.stability));
        os << buf;
    }
    return 0;
}

int run_map(PlaneSpec spec, int res, int depth, bool sym, const std::string& validate_name,
            const std::string& format, const std::string& out_path, int jobs,
            const Tolerances& tol) {
    spec.resolution = res;
    spec.tie_forces = sym;
    const RegionMap map = map_region(spec, depth, jobs, tol);

    std::optional<ValidationReport> rep;
    if (!validate_name.empty())
        rep = validate_boundaries(map, family_from_name(validate_name));

    std::ofstream file;
    std::ostream& os = open_output(out_path, file);
    if (format == "json") {
        nlohmann::json j = map;
        if (rep) j["validation"] = *rep;
        os << j.dump(2) << "\n";
        return 0;
    }
    write_csv(os, map);
    if (rep) {
        os << "# validation family " << to_string(rep->family) << "\n";
        os << "# boundary_points " << rep->points << "\n";
        if (rep->has_residuals) {
            os << "# max_normalized_distance " << fmt("%.12g", rep->max_normalized) << "\n";
            os << "# median_normalized_distance " << fmt("%.12g", rep->median_normalized)
               << "\n";
        }
    }
    return 0;
}

int run_trace(const MechanismParams& params, const RhoArg& rho_arg, int steps,
              const std::string& format, const std::string& out_path, int jobs,
              const Tolerances& tol) {
    if (!rho_arg.is_range)
        throw std::invalid_argument("trace expects --rho lo:hi");
    const TraceResult tr = trace_branches(params, rho_arg.lo, rho_arg.hi, steps, tol, jobs);
    const double step = (rho_arg.hi - rho_arg.lo) / steps;

    // classify each refined endpoint once, folding together the branches that
    // terminate at the same rho
    struct Critical {
        double rho_event;
        std::optional<EndpointReport> rep;
    };
    std::vector<Critical> criticals;
    for (const auto& b : tr.branches)
        for (const auto& ev : b.events) {
            if (ev.kind != EventKind::Terminated) continue;
            bool seen = false;
            for (const auto& c : criticals) seen |= std::abs(c.rho_event - ev.rho) < 1e-4;
            if (seen) continue;
            Critical c{ev.rho, std::nullopt};
            try {
                c.rep = classify_endpoint(tr.branches, ev.rho, 10.0 * step, params, tol);
            } catch (const InsufficientData&) {
            }
            criticals.push_back(c);
        }
    std::sort(criticals.begin(), criticals.end(),
              [](const Critical& a, const Critical& b) { return a.rho_event < b.rho_event; });

    std::ofstream file;
    std::ostream& os = open_output(out_path, file);
    if (format == "json") {
        nlohmann::json j = tr;
        auto& arr = j["critical_points"] = nlohmann::json::array();
        for (const auto& c : criticals) {
            nlohmann::json e = {{"rho_bracket", {c.rho_event - 1e-6, c.rho_event + 1e-6}}};
            if (c.rep) {
                e["kind"] = to_string(c.rep->kind);
                e["rho"] = c.rep->rho_refined;
                e["coalescing"] = c.rep->coalescing;
                e["jump"] = c.rep->jump;
                if (c.rep->jump_target) e["jump_target"] = *c.rep->jump_target;
            } else {
                e["kind"] = "unclassified";
                e["rho"] = c.rho_event;
            }
            arr.push_back(std::move(e));
        }
        os << j.dump(2) << "\n";
        return 0;
    }

    os << "# trace  rho " << fmt("%.12g", rho_arg.lo) << ":" << fmt("%.12g", rho_arg.hi)
       << "  steps " << steps << "\n";
    print_params_comment(os, params);
    os << "# branches " << tr.branches.size() << "  solver_gaps " << tr.gaps.size() << "\n";
    for (const auto& c : criticals) {
        os << "# critical_point ";
        if (c.rep) {
            os << to_string(c.rep->kind) << " at rho " << fmt("%.12g", c.rep->rho_refined)
               << " in [" << fmt("%.12g", c.rho_event - 1e-6) << ","
               << fmt("%.12g", c.rho_event + 1e-6) << "]  coalescing " << c.rep->coalescing;
            if (c.rep->jump && c.rep->jump_target)
                os << "  jump_to theta (" << fmt("%.12g", c.rep->jump_target->config.theta1)
                   << "," << fmt("%.12g", c.rep->jump_target->config.theta2) << ")";
        } else {
            os << "unclassified endpoint at rho " << fmt("%.12g", c.rho_event) << " in ["
               << fmt("%.12g", c.rho_event - 1e-6) << "," << fmt("%.12g", c.rho_event + 1e-6)
               << "]";
        }
        os << "\n";
    }
    for (const auto& b : tr.branches)
        for (const auto& ev : b.events)
            if (ev.kind == EventKind::StabilityChange)
                os << "# stability_change on branch " << b.id << " at rho "
                   << fmt("%.12g", ev.rho) << " in [" << fmt("%.12g", ev.rho - 1e-6) << ","
                   << fmt("%.12g", ev.rho + 1e-6) << "]\n";
    write_branch_csv(os, tr);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Equilibrium analysis of a two-rod crossed tensegrity mechanism"};
    app.require_subcommand(1);

    MechanismParams params;
    std::string rho_str;
    std::string format = "flat";
    std::string out_path;
    int jobs = 1;
    std::optional<double> tol_eq_flag, eps_h_flag;

    auto add_common = [&](CLI::App* cmd, bool with_params) {
        if (with_params) {
            cmd->add_option("--l1", params.l1, "rod 1 length");
            cmd->add_option("--l2", params.l2, "rod 2 length");
            cmd->add_option("--k", params.k, "spring stiffness");
            cmd->add_option("--f3", params.f3, "vertical load at A3 (+up)");
            cmd->add_option("--f4", params.f4, "vertical load at A4 (+up)");
            cmd->add_option("--f3x", params.f3x, "horizontal load at A3 (+x)");
            cmd->add_option("--f4x", params.f4x, "horizontal load at A4 (+x)");
        }
        cmd->add_option("--out", out_path, "output file (default: stdout)");
        cmd->add_option("--tol-eq", tol_eq_flag,
                        "equilibrium residual tolerance (env TENSEGRITY_TOL_EQ)");
        cmd->add_option("--eps-h", eps_h_flag,
                        "Hessian degeneracy tolerance (env TENSEGRITY_EPS_H)");
    };

    auto* solve = app.add_subcommand("solve", "all equilibria at one actuator length");
    solve->add_option("--rho", rho_str, "actuator length")->required();
    solve->add_option("--format", format, "flat | json")
        ->check(CLI::IsMember({"flat", "json"}));
    add_common(solve, true);

    auto* mapc = app.add_subcommand("map", "stable-count map over a parameter plane");
    std::string plane_str = "rho=0.01:2,l2=0.01:2";
    int res = 200, depth = 4;
    bool sym = false;
    std::string validate_name;
    mapc->add_option("--plane", plane_str, "two axes, e.g. rho=0.01:2,l2=0.01:2");
    mapc->add_option("--res", res, "cells per axis");
    mapc->add_option("--depth", depth, "boundary bisection depth");
    mapc->add_flag("--sym", sym, "tie f3 = f4 (symmetric loading)");
    mapc->add_option("--validate", validate_name,
                     "boundary family to check: unloaded_lines | symmetric_sextics | none");
    mapc->add_option("--rho", rho_str, "fixed rho when rho is not an axis");
    mapc->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json", "flat"}));
    mapc->add_option("--jobs", jobs, "worker threads");
    add_common(mapc, true);

    auto* trace = app.add_subcommand("trace", "equilibrium branches over an actuator sweep");
    int steps = 400;
    trace->add_option("--rho", rho_str, "sweep range lo:hi")->required();
    trace->add_option("--steps", steps, "sweep samples minus one");
    trace->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json", "flat"}));
    trace->add_option("--jobs", jobs, "worker threads");
    add_common(trace, true);

    auto* verify = app.add_subcommand("verify", "run the acceptance criteria");
    VerifyOptions vopt;
    verify->add_option("--only", vopt.only, "substring filter on criterion names");
    verify->add_option("--seed", vopt.seed, "seed for randomized criteria");
    verify->add_option("--jobs", vopt.jobs, "worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (solve->parsed()) {
            const Tolerances tol = resolve_tolerances(tol_eq_flag, eps_h_flag);
            return run_solve(params, parse_rho_arg(rho_str), format, out_path, tol);
        }
        if (mapc->parsed()) {
            const Tolerances tol = resolve_tolerances(tol_eq_flag, eps_h_flag);
            PlaneSpec spec;
            parse_plane_arg(plane_str, spec);
            spec.fixed = params;
            if (!rho_str.empty()) {
                const RhoArg r = parse_rho_arg(rho_str);
                if (r.is_range)
                    throw std::invalid_argument("map takes a fixed --rho, not a range");
                spec.fixed_rho = r.lo;
            }
            const std::string f = format == "flat" ? "csv" : format;
            return run_map(spec, res, depth, sym, validate_name, f, out_path, jobs, tol);
        }
        if (trace->parsed()) {
            const Tolerances tol = resolve_tolerances(tol_eq_flag, eps_h_flag);
            const std::string f = format == "flat" ? "csv" : format;
            return run_trace(params, parse_rho_arg(rho_str), steps, f, out_path, jobs, tol);
        }
        if (verify->parsed()) {
            const auto results = tensegrity::run_acceptance(vopt, std::cout);
            int passed = 0;
            for (const auto& r : results) passed += r.pass;
            std::cout << passed << "/" << results.size() << " criteria passed\n";
            return tensegrity::all_passed(results) ? 0 : 1;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    }
    return 2;
}
