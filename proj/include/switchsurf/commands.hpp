#pragma once

// Implementations of the four CLI subcommands. Each one loads a run
// configuration, executes its pipeline stage by stage, and always writes
// <out>/summary.json describing what happened, including failures. Exit
// codes follow the documented contract:
//
//   0   success
//   2   no switched equilibrium could be established
//   3   no common Lyapunov certificate could be established
//   4   the closed-loop trajectory diverged
//   64  configuration or usage problem
//
// Sampled stages honor the SWITCHSURF_THREADS environment variable through
// the sampling layer; results are independent of the thread count.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "json.hpp"

#include "switchsurf/boost_converter.hpp"
#include "switchsurf/config.hpp"
#include "switchsurf/export.hpp"
#include "switchsurf/filippov.hpp"
#include "switchsurf/geometry.hpp"
#include "switchsurf/linalg.hpp"
#include "switchsurf/lyapunov.hpp"
#include "switchsurf/model.hpp"
#include "switchsurf/rules.hpp"
#include "switchsurf/sampling.hpp"

namespace switchsurf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNoEquilibrium = 2;
inline constexpr int kExitNoCqlf = 3;
inline constexpr int kExitDivergence = 4;
inline constexpr int kExitUsage = 64;

struct CommandArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;  // overrides sampling seeds from the config
};

/// Error that already knows which process exit code it maps to.
struct ExitError {
    int code;
    std::string message;
};

using Json = nlohmann::ordered_json;

namespace detail_cli {

inline Json vec_json(const Vector& v) {
    Json a = Json::array();
    for (double c : v) a.push_back(c);
    return a;
}

inline Json mat_json(const Matrix& m) {
    Json rows = Json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

struct LoadedSystem {
    std::string kind;  // "boost" or "affine"
    SwitchedSystem sys;
    std::optional<BoostParams> boost_params;
    std::optional<BoostSystem> boost;
    double target_voltage = 0.0;  // boost only
};

inline LoadedSystem load_system(const Config& cfg) {
    LoadedSystem out;
    out.kind = cfg.get_string("system.kind");
    if (out.kind == "boost") {
        BoostParams p;
        p.r_l = cfg.get_double("system.r_l", p.r_l);
        p.r_c = cfg.get_double("system.r_c", p.r_c);
        p.x_l = cfg.get_double("system.x_l", p.x_l);
        p.x_c = cfg.get_double("system.x_c", p.x_c);
        p.r_0 = cfg.get_double("system.r_0", p.r_0);
        p.u_s = cfg.get_double("system.u_s", p.u_s);
        out.boost_params = p;
        out.boost = boost_system(p);
        out.sys = out.boost->sys;
        out.target_voltage = cfg.get_double("system.target_voltage");
    } else if (out.kind == "affine") {
        const Matrix am = cfg.get_matrix("system.A_minus");
        const Matrix ap = cfg.get_matrix("system.A_plus");
        const Vector bm = cfg.get_vector("system.b_minus");
        const Vector bp = cfg.get_vector("system.b_plus");
        out.sys = make_switched(affine_field(am, bm), affine_field(ap, bp));
    } else {
        throw ExitError{kExitUsage, "system.kind must be 'boost' or 'affine', got '" + out.kind + "'"};
    }
    return out;
}

inline Json equilibrium_json(const SwitchedSystem& sys, const SwitchedEquilibrium& eq) {
    Json j;
    j["x0"] = vec_json(eq.x0);
    j["lambda0"] = eq.lambda0;
    j["lambda_indeterminate"] = eq.lambda_indeterminate;
    j["residual"] = norm(equilibrium_gap(sys, eq.x0, eq.lambda0));
    j["certified"] = equilibrium_certified(sys, eq);
    return j;
}

inline SwitchedEquilibrium resolve_equilibrium(const LoadedSystem& ls, const Config& cfg,
                                               Json& summary) {
    if (ls.kind == "boost") {
        const std::vector<SwitchedEquilibrium> all =
            boost_equilibria(*ls.boost_params, ls.target_voltage);
        Json arr = Json::array();
        for (const SwitchedEquilibrium& eq : all) arr.push_back(equilibrium_json(ls.sys, eq));
        summary["equilibria"] = std::move(arr);
        if (all.empty())
            throw ExitError{kExitNoEquilibrium,
                            "no switched equilibrium holds the requested output voltage"};
        const std::string branch = cfg.get_string("equilibrium.branch", "low");
        if (branch != "low" && branch != "high")
            throw ExitError{kExitUsage, "equilibrium.branch must be 'low' or 'high'"};
        return branch == "low" ? all.front() : all.back();
    }
    const Vector guess = cfg.get_vector("equilibrium.guess_x");
    const double guess_lambda = cfg.get_double("equilibrium.guess_lambda", 0.5);
    const std::size_t pin = cfg.get_size("equilibrium.pin_index", 0);
    if (pin >= ls.sys.dim)
        throw ExitError{kExitUsage, "equilibrium.pin_index out of range"};
    try {
        return find_switched_equilibrium(ls.sys, guess, guess_lambda, pin);
    } catch (const std::runtime_error& e) {
        throw ExitError{kExitNoEquilibrium, e.what()};
    }
}

inline QuadraticLyapunov resolve_lyapunov(const LoadedSystem& ls, const SwitchedEquilibrium& eq,
                                          const Config& cfg, Json& summary) {
    QuadraticLyapunov l;
    std::string source;
    if (cfg.has("lyapunov.P_row_1")) {
        source = "config";
        l.P = cfg.get_matrix("lyapunov.P");
        l.x0 = eq.x0;
        try {
            const CqlfCertificate cert = verify_cqlf(ls.sys, eq, l.P);
            l.alpha = cert.alpha;
            l.alpha_certified = cert.certified;
        } catch (const std::exception& e) {
            throw ExitError{kExitNoCqlf, e.what()};
        }
        if (!(l.alpha > 0.0))
            throw ExitError{kExitNoCqlf,
                            "configured P is not a common certificate (decay constant <= 0)"};
    } else if (ls.kind == "boost") {
        source = "energy";
        try {
            l = boost_lyapunov(*ls.boost, eq, *ls.boost_params);
        } catch (const std::exception& e) {
            throw ExitError{kExitNoCqlf, e.what()};
        }
    } else {
        source = "synthesized";
        std::optional<QuadraticLyapunov> got;
        try {
            got = synthesize_cqlf(ls.sys, eq);
        } catch (const std::exception& e) {
            throw ExitError{kExitNoCqlf, e.what()};
        }
        if (!got)
            throw ExitError{kExitNoCqlf, "no common quadratic certificate found for this pair"};
        l = *got;
    }
    Json j;
    j["P"] = mat_json(l.P);
    j["alpha"] = l.alpha;
    j["alpha_certified"] = l.alpha_certified;
    j["source"] = source;
    summary["lyapunov"] = std::move(j);
    return l;
}

inline SwitchingRule resolve_rule(const LoadedSystem& ls, const QuadraticLyapunov& l,
                                  const SwitchedEquilibrium& eq, const Config& cfg,
                                  Json& summary) {
    const std::string kind = cfg.get_string("rule.kind", "linear");
    SwitchingRule rule;
    try {
        if (kind == "linear") {
            rule = linear_rule(l, ls.sys, eq);
        } else if (kind == "quadratic") {
            rule = quadratic_rule(l, ls.sys);
        } else if (kind == "reduced") {
            if (!ls.sys.minus.affine || !ls.sys.plus.affine)
                throw ExitError{kExitUsage, "rule.kind = reduced needs affine modes"};
            rule = reduced_rule(l, ls.sys.minus.affine->b, ls.sys.plus.affine->b);
        } else {
            throw ExitError{kExitUsage,
                            "rule.kind must be 'linear', 'quadratic' or 'reduced', got '" + kind +
                                "'"};
        }
    } catch (const std::runtime_error& e) {
        throw ExitError{kExitUsage, e.what()};
    }
    Json j;
    j["kind"] = kind;
    if (!rule.closed_form.empty()) j["closed_form"] = rule.closed_form;
    if (rule.normal) j["normal"] = vec_json(*rule.normal);
    if (rule.difference_normal) j["difference_normal"] = vec_json(*rule.difference_normal);
    summary["rule"] = std::move(j);
    return rule;
}

inline SimOptions load_sim_options(const Config& cfg) {
    SimOptions opts;
    opts.step = cfg.get_double("simulate.step", opts.step);
    opts.t_max = cfg.get_double("simulate.t_max", opts.t_max);
    opts.event_tol = cfg.get_double("simulate.event_tol", opts.event_tol);
    opts.slide_tol = cfg.get_double("simulate.slide_tol", opts.slide_tol);
    opts.hysteresis = cfg.get_double("simulate.hysteresis", opts.hysteresis);
    opts.stop_radius = cfg.get_double("simulate.stop_radius", opts.stop_radius);
    opts.record_stride = cfg.get_size("simulate.record_stride", opts.record_stride);
    return opts;
}

inline void write_summary(const std::string& out_dir, const Json& summary) {
    std::filesystem::create_directories(out_dir);
    const std::string path = out_dir + "/summary.json";
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << summary.dump(2) << "\n";
}

template <typename Body>
int run_command(const CommandArgs& args, const std::string& name, Body&& body) {
    Json summary;
    summary["schema_version"] = 1;
    summary["command"] = name;
    summary["config"] = args.config_path;
    int code = kExitOk;
    try {
        const Config cfg = Config::parse_file(args.config_path);
        body(cfg, summary);
        for (const std::string& key : cfg.unused_keys())
            std::cerr << "warning: unused config key '" << key << "'\n";
    } catch (const ExitError& e) {
        code = e.code;
        summary["error"] = e.message;
        std::cerr << "error: " << e.message << "\n";
    } catch (const std::exception& e) {
        code = kExitUsage;
        summary["error"] = e.what();
        std::cerr << "error: " << e.what() << "\n";
    }
    summary["exit_code"] = code;
    try {
        write_summary(args.out_dir, summary);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (code == kExitOk) code = kExitUsage;
    }
    return code;
}

inline Json descent_json(const DescentReport& rep) {
    Json j;
    j["monotone"] = rep.monotone;
    j["max_uptick"] = rep.max_uptick;
    j["slack"] = rep.slack;
    j["w_positive"] = rep.w_positive;
    if (rep.w_witness_index) j["w_witness_index"] = *rep.w_witness_index;
    j["w_min_estimate"] = rep.w_min_estimate;
    j["linear_bound_ok"] = rep.linear_bound_ok;
    j["reached_stop"] = rep.reached_stop;
    j["t_stop"] = rep.t_stop;
    return j;
}

inline Json region_json(const RegionReport& rep) {
    Json j;
    j["total_samples"] = rep.total_samples;
    j["seed"] = rep.seed;
    j["all_pass"] = rep.all_pass;
    Json checks = Json::array();
    for (const LemmaCheck& c : rep.checks) {
        Json cj;
        cj["name"] = c.name;
        cj["statement"] = c.statement;
        cj["pass"] = c.pass;
        cj["samples_used"] = c.samples_used;
        cj["violations"] = c.violations;
        if (c.witness) cj["witness"] = vec_json(*c.witness);
        cj["worst_margin"] = c.worst;
        checks.push_back(std::move(cj));
    }
    j["checks"] = std::move(checks);
    return j;
}

}  // namespace detail_cli

inline int cmd_equilibrium(const CommandArgs& args) {
    using namespace detail_cli;
    return run_command(args, "equilibrium", [&](const Config& cfg, Json& summary) {
        const LoadedSystem ls = load_system(cfg);
        summary["system"] = Json{{"kind", ls.kind}, {"dim", ls.sys.dim}};
        const SwitchedEquilibrium eq = resolve_equilibrium(ls, cfg, summary);
        summary["equilibrium"] = equilibrium_json(ls.sys, eq);
    });
}

inline int cmd_synth(const CommandArgs& args) {
    using namespace detail_cli;
    return run_command(args, "synth", [&](const Config& cfg, Json& summary) {
        const LoadedSystem ls = load_system(cfg);
        summary["system"] = Json{{"kind", ls.kind}, {"dim", ls.sys.dim}};
        if (ls.kind == "affine" || ls.kind == "boost") {
            Json hurwitz = Json::array();
            hurwitz.push_back(is_hurwitz(ls.kind == "boost" ? ls.boost->a_minus
                                                            : ls.sys.minus.affine->A));
            hurwitz.push_back(is_hurwitz(ls.kind == "boost" ? ls.boost->a_plus
                                                            : ls.sys.plus.affine->A));
            summary["modes_hurwitz"] = std::move(hurwitz);
        }
        const SwitchedEquilibrium eq = resolve_equilibrium(ls, cfg, summary);
        summary["equilibrium"] = equilibrium_json(ls.sys, eq);
        (void)resolve_lyapunov(ls, eq, cfg, summary);
    });
}

inline int cmd_simulate(const CommandArgs& args) {
    using namespace detail_cli;
    return run_command(args, "simulate", [&](const Config& cfg, Json& summary) {
        const LoadedSystem ls = load_system(cfg);
        summary["system"] = Json{{"kind", ls.kind}, {"dim", ls.sys.dim}};
        const SwitchedEquilibrium eq = resolve_equilibrium(ls, cfg, summary);
        summary["equilibrium"] = equilibrium_json(ls.sys, eq);
        const QuadraticLyapunov l = resolve_lyapunov(ls, eq, cfg, summary);
        const SwitchingRule rule = resolve_rule(ls, l, eq, cfg, summary);

        const SimOptions opts = load_sim_options(cfg);
        const Vector x_init = cfg.get_vector("simulate.x_init", Vector(ls.sys.dim, 0.0));
        if (x_init.size() != ls.sys.dim)
            throw ExitError{kExitUsage, "simulate.x_init has the wrong dimension"};

        Trajectory traj;
        try {
            traj = simulate(ls.sys, rule, l, x_init, opts);
        } catch (const std::invalid_argument& e) {
            throw ExitError{kExitUsage, e.what()};
        }

        std::filesystem::create_directories(args.out_dir);
        write_trajectory_file(args.out_dir + "/trajectory.txt", traj);
        Json sim;
        sim["status"] = sim_status_name(traj.status);
        sim["stop_radius"] = traj.stop_radius;
        sim["samples_recorded"] = traj.samples.size();
        sim["sliding_steps"] = traj.sliding_lambda_trace.size();
        if (!traj.sliding_lambda_trace.empty())
            sim["sliding_lambda_final"] = traj.sliding_lambda_trace.back().second;
        sim["chattering"] = traj.chattering;
        Json events = Json::array();
        for (const TrajectoryEvent& ev : traj.events)
            events.push_back(Json{{"t", ev.t}, {"kind", event_kind_name(ev.kind)}});
        sim["events"] = std::move(events);
        if (!traj.samples.empty()) {
            sim["t_final"] = traj.samples.back().t;
            sim["x_final"] = vec_json(traj.samples.back().x);
            sim["distance_final"] = norm(traj.samples.back().x - eq.x0);
        }
        sim["trajectory_file"] = "trajectory.txt";
        if (ls.sys.dim == 2 && !traj.samples.empty()) {
            phase_plot(traj, rule, "closed-loop trajectory (" +
                                       cfg.get_string("rule.kind", "linear") + " rule)")
                .write(args.out_dir + "/phase.svg");
            sim["phase_plot"] = "phase.svg";
        }
        if (traj.status != SimStatus::diverged) {
            sim["descent"] = descent_json(descent_monitor(traj, l, ls.sys, rule));
        }
        summary["simulate"] = std::move(sim);
        if (traj.status == SimStatus::diverged)
            throw ExitError{kExitDivergence, "closed-loop trajectory diverged"};
    });
}

inline int cmd_verify(const CommandArgs& args) {
    using namespace detail_cli;
    return run_command(args, "verify", [&](const Config& cfg, Json& summary) {
        const LoadedSystem ls = load_system(cfg);
        summary["system"] = Json{{"kind", ls.kind}, {"dim", ls.sys.dim}};
        const SwitchedEquilibrium eq = resolve_equilibrium(ls, cfg, summary);
        summary["equilibrium"] = equilibrium_json(ls.sys, eq);
        const QuadraticLyapunov l = resolve_lyapunov(ls, eq, cfg, summary);
        const SwitchingRule rule = resolve_rule(ls, l, eq, cfg, summary);
        if (!rule.normal)
            throw ExitError{kExitUsage,
                            "verify needs a hyperplane rule (rule.kind = linear or reduced)"};

        const std::size_t samples = cfg.get_size("verify.samples", 10000);
        const std::uint64_t seed =
            args.seed ? *args.seed : static_cast<std::uint64_t>(cfg.get_size("verify.seed", 0));
        std::optional<SampleSpec> box;
        if (cfg.has("verify.box_center")) {
            box = make_box(cfg.get_vector("verify.box_center"),
                           cfg.get_vector("verify.box_halfwidth"), samples, seed);
        } else {
            const SphereRegion ball = omega_alpha_sphere(l, ls.sys.minus.eval(eq.x0));
            const double span = 5.0 * norm(ball.center - l.x0);
            box = make_box(eq.x0, Vector(ls.sys.dim, span), samples, seed);
        }

        RegionReport rep;
        try {
            rep = verify_lemmas(l, ls.sys, eq, rule, box);
        } catch (const std::exception& e) {
            throw ExitError{kExitUsage, e.what()};
        }
        summary["regions"] = region_json(rep);
        if (!rep.all_pass) std::cerr << "warning: region checks reported violations\n";

        if (ls.kind == "boost") {
            // Side-by-side look at the popular shortcut threshold for this
            // converter over the operating box.
            const SwitchingRule quad = quadratic_rule(l, ls.sys);
            const SwitchingRule shortcut = simplified_quadratic_threshold(*ls.boost_params, eq);
            const std::size_t n_cmp = cfg.get_size("verify.threshold_samples", 1000);
            const Vector c = cfg.get_vector("verify.threshold_box_center", Vector{0.5, 10.0});
            const Vector hw = cfg.get_vector("verify.threshold_box_halfwidth", Vector{0.5, 10.0});
            const ThresholdComparison cmp =
                compare_quadratic_threshold(quad, shortcut, make_box(c, hw, n_cmp, seed));
            Json tj;
            tj["shortcut_form"] = shortcut.closed_form;
            tj["points"] = cmp.points;
            tj["mismatches"] = cmp.mismatches;
            tj["mismatch_fraction"] =
                cmp.points == 0 ? 0.0
                                : static_cast<double>(cmp.mismatches) /
                                      static_cast<double>(cmp.points);
            Json wit = Json::array();
            for (const Vector& w : cmp.witnesses) wit.push_back(vec_json(w));
            tj["witnesses"] = std::move(wit);
            summary["shortcut_threshold"] = std::move(tj);
        }
    });
}

}  // namespace switchsurf::cli
