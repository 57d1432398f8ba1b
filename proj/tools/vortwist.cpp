#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vortwist/config.hpp"
#include "vortwist/io.hpp"
#include "vortwist/verify.hpp"

using namespace vortwist;

namespace {

enum Exit { kOk = 0, kUsage = 1, kDomain = 2, kVerifyFailed = 3 };

struct Global {
    std::string config_path;
    unsigned jobs = 0;
};

RunConfig load(const Global& g) { return g.config_path.empty() ? default_config() : load_config(g.config_path); }

void emit_summary(const RunConfig& cfg, const std::string& name, const std::string& command, const json& args,
                  const json& results) {
    const std::string path = write_artifact(cfg.output_dir, name, dump_json(summary_json(command, cfg, args, results)));
    std::cout << "summary: " << path << "\n";
}

json mat_json(const Mat2& m) { return json::array({json::array({m[0][0], m[0][1]}), json::array({m[1][0], m[1][1]})}); }

json strip_json(const Context& ctx) {
    const WorkingStrip& s = ctx.strip;
    return {{"C1", ctx.flow.bounds().c1}, {"a_star", s.a_star}, {"a1", s.a1}, {"a2", s.a2},
            {"K", s.K},                   {"r_bar", s.r_bar},   {"r_bar_overridden", s.overridden}};
}

int cmd_simulate(const Global& g, double r0, double theta0, double t1, bool dense) {
    const RunConfig cfg = load(g);
    const VortexFlow flow(cfg.perturbation, cfg.integrator);
    if (!(t1 > 0.0)) throw ConfigError("--t1 must be positive");
    if (!(r0 > flow.a_star()))
        throw DomainExit("r0 = " + fmt(r0) + " is not above a* = " + fmt(flow.a_star()));
    const std::vector<double> stop{t1};
    const Trajectory tr = flow.integrate(AugmentedState{r0, theta0}, 0.0, t1, dense, stop);
    write_artifact(cfg.output_dir, "trajectory.csv", trajectory_csv(tr));
    const AugmentedState& f = tr.final_state;
    std::cout << "final r = " << fmt(f.r) << " theta = " << fmt(f.theta) << "\n";
    emit_summary(cfg, "simulate_summary.json", "simulate",
                 {{"r0", r0}, {"theta0", theta0}, {"t1", t1}, {"dense", dense}},
                 {{"r", f.r},
                  {"theta", f.theta},
                  {"Y", mat_json(f.Y)},
                  {"action", f.action},
                  {"rows", tr.points.size()},
                  {"a_star", flow.a_star()}});
    return kOk;
}

int cmd_twist(const Global& g, std::vector<double> radii, std::size_t n_theta) {
    const Context ctx = Context::build(load(g), g.jobs);
    const TwistScan scan = twist_scan(ctx.flow, radii, uniform_angles(n_theta), ctx.jobs, 3);
    write_artifact(ctx.config.output_dir, "twist.csv", twist_csv(scan));
    CsvWriter decay({"r0", "sup_dev"});
    for (std::size_t i = 0; i < scan.r_grid.size(); ++i) decay.row({scan.r_grid[i], scan.sup_dev_by_r[i]});
    write_artifact(ctx.config.output_dir, "twist_decay.csv", decay.str());
    emit_summary(ctx.config, "twist_summary.json", "twist-scan", {{"r", radii}, {"n_theta", n_theta}},
                 {{"sup_dev", scan.sup_dev},
                  {"sup_dev_by_r", scan.sup_dev_by_r},
                  {"strictly_decreasing", scan.strictly_decreasing()},
                  {"min_twist", scan.min_twist},
                  {"missing", scan.missing},
                  {"fd_max_discrepancy", scan.fd_max_discrepancy},
                  {"decay_exponent", scan.decay_exponent},
                  {"W_minus", ctx.window.W_minus},
                  {"alpha_threshold", ctx.window.alpha_threshold},
                  {"r_bar", ctx.strip.r_bar}});
    return kOk;
}

int cmd_exactness(const Global& g, std::size_t n, double step) {
    const RunConfig cfg = load(g);
    const VortexFlow flow(cfg.perturbation, cfg.integrator);
    const ExactnessReport rep = exactness_residual(flow, linear_points(5.0, 100.0, n), uniform_angles(n), step, true,
                                                   resolve_jobs(g.jobs));
    CsvWriter w({"r0", "theta0", "residual_r", "residual_theta"});
    for (const auto& p : rep.points) w.row({p.r0, p.theta0, p.residual_r, p.residual_theta});
    write_artifact(cfg.output_dir, "exactness.csv", w.str());
    emit_summary(cfg, "exactness_summary.json", "exactness", {{"n", n}, {"step", step}},
                 {{"max_residual", rep.max_residual}, {"at_r0", rep.at_r0}, {"at_theta0", rep.at_theta0}});
    return kOk;
}

int cmd_window(const Global& g, std::optional<double> r_cap) {
    const Context ctx = Context::build(load(g), g.jobs);
    FrequencyWindow w = ctx.window;
    if (r_cap) w = boundary_frequencies(ctx.flow, ctx.strip.r_bar, uniform_angles(ctx.config.window_theta), r_cap, ctx.jobs);
    write_artifact(ctx.config.output_dir, "window.csv", window_csv(w));
    json args = json::object();
    if (r_cap) args["r_cap"] = *r_cap;
    emit_summary(ctx.config, "window_summary.json", "window", args,
                 {{"strip", strip_json(ctx)},
                  {"W_minus", w.W_minus},
                  {"alpha_threshold", w.alpha_threshold},
                  {"theorem_threshold", w.theorem_threshold},
                  {"periodicity_defect", w.periodicity_defect},
                  {"W_plus_unbounded", w.W_plus_unbounded},
                  {"r_bar", w.r_bar}});
    return kOk;
}

int cmd_orbit(const Global& g, long s, long q, double x0) {
    const Context ctx = Context::build(load(g), g.jobs);
    OrbitOptions opt = ctx.orbit_options();
    opt.x0 = x0;
    const Orbit o = periodic_orbit(ctx.gf, ctx.window, s, q, std::nullopt, opt);
    const OrbitReport rep = orbit_residuals(ctx.gf, o);
    const std::string tag = std::to_string(s) + "_" + std::to_string(q);
    write_artifact(ctx.config.output_dir, "orbit_" + tag + ".json", dump_json(orbit_json(o)));
    write_artifact(ctx.config.output_dir, "orbit_" + tag + ".csv", orbit_csv(o));
    std::vector<GeneratingSample> samples;
    for (long n = 0; n < q; ++n)
        samples.push_back(ctx.gf.h_eval(o.x[static_cast<std::size_t>(n)], o.x[static_cast<std::size_t>(n + 1)]));
    write_artifact(ctx.config.output_dir, "h_samples_" + tag + ".csv", samples_csv(samples));
    emit_summary(ctx.config, "orbit_summary.json", "orbit", {{"s", s}, {"q", q}, {"x0", x0}},
                 {{"orbit", orbit_json(o)},
                  {"iterations", o.iterations},
                  {"used_fallback", o.used_fallback},
                  {"clamp_events", o.clamp_events},
                  {"inside_theorem_window", o.inside_theorem_window},
                  {"translation", rep.translation},
                  {"translation_ok", rep.translation_ok},
                  {"comparable", rep.comparable},
                  {"alpha_threshold", ctx.window.alpha_threshold},
                  {"theorem_threshold", ctx.window.theorem_threshold}});
    return kOk;
}

int cmd_mather(const Global& g, double alpha, std::size_t depth, long q_cap) {
    const Context ctx = Context::build(load(g), g.jobs);
    const MatherSet ms = mather_set(ctx.gf, ctx.window, alpha, depth, ctx.orbit_options(), q_cap);
    const double hull_res = hull_map_residual(ctx.flow, ms.hull, ctx.jobs);
    write_artifact(ctx.config.output_dir, "mather.json", dump_json(mather_json(ms)));
    write_artifact(ctx.config.output_dir, "hull.csv", hull_csv(ms.hull));
    for (const auto& o : ms.orbits)
        write_artifact(ctx.config.output_dir, "orbit_" + std::to_string(o.s) + "_" + std::to_string(o.q) + ".csv",
                       orbit_csv(o));
    emit_summary(ctx.config, "mather_summary.json", "mather", {{"alpha", alpha}, {"depth", depth}, {"q_cap", q_cap}},
                 {{"orbits", ms.orbits.size()},
                  {"classification", to_string(ms.classification)},
                  {"largest_gap", ms.largest_gap},
                  {"gap_threshold", ms.gap_threshold},
                  {"hull_residual", hull_res},
                  {"monotonicity_violations", ms.hull.monotonicity_violations}});
    return kOk;
}

int finish_checks(const RunConfig& cfg, const std::string& command, const std::string& file,
                  const std::vector<TimedCheck>& checks) {
    std::vector<Check> plain;
    bool all = true;
    for (const auto& c : checks) {
        std::cout << (c.check.pass ? "PASS " : "FAIL ") << c.check.name << "\n";
        std::cerr << "  " << c.check.name << ": " << fmt(c.seconds) << " s\n";
        plain.push_back(c.check);
        all = all && c.check.pass;
    }
    emit_summary(cfg, file, command, json::object(), report_json(plain));
    return all ? kOk : kVerifyFailed;
}

int cmd_rl_check(const Global& g) {
    const Context ctx = Context::build(load(g), g.jobs);
    const OscillatoryResult r = oscillatory_decay(OscillatoryProbe::standard());
    CsvWriter w({"lambda", "integral", "envelope"});
    for (std::size_t k = 0; k < r.lambdas.size(); ++k) w.row({r.lambdas[k], r.integrals[k], r.envelope[k]});
    write_artifact(ctx.config.output_dir, "rl.csv", w.str());
    std::vector<TimedCheck> checks;
    checks.push_back(run_check("riemann_lebesgue_decay", [] { return check_riemann_lebesgue(); }));
    checks.push_back(run_check("splitting_decay", [&] { return check_splitting(ctx); }));
    checks.push_back(run_check("monodromy_limit", [&] { return check_monodromy(ctx); }));
    return finish_checks(ctx.config, "rl-check", "rl_summary.json", checks);
}

int cmd_verify(const Global& g) {
    const Context ctx = Context::build(load(g), g.jobs);
    return finish_checks(ctx.config, "verify", "verify_report.json", run_suite(ctx));
}

int cmd_report(const Global& g) {
    const RunConfig cfg = load(g);
    const std::string twist =
        "set datafile separator ','\n"
        "set logscale xy\n"
        "set xlabel 'r0'\n"
        "set ylabel 'sup |dG/dr0 - 2|'\n"
        "set title 'twist decay'\n"
        "plot 'twist_decay.csv' skip 1 using 1:2 with linespoints title 'sup dev'\n"
        "pause -1\n";
    const std::string orbits =
        "set datafile separator ','\n"
        "set xlabel 'x mod 2 pi'\n"
        "set ylabel 'r'\n"
        "set xrange [0:2*pi]\n"
        "set title 'orbit portraits'\n"
        "files = system('ls orbit_*.csv 2>/dev/null')\n"
        "plot for [f in files] f skip 1 using 3:4 with points pt 7 ps 0.6 title f\n"
        "pause -1\n";
    const std::string hull =
        "set datafile separator ','\n"
        "set xlabel 'xi'\n"
        "set title 'hull functions'\n"
        "set key left top\n"
        "set y2tics\n"
        "plot 'hull.csv' skip 1 using 1:2 with linespoints title 'phi', \\\n"
        "     'hull.csv' skip 1 using 1:3 axes x1y2 with linespoints title 'eta'\n"
        "pause -1\n";
    write_artifact(cfg.output_dir, "twist_decay.gp", twist);
    write_artifact(cfg.output_dir, "orbit_portraits.gp", orbits);
    write_artifact(cfg.output_dir, "hull.gp", hull);
    emit_summary(cfg, "report_summary.json", "report", json::object(),
                 {{"scripts", {"twist_decay.gp", "orbit_portraits.gp", "hull.gp"}}});
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Poincare map, generating function and Aubry-Mather orbits of a forced point vortex"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);
    Global g;
    app.add_option("--config", g.config_path, "JSON run configuration");
    app.add_option("--jobs", g.jobs, "worker threads (0: all cores)");

    double r0 = 0.0, theta0 = 0.0, t1 = 1.0;
    bool dense = false;
    auto* sim = app.add_subcommand("simulate", "integrate one trajectory and write trajectory.csv");
    sim->add_option("--r0", r0, "initial r")->required();
    sim->add_option("--theta0", theta0, "initial theta");
    sim->add_option("--t1", t1, "final time");
    sim->add_flag("--dense", dense, "record every accepted step");

    std::vector<double> radii{10.0, 100.0, 1000.0};
    std::size_t n_theta = 64;
    auto* tw = app.add_subcommand("twist-scan", "dG/dr0 on an (r0, theta0) grid");
    tw->add_option("--r", radii, "radii")->delimiter(',');
    tw->add_option("--n-theta", n_theta, "number of angles")->check(CLI::PositiveNumber);

    std::size_t n_grid = 6;
    double step = 1e-3;
    auto* ex = app.add_subcommand("exactness", "finite-difference check of dS = f(r1) dtheta1 - f(r0) dtheta0");
    ex->add_option("--n", n_grid, "grid size per axis")->check(CLI::PositiveNumber);
    ex->add_option("--step", step, "difference step");

    std::optional<double> r_cap;
    auto* win = app.add_subcommand("window", "working strip and boundary frequencies");
    win->add_option("--r-cap", r_cap, "upper radius of the domain B");

    long s = 0, q = 0;
    double x0 = 0.0;
    auto* orb = app.add_subcommand("orbit", "(s,q)-periodic orbit");
    orb->add_option("--s", s, "revolutions")->required();
    orb->add_option("--q", q, "period")->required();
    orb->add_option("--x0", x0, "first point of the equispaced start");

    double alpha = 0.0;
    std::size_t depth = 6;
    long q_cap = 377;
    auto* ma = app.add_subcommand("mather", "Mather set from convergent orbits");
    ma->add_option("--alpha", alpha, "rotation number")->required();
    ma->add_option("--depth", depth, "number of convergents")->check(CLI::PositiveNumber);
    ma->add_option("--q-cap", q_cap, "largest admissible denominator");

    auto* rl = app.add_subcommand("rl-check", "oscillatory decay, splitting and monodromy diagnostics");
    auto* ver = app.add_subcommand("verify", "full invariant suite");
    auto* rep = app.add_subcommand("report", "gnuplot scripts for the CSV outputs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*sim) return cmd_simulate(g, r0, theta0, t1, dense);
        if (*tw) return cmd_twist(g, radii, n_theta);
        if (*ex) return cmd_exactness(g, n_grid, step);
        if (*win) return cmd_window(g, r_cap);
        if (*orb) return cmd_orbit(g, s, q, x0);
        if (*ma) return cmd_mather(g, alpha, depth, q_cap);
        if (*rl) return cmd_rl_check(g);
        if (*ver) return cmd_verify(g);
        if (*rep) return cmd_report(g);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kUsage;
    } catch (const DomainExit& e) {
        std::cerr << "DomainExit: " << e.what() << "\n";
        return kDomain;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDomain;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
