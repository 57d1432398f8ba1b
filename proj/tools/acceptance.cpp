// Acceptance runner: one PASS/FAIL line per criterion, exit 0 iff all pass.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <sys/wait.h>

#include "vortwist/verify.hpp"

#ifndef VORTWIST_CLI_PATH
#error "VORTWIST_CLI_PATH must name the CLI binary"
#endif
#ifndef VORTWIST_PROBE_CONFIG
#error "VORTWIST_PROBE_CONFIG must name the probe config"
#endif

using namespace vortwist;

namespace {

struct Line {
    int id;
    std::string title;
    bool pass;
    std::string detail;
    double seconds;
    double limit;
};

bool report(const Line& l) {
    const bool in_time = l.limit <= 0.0 || l.seconds < l.limit;
    const bool ok = l.pass && in_time;
    std::printf("[%s] %2d %s: %s (%.2f s", ok ? "PASS" : "FAIL", l.id, l.title.c_str(), l.detail.c_str(), l.seconds);
    if (l.limit > 0.0) std::printf(" / limit %.0f s", l.limit);
    std::printf(")\n");
    std::fflush(stdout);
    return ok;
}

std::string values_of(const Check& c, std::initializer_list<const char*> keys) {
    std::string out;
    for (const char* k : keys) {
        if (!c.values.contains(k)) continue;
        if (!out.empty()) out += ", ";
        out += std::string(k) + "=" + c.values[k].dump();
    }
    if (c.values.contains("error")) out += " error=" + c.values["error"].get<std::string>();
    return out;
}

Line from_check(int id, const std::string& title, const TimedCheck& t, std::initializer_list<const char*> keys,
                double limit) {
    return {id, title, t.check.pass, values_of(t.check, keys), t.seconds, limit};
}

Line run_verify_subprocess() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::filesystem::path out = std::filesystem::temp_directory_path() / "vortwist_acceptance_verify";
    std::filesystem::remove_all(out);
    setenv(kOutputDirEnv, out.string().c_str(), 1);
    const std::string cmd = std::string("\"") + VORTWIST_CLI_PATH + "\" --config \"" + VORTWIST_PROBE_CONFIG +
                            "\" verify > \"" + (out.string() + ".log") + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    unsetenv(kOutputDirEnv);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    const bool report_written = std::filesystem::exists(out / "verify_report.json");
    return {10, "end-to-end verify", code == 0 && report_written,
            "exit=" + std::to_string(code) + " report=" + (report_written ? "written" : "missing"), secs, 300.0};
}

}  // namespace

int main() {
    const RunConfig cfg = load_config(VORTWIST_PROBE_CONFIG);
    const unsigned jobs = resolve_jobs(0);
    const Context ctx = Context::build(cfg, jobs);
    std::printf("probe: gamma cos(2 pi t) x^4, gamma = 0.01, epsilon = 1; r_bar = %.4f, alpha threshold = %.4f\n",
                ctx.strip.r_bar, ctx.window.alpha_threshold);

    bool all = true;
    all &= report(from_check(1, "integrable exactness", run_check("c1", [&] { return check_integrable(ctx, 10, 1e-9); }),
                             {"max_map_error", "max_monodromy_error", "max_action_error"}, 5.0));
    all &= report(from_check(2, "symplectic defect", run_check("c2", [&] { return check_symplectic(ctx, 20, 1e-8); }),
                             {"max_relative_defect"}, 30.0));
    all &= report(from_check(3, "map exactness", run_check("c3", [&] { return check_exactness(ctx, 20, 1e-6); }),
                             {"max_residual"}, 0.0));
    all &= report(from_check(4, "twist limit", run_check("c4", [&] { return check_twist(ctx, 64, 0.01); }),
                             {"sup_dev", "strictly_decreasing"}, 60.0));
    all &= report(from_check(5, "generating-function identities",
                             run_check("c5", [&] { return check_generating(ctx, 100, 1e-7, 1e-9); }),
                             {"max_d1h_error", "max_d2h_error", "max_d12h", "max_closed_form_error"}, 0.0));
    {
        const TimedCheck t = run_check("c6", [&] { return check_orbits(ctx); });
        std::string d;
        if (t.check.values.contains("orbits")) {
            for (const auto& o : t.check.values["orbits"]) {
                if (!d.empty()) d += "; ";
                d += o["s"].dump() + "/" + o["q"].dump();
                if (o.contains("error")) {
                    d += " error=" + o["error"].get<std::string>();
                    continue;
                }
                char buf[160];
                std::snprintf(buf, sizeof buf, " el=%.1e map=%.1e rot=%.1e", o["el_residual"].get<double>(),
                              o["map_residual"].get<double>(), o["rotation_error"].get<double>());
                d += buf;
            }
        }
        all &= report({6, "orbit correctness", t.check.pass, d, t.seconds, 120.0});
    }
    all &= report(from_check(7, "hull-function relation", run_check("c7", [&] { return check_hull(ctx, 6, 1e-5); }),
                             {"convergents", "hull_residual", "monotonicity_violations"}, 0.0));
    all &= report(from_check(8, "Riemann-Lebesgue decay", run_check("c8", [] { return check_riemann_lebesgue(-0.9, 10.0); }),
                             {"fitted_exponent", "C_RL_hat"}, 10.0));
    all &= report(from_check(9, "splitting decay", run_check("c9", [&] { return check_splitting(ctx, 3.0); }),
                             {"ratio"}, 0.0));
    all &= report(run_verify_subprocess());
    std::printf("%s\n", all ? "all criteria pass" : "some criteria fail");
    return all ? 0 : 1;
}
