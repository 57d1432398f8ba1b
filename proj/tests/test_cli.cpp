#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "vortwist/config.hpp"
#include "vortwist/io.hpp"

using namespace vortwist;
namespace fs = std::filesystem;

namespace {

const std::string kCli = VORTWIST_CLI_PATH;
const std::string kConfigs = VORTWIST_CONFIG_DIR;

struct CliResult {
    int code;
    std::string output;
};

CliResult run(const std::string& args, const fs::path& out_dir) {
    const fs::path log = out_dir.string() + ".log";
    const std::string cmd = "VORTWIST_OUTPUT_DIR=\"" + out_dir.string() + "\" \"" + kCli + "\" " + args + " > \"" +
                            log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("vortwist_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    fs::path out(const std::string& tag) const { return dir_ / tag; }
    fs::path dir_;
};

std::string integrable() { return "--config \"" + kConfigs + "/integrable.json\""; }
std::string probe() { return "--config \"" + kConfigs + "/probe.json\""; }

}  // namespace

TEST_F(Cli, SimulateIntegrable) {
    const CliResult r = run(integrable() + " simulate --r0 3.141592653589793 --t1 1", out("a"));
    ASSERT_EQ(r.code, 0) << r.output;
    const std::string csv = slurp(out("a") / "trajectory.csv");
    EXPECT_EQ(csv.rfind("t,r,theta,y11,y12,y21,y22,action\n", 0), 0u);
    const std::string last = csv.substr(csv.rfind('\n', csv.size() - 2) + 1);
    double t, rr, th;
    ASSERT_EQ(std::sscanf(last.c_str(), "%lf,%lf,%lf", &t, &rr, &th), 3);
    EXPECT_EQ(t, 1.0);
    EXPECT_NEAR(rr, kPi, 1e-12);
    EXPECT_NEAR(th, kTwoPi, 1e-9);
}

TEST_F(Cli, DenseOutputHasManyRows) {
    ASSERT_EQ(run(probe() + " simulate --r0 10 --dense", out("a")).code, 0);
    const std::string csv = slurp(out("a") / "trajectory.csv");
    EXPECT_GT(std::count(csv.begin(), csv.end(), '\n'), 50);
    EXPECT_EQ(csv.find('\r'), std::string::npos);
}

TEST_F(Cli, ExitCodes) {
    const CliResult missing = run("--config /no/such/config.json simulate --r0 5", out("a"));
    EXPECT_EQ(missing.code, 1);
    EXPECT_NE(missing.output.find("/no/such/config.json"), std::string::npos);
    EXPECT_EQ(run(probe() + " simulate --r0 0.52", out("b")).code, 2);
    EXPECT_EQ(run("simulate", out("c")).code, 1);
    EXPECT_EQ(run(probe() + " orbit --s 2 --q 4", out("d")).code, 1);
    EXPECT_EQ(run(probe() + " orbit --s 1 --q 3", out("e")).code, 2);
}

TEST_F(Cli, OrbitArchive) {
    ASSERT_EQ(run(integrable() + " orbit --s 1 --q 1", out("a")).code, 0);
    const json arch = json::parse(slurp(out("a") / "orbit_1_1.json"));
    ASSERT_EQ(arch["r"].size(), 1u);
    EXPECT_NEAR(arch["r"][0].get<double>(), kPi, 1e-9);
    for (const char* k : {"s", "q", "x", "r", "action", "el_residual", "map_residual"}) EXPECT_TRUE(arch.contains(k)) << k;
    const std::string samples = slurp(out("a") / "h_samples_1_1.csv");
    EXPECT_EQ(samples.rfind("x,x1,R,h,d1h,d2h,d12h\n", 0), 0u);
}

TEST_F(Cli, MatherArchive) {
    ASSERT_EQ(run(probe() + " mather --alpha 1.618033988749895 --depth 6", out("a")).code, 0);
    const json arch = json::parse(slurp(out("a") / "mather.json"));
    EXPECT_EQ(arch["orbits"].size(), 6u);
    EXPECT_EQ(arch["convergents"].size(), 6u);
    EXPECT_TRUE(fs::exists(out("a") / "hull.csv"));
}

TEST_F(Cli, VerifyIntegrablePasses) {
    const CliResult r = run(integrable() + " verify", out("a"));
    EXPECT_EQ(r.code, 0) << r.output;
    const json rep = json::parse(slurp(out("a") / "verify_report.json"));
    EXPECT_TRUE(rep["results"]["pass"].get<bool>());
    for (const auto& c : rep["results"]["checks"])
        for (const char* k : {"name", "values", "threshold", "pass"}) EXPECT_TRUE(c.contains(k));
}

TEST_F(Cli, VerifyFailureExitCode) {
    // loose tolerances break the symplectic and exactness checks of the perturbed map
    const fs::path cfg = dir_ / "loose.json";
    std::ofstream(cfg) << R"({"integrator": {"rtol": 1e-4, "atol": 1e-4, "max_step": 0.5}})";
    EXPECT_EQ(run("--config \"" + cfg.string() + "\" verify", out("a")).code, 3);
    const json rep = json::parse(slurp(out("a") / "verify_report.json"));
    EXPECT_FALSE(rep["results"]["pass"].get<bool>());
}

TEST_F(Cli, SummariesAreReproducible) {
    ASSERT_EQ(run(probe() + " twist-scan --r 10,100", out("a")).code, 0);
    ASSERT_EQ(run(probe() + " --jobs 3 twist-scan --r 10,100", out("b")).code, 0);
    const std::string a = slurp(out("a") / "twist_summary.json");
    EXPECT_EQ(a, slurp(out("b") / "twist_summary.json"));
    EXPECT_EQ(slurp(out("a") / "twist.csv"), slurp(out("b") / "twist.csv"));
    const json s = json::parse(a);
    EXPECT_EQ(s["tool_version"], kToolVersion);
    EXPECT_EQ(s["config_hash"].get<std::string>().size(), 16u);
    for (const char* k : {"sup_dev", "W_minus", "alpha_threshold", "r_bar"}) EXPECT_TRUE(s["results"].contains(k)) << k;
}

TEST_F(Cli, OtherCommands) {
    EXPECT_EQ(run(probe() + " window --r-cap 40", out("w")).code, 0);
    EXPECT_TRUE(fs::exists(out("w") / "window.csv"));
    EXPECT_EQ(run(probe() + " exactness --n 2", out("e")).code, 0);
    EXPECT_EQ(run(probe() + " rl-check", out("r")).code, 0);
    EXPECT_TRUE(fs::exists(out("r") / "rl.csv"));
    EXPECT_EQ(run(probe() + " report", out("p")).code, 0);
    for (const char* f : {"twist_decay.gp", "orbit_portraits.gp", "hull.gp"}) EXPECT_TRUE(fs::exists(out("p") / f)) << f;
}

TEST(Config, DefaultsAndHash) {
    const RunConfig a = parse_config(json::object());
    const RunConfig b = parse_config(json::parse(R"({"perturbation": {"degree": 4, "epsilon": 1.0,
        "terms": [{"i": 4, "j": 0, "a0": 0.0, "cos": [0.01], "sin": []}], "remainder": []}})"));
    EXPECT_EQ(a.hash, b.hash);
    EXPECT_EQ(a.perturbation.leading().size(), 1u);
    const RunConfig c = parse_config(json::parse(R"({"integrator": {"rtol": 1e-9}})"));
    EXPECT_NE(a.hash, c.hash);
    const RunConfig d = parse_config(json::parse(R"({"output_dir": "elsewhere"})"), std::string("env_dir"));
    EXPECT_EQ(d.output_dir, "env_dir");
    EXPECT_EQ(d.hash, a.hash);
}

TEST(Config, Rejections) {
    EXPECT_THROW(parse_config(json::parse(R"({"bogus": 1})")), ConfigError);
    EXPECT_THROW(parse_config(json::parse(R"({"perturbation": {"degree": 5}})")), ConfigError);
    EXPECT_THROW(parse_config(json::parse(R"({"perturbation": {"epsilon": 0}})")), ConfigError);
    EXPECT_THROW(parse_config(json::parse(R"({"perturbation": {"terms": [{"i": 3, "j": 0}]}})")), ConfigError);
    EXPECT_THROW(parse_config(json::parse(R"({"perturbation": {"remainder": [{"i": 2, "j": 2}]}})")), ConfigError);
    EXPECT_THROW(parse_config(json::parse(R"({"integrator": {"atol": -1}})")), ConfigError);
    EXPECT_THROW(parse_config(json::parse(R"({"integrator": {"rtol": "x"}})")), ConfigError);
    EXPECT_THROW(parse_config(json::parse(R"({"solver": {"damping": 0}})")), ConfigError);
    EXPECT_THROW(load_config("/no/such/file.json"), ConfigError);
}

TEST(Io, NumberFormatting) {
    EXPECT_EQ(fmt(0.1), "0.1");
    EXPECT_EQ(fmt(-2.5e-12), "-2.5e-12");
    EXPECT_EQ(std::stod(fmt(kPi)), kPi);
    CsvWriter w({"a", "b"});
    w.row({1.0, 0.5});
    EXPECT_EQ(w.str(), "a,b\n1,0.5\n");
}
