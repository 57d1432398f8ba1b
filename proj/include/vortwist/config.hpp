#pragma once

// Run configuration read from JSON. Unknown keys are errors; missing
// sections take the defaults of the test probe (gamma = 0.01, epsilon = 1).

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "vortwist/errors.hpp"
#include "vortwist/mather.hpp"
#include "vortwist/model.hpp"
#include "vortwist/poincare.hpp"

namespace vortwist {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kOutputDirEnv = "VORTWIST_OUTPUT_DIR";

using json = nlohmann::json;

struct RunConfig {
    Perturbation perturbation = Perturbation::quartic_probe(0.01, 1.0);
    FlowOptions integrator;
    StripOptions strip;
    /// theta samples of the boundary-frequency window
    std::size_t window_theta = 64;
    OrbitOptions solver;
    std::string output_dir = "out";
    /// normalized form, defaults filled in; output_dir excluded
    json canonical;
    std::string hash;
};

namespace detail {

inline void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("bad type for '" + std::string(key) + "' in " + where);
    }
}

inline std::vector<Monomial> parse_terms(const json& arr, const std::string& where) {
    if (!arr.is_array()) throw ConfigError(where + " must be an array");
    std::vector<Monomial> out;
    for (std::size_t k = 0; k < arr.size(); ++k) {
        const std::string w = where + "[" + std::to_string(k) + "]";
        const json& t = arr[k];
        check_keys(t, w, {"i", "j", "a0", "cos", "sin"});
        if (!t.contains("i") || !t.contains("j")) throw ConfigError(w + " needs exponents i and j");
        Monomial m;
        m.i = get_or<int>(t, "i", 0, w);
        m.j = get_or<int>(t, "j", 0, w);
        m.coef.a0 = get_or<double>(t, "a0", 0.0, w);
        m.coef.cos_terms = get_or<std::vector<double>>(t, "cos", {}, w);
        m.coef.sin_terms = get_or<std::vector<double>>(t, "sin", {}, w);
        out.push_back(std::move(m));
    }
    return out;
}

inline json terms_json(const std::vector<Monomial>& terms) {
    json arr = json::array();
    for (const auto& m : terms)
        arr.push_back({{"i", m.i}, {"j", m.j}, {"a0", m.coef.a0}, {"cos", m.coef.cos_terms}, {"sin", m.coef.sin_terms}});
    return arr;
}

/// FNV-1a, 64 bit.
inline std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

}  // namespace detail

inline json config_to_json(const RunConfig& c) {
    json j;
    j["perturbation"] = {{"degree", c.perturbation.degree()},
                         {"epsilon", c.perturbation.epsilon()},
                         {"terms", detail::terms_json(c.perturbation.leading())},
                         {"remainder", detail::terms_json(c.perturbation.remainder())}};
    j["integrator"] = {{"rtol", c.integrator.rtol}, {"atol", c.integrator.atol}, {"max_step", c.integrator.max_step}};
    j["strip"] = {{"probe_r", c.strip.probe_r},
                  {"probe_theta", c.strip.probe_theta},
                  {"probe_span", c.strip.probe_span},
                  {"window_theta", c.window_theta}};
    if (c.strip.r_bar_override) j["strip"]["r_bar"] = *c.strip.r_bar_override;
    j["solver"] = {{"newton_tol", c.solver.newton_tol}, {"max_iter", c.solver.max_iter}, {"damping", c.solver.damping}};
    return j;
}

/// Parses a config document. `env_output_dir` overrides output_dir when set.
inline RunConfig parse_config(const json& doc, std::optional<std::string> env_output_dir = std::nullopt) {
    detail::check_keys(doc, "config", {"perturbation", "integrator", "strip", "solver", "output_dir"});
    RunConfig c;
    if (doc.contains("perturbation")) {
        const json& p = doc["perturbation"];
        detail::check_keys(p, "perturbation", {"degree", "epsilon", "terms", "remainder"});
        const int degree = detail::get_or<int>(p, "degree", 4, "perturbation");
        const double eps = detail::get_or<double>(p, "epsilon", 1.0, "perturbation");
        std::vector<Monomial> lead, rem;
        if (p.contains("terms")) lead = detail::parse_terms(p["terms"], "perturbation.terms");
        if (p.contains("remainder")) rem = detail::parse_terms(p["remainder"], "perturbation.remainder");
        c.perturbation = Perturbation(std::move(lead), std::move(rem), eps, degree);
    }
    if (doc.contains("integrator")) {
        const json& g = doc["integrator"];
        detail::check_keys(g, "integrator", {"rtol", "atol", "max_step"});
        c.integrator.rtol = detail::get_or<double>(g, "rtol", c.integrator.rtol, "integrator");
        c.integrator.atol = detail::get_or<double>(g, "atol", c.integrator.atol, "integrator");
        c.integrator.max_step = detail::get_or<double>(g, "max_step", c.integrator.max_step, "integrator");
    }
    if (!(c.integrator.rtol > 0.0 && c.integrator.atol > 0.0 && c.integrator.max_step > 0.0))
        throw ConfigError("integrator tolerances and max_step must be positive");
    if (doc.contains("strip")) {
        const json& s = doc["strip"];
        detail::check_keys(s, "strip", {"r_bar", "probe_r", "probe_theta", "probe_span", "window_theta"});
        if (s.contains("r_bar")) c.strip.r_bar_override = detail::get_or<double>(s, "r_bar", 0.0, "strip");
        c.strip.probe_r = detail::get_or<std::size_t>(s, "probe_r", c.strip.probe_r, "strip");
        c.strip.probe_theta = detail::get_or<std::size_t>(s, "probe_theta", c.strip.probe_theta, "strip");
        c.strip.probe_span = detail::get_or<double>(s, "probe_span", c.strip.probe_span, "strip");
        c.window_theta = detail::get_or<std::size_t>(s, "window_theta", c.window_theta, "strip");
    }
    if (c.strip.probe_r < 2 || c.strip.probe_theta < 1 || !(c.strip.probe_span > 1.0) || c.window_theta < 4)
        throw ConfigError("strip probe grids are too small");
    if (doc.contains("solver")) {
        const json& s = doc["solver"];
        detail::check_keys(s, "solver", {"newton_tol", "max_iter", "damping"});
        c.solver.newton_tol = detail::get_or<double>(s, "newton_tol", c.solver.newton_tol, "solver");
        c.solver.max_iter = detail::get_or<int>(s, "max_iter", c.solver.max_iter, "solver");
        c.solver.damping = detail::get_or<double>(s, "damping", c.solver.damping, "solver");
    }
    if (!(c.solver.newton_tol > 0.0) || c.solver.max_iter < 1 || !(c.solver.damping > 0.0 && c.solver.damping <= 1.0))
        throw ConfigError("solver needs newton_tol > 0, max_iter >= 1, damping in (0, 1]");
    c.output_dir = detail::get_or<std::string>(doc, "output_dir", c.output_dir, "config");
    if (env_output_dir && !env_output_dir->empty()) c.output_dir = *env_output_dir;
    c.canonical = config_to_json(c);
    c.hash = detail::fnv1a_hex(c.canonical.dump());
    return c;
}

inline std::optional<std::string> output_dir_from_env() {
    const char* v = std::getenv(kOutputDirEnv);
    if (v == nullptr) return std::nullopt;
    return std::string(v);
}

/// Reads and parses `path`. A missing or unreadable file is a ConfigError
/// naming the path.
inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(doc, output_dir_from_env());
}

inline RunConfig default_config() { return parse_config(json::object(), output_dir_from_env()); }

}  // namespace vortwist
