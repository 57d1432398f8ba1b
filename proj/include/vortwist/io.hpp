#pragma once

// CSV and JSON artifacts. Numbers go through to_chars, so output is
// locale-free and round-trips exactly.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "vortwist/config.hpp"
#include "vortwist/flow.hpp"
#include "vortwist/generating.hpp"
#include "vortwist/mather.hpp"
#include "vortwist/poincare.hpp"

namespace vortwist {

inline std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

class CsvWriter {
public:
    explicit CsvWriter(const std::vector<std::string>& header) { row_strings(header); }

    void row(const std::vector<double>& values) {
        std::vector<std::string> s;
        s.reserve(values.size());
        for (double v : values) s.push_back(fmt(v));
        row_strings(s);
    }

    void row_strings(const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (k) text_ += ',';
            text_ += cells[k];
        }
        text_ += '\n';
    }

    const std::string& str() const { return text_; }

private:
    std::string text_;
};

/// Writes `text` to dir/name, creating dir. Returns the full path.
inline std::string write_artifact(const std::string& dir, const std::string& name, const std::string& text) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path path = std::filesystem::path(dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("write failed for " + path.string());
    return path.string();
}

/// Stable JSON text: sorted keys, two-space indent, trailing newline.
inline std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

inline std::string trajectory_csv(const Trajectory& tr) {
    CsvWriter w({"t", "r", "theta", "y11", "y12", "y21", "y22", "action"});
    for (const auto& p : tr.points) {
        const AugmentedState& s = p.state;
        w.row({p.t, s.r, s.theta, s.Y[0][0], s.Y[0][1], s.Y[1][0], s.Y[1][1], s.action});
    }
    return w.str();
}

inline std::string samples_csv(const std::vector<GeneratingSample>& samples) {
    CsvWriter w({"x", "x1", "R", "h", "d1h", "d2h", "d12h"});
    for (const auto& g : samples) w.row({g.x, g.x1, g.R, g.h, g.d1h, g.d2h, g.d12h});
    return w.str();
}

/// Rows are radii, columns angles; the corner cell labels the axes.
inline std::string twist_csv(const TwistScan& scan) {
    std::vector<std::string> header{"r0\\theta0"};
    for (double th : scan.theta_grid) header.push_back(fmt(th));
    CsvWriter w(header);
    for (std::size_t i = 0; i < scan.r_grid.size(); ++i) {
        std::vector<std::string> row{fmt(scan.r_grid[i])};
        for (std::size_t k = 0; k < scan.theta_grid.size(); ++k) row.push_back(fmt(scan.dG_dr0[i][k]));
        w.row_strings(row);
    }
    return w.str();
}

inline std::string window_csv(const FrequencyWindow& w) {
    const bool cap = w.r_cap.has_value();
    std::vector<std::string> header{"theta", "alpha_minus"};
    if (cap) header.push_back("alpha_cap");
    CsvWriter out(header);
    for (std::size_t k = 0; k < w.theta_grid.size(); ++k) {
        std::vector<double> row{w.theta_grid[k], w.alpha_minus[k]};
        if (cap) row.push_back(w.alpha_cap[k]);
        out.row(row);
    }
    return out.str();
}

inline std::string hull_csv(const HullSamples& h) {
    CsvWriter w({"xi", "phi", "eta"});
    for (std::size_t j = 0; j < h.xi.size(); ++j) w.row({h.xi[j], h.phi[j], h.eta[j]});
    return w.str();
}

inline std::string orbit_csv(const Orbit& o) {
    CsvWriter w({"n", "x", "x_mod_2pi", "r"});
    for (long n = 0; n < o.q; ++n) {
        const auto k = static_cast<std::size_t>(n);
        w.row({static_cast<double>(n), o.x[k], wrap_2pi(o.x[k]), o.r[k]});
    }
    return w.str();
}

inline json orbit_json(const Orbit& o) {
    return {{"s", o.s},
            {"q", o.q},
            {"x", o.x},
            {"r", o.r},
            {"action", o.action},
            {"el_residual", o.el_residual},
            {"map_residual", o.map_residual}};
}

inline json mather_json(const MatherSet& m) {
    json conv = json::array(), orbits = json::array();
    for (const auto& c : m.convergents) conv.push_back({{"s", c.s}, {"q", c.q}});
    for (const auto& o : m.orbits) orbits.push_back(orbit_json(o));
    return {{"alpha", m.alpha},
            {"convergents", conv},
            {"orbits", orbits},
            {"gaps", m.gaps},
            {"largest_gap", m.largest_gap},
            {"gap_threshold", m.gap_threshold},
            {"classification", to_string(m.classification)},
            {"hull_monotonicity_violations", m.hull.monotonicity_violations}};
}

/// One check of a diagnostic report.
struct Check {
    std::string name;
    json values;
    double threshold = 0.0;
    bool pass = false;
};

inline json check_json(const Check& c) {
    return {{"name", c.name}, {"values", c.values}, {"threshold", c.threshold}, {"pass", c.pass}};
}

inline json report_json(const std::vector<Check>& checks) {
    json arr = json::array();
    bool all = true;
    for (const auto& c : checks) {
        arr.push_back(check_json(c));
        all = all && c.pass;
    }
    return {{"checks", arr}, {"pass", all}};
}

/// Wraps command results with the config hash and tool version.
inline json summary_json(const std::string& command, const RunConfig& cfg, const json& args, const json& results) {
    return {{"command", command},
            {"tool_version", kToolVersion},
            {"config_hash", cfg.hash},
            {"config", cfg.canonical},
            {"args", args},
            {"results", results}};
}

}  // namespace vortwist
