#pragma once

// Flat key-value run configuration ("key = value", '#' comments).  Values are
// kept as the exact text supplied so output headers echo them verbatim.

#include <algorithm>
#include <charconv>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sinhpoisson/blowup.hpp"
#include "sinhpoisson/minimax.hpp"
#include "sinhpoisson/model.hpp"

namespace sinhp {

/// Recognised keys with their default text; an empty default means "unset".
inline const std::vector<std::pair<std::string, std::string>>& config_schema() {
    static const std::vector<std::pair<std::string, std::string>> keys = {
        // grid
        {"nx", "128"}, {"ny", "128"}, {"Lx", "1"}, {"Ly", "1"},
        // parameters: either lambda1/lambda2 or lambda/tau, plus gamma
        {"lambda1", ""}, {"lambda2", ""}, {"lambda", ""}, {"tau", ""}, {"gamma", "1"},
        // sweep end point
        {"lambda1_end", ""}, {"lambda2_end", ""}, {"steps", "10"},
        // solver
        {"path_nodes", "33"}, {"path_step", "0.01"}, {"max_path_step", "0.5"}, {"switch_tol", "0.001"},
        {"newton_tol", "1e-9"}, {"max_sweeps", "200"}, {"max_newton", "60"}, {"gmres_rtol", "1e-8"},
        {"gmres_restart", "60"}, {"gmres_max_iter", "600"}, {"eps_start", "0.125"},
        {"eps_shrink", "0.70710678118654757"}, {"downhill_r0", ""},
        // bubble scan
        {"scan_eps_max", "0.125"}, {"scan_eps_count", "5"}, {"scan_eps_ratio", "0.5"}, {"r0", "0.25"},
        {"p0x", ""}, {"p0y", ""},
        // analysis
        {"ball_radius", "0.2"}, {"threshold", "10"},
        // output
        {"output_dir", "."},
    };
    return keys;
}

class KeyValueConfig {
  public:
    KeyValueConfig() {
        for (const auto& [k, v] : config_schema())
            if (!v.empty()) values_[k] = v;
    }

    /// Reads "key = value" lines.  Unknown keys and malformed lines throw.
    void read(std::istream& is) {
        std::string line;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            const auto text = trim(line);
            if (text.empty()) continue;
            const auto eq = text.find('=');
            if (eq == std::string::npos)
                throw FormatError("config line " + std::to_string(lineno) + ": expected key = value");
            set(trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
        }
    }

    /// Applies a "key=value" override.
    void set_override(const std::string& kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw FormatError("override '" + kv + "' is not key=value");
        set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    }

    void set(const std::string& key, const std::string& value) {
        const auto& schema = config_schema();
        if (std::none_of(schema.begin(), schema.end(), [&](const auto& e) { return e.first == key; }))
            throw FormatError("unknown config key '" + key + "'");
        if (value.empty()) throw FormatError("config key '" + key + "' has no value");
        values_[key] = value;
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::string& text(const std::string& key) const { return values_.at(key); }

    double number(const std::string& key) const {
        const std::string& t = values_.at(key);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(t, &used);
        } catch (const std::exception&) {
            throw FormatError("config key '" + key + "': '" + t + "' is not a number");
        }
        if (used != t.size()) throw FormatError("config key '" + key + "': '" + t + "' is not a number");
        return v;
    }

    int integer(const std::string& key) const {
        const std::string& t = values_.at(key);
        int v = 0;
        const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc{} || ptr != t.data() + t.size())
            throw FormatError("config key '" + key + "': '" + t + "' is not an integer");
        return v;
    }

    std::optional<double> maybe_number(const std::string& key) const {
        return has(key) ? std::optional<double>(number(key)) : std::nullopt;
    }

    /// "# key = value" for every set key, in schema order.
    void echo(std::ostream& os) const {
        for (const auto& [k, def] : config_schema())
            if (auto it = values_.find(k); it != values_.end()) os << "# " << k << " = " << it->second << '\n';
    }

  private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return {};
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    std::map<std::string, std::string> values_;
};

/// Typed view of a KeyValueConfig.
struct RunConfig {
    KeyValueConfig raw;
    GridPtr grid;
    std::optional<Parameters> parameters;
    std::optional<TwoAtomMeasure> atoms;  // set when parameters came from lambda/tau
    MinimaxConfig solver;
    AnalysisOptions analysis;
    std::vector<double> scan_eps;
    double r0 = 0.25;
    Point p0;
    std::string output_dir;

    static RunConfig from(const KeyValueConfig& kv) {
        RunConfig c;
        c.raw = kv;
        c.grid = make_grid(kv.integer("nx"), kv.integer("ny"), kv.number("Lx"), kv.number("Ly"));
        const double volume = c.grid->volume();

        const bool pair_block = kv.has("lambda1") || kv.has("lambda2");
        const bool atom_block = kv.has("lambda") || kv.has("tau");
        require(!(pair_block && atom_block), "config: give either lambda1/lambda2 or lambda/tau, not both");
        const double gamma = kv.number("gamma");
        if (pair_block) {
            require(kv.has("lambda1") && kv.has("lambda2"), "config: lambda1 and lambda2 must both be set");
            c.parameters = Parameters::make(kv.number("lambda1"), kv.number("lambda2"), gamma, volume);
        } else if (atom_block) {
            require(kv.has("lambda") && kv.has("tau"), "config: lambda and tau must both be set");
            c.atoms = TwoAtomMeasure::make(kv.number("lambda"), kv.number("tau"), gamma);
            c.parameters = atoms_to_pair(*c.atoms, volume);
        }

        MinimaxConfig& s = c.solver;
        s.path_nodes = kv.integer("path_nodes");
        s.path_step = kv.number("path_step");
        s.max_path_step = kv.number("max_path_step");
        s.switch_tol = kv.number("switch_tol");
        s.newton_tol = kv.number("newton_tol");
        s.max_sweeps = kv.integer("max_sweeps");
        s.max_newton = kv.integer("max_newton");
        s.gmres.rtol = kv.number("gmres_rtol");
        s.gmres.restart = kv.integer("gmres_restart");
        s.gmres.max_iter = kv.integer("gmres_max_iter");
        s.downhill.eps_start = kv.number("eps_start");
        s.downhill.shrink = kv.number("eps_shrink");
        s.downhill.r0 = kv.maybe_number("downhill_r0");
        require(s.path_step > 0 && s.max_path_step > 0 && s.switch_tol > 0 && s.newton_tol > 0 && s.gmres.rtol > 0,
                "config: tolerances and steps must be positive");
        require(s.downhill.shrink > 0.0 && s.downhill.shrink < 1.0, "config: eps_shrink must lie in (0, 1)");
        require(s.max_sweeps >= 0 && s.max_newton >= 0 && s.gmres.restart > 0 && s.gmres.max_iter > 0,
                "config: iteration limits must be positive");

        c.p0 = Point{kv.maybe_number("p0x").value_or(0.5 * c.grid->lx()),
                     kv.maybe_number("p0y").value_or(0.5 * c.grid->ly())};
        if (kv.has("p0x") || kv.has("p0y")) s.downhill.p0 = c.p0;
        c.r0 = kv.number("r0");
        const int count = kv.integer("scan_eps_count");
        const double ratio = kv.number("scan_eps_ratio");
        require(count >= 5, "config: scan_eps_count must be >= 5");
        require(ratio > 0.0 && ratio < 1.0, "config: scan_eps_ratio must lie in (0, 1)");
        double e = kv.number("scan_eps_max");
        for (int i = 0; i < count; ++i, e *= ratio) c.scan_eps.push_back(e);

        c.analysis.radius = kv.number("ball_radius");
        c.analysis.threshold_factor = kv.number("threshold");
        require(c.analysis.radius > 0.0 && c.analysis.threshold_factor > 0.0,
                "config: ball_radius and threshold must be positive");
        c.output_dir = kv.text("output_dir");
        return c;
    }

    const Parameters& params() const {
        require(parameters.has_value(), "config: this command needs lambda1/lambda2 or lambda/tau");
        return *parameters;
    }
};

}  // namespace sinhp
