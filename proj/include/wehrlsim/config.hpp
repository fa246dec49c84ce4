#pragma once

// Flat key = value configuration. Sources are layered: defaults for the
// scenario, then a file, then WEHRLSIM_<KEY> environment variables, then
// explicit overrides. Unknown keys are rejected.

#include "scenarios.hpp"

#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace wehrlsim {

struct ConfigEntry {
    std::string key;
    std::string value;
    std::string origin; ///< "file:line", "env" or "override"
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

[[noreturn]] inline void bad_value(const ConfigEntry& e, std::string_view what) {
    throw Error(ErrorKind::ParseError, e.origin + ": key '" + e.key + "': " + std::string(what) +
                                           " (got '" + e.value + "')");
}

inline double parse_double(const ConfigEntry& e) {
    const char* s = e.value.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s, &end);
    if (end == s || *end != '\0' || errno == ERANGE) bad_value(e, "expected a number");
    return v;
}

inline int parse_int(const ConfigEntry& e) {
    int v = 0;
    const auto* first = e.value.data();
    const auto* last = first + e.value.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) bad_value(e, "expected an integer");
    return v;
}

inline bool parse_bool(const ConfigEntry& e) {
    const auto v = lower(e.value);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    bad_value(e, "expected a boolean");
}

inline std::vector<double> parse_list(const ConfigEntry& e) {
    std::vector<double> out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double({e.key, trim(item), e.origin}));
    if (out.empty()) bad_value(e, "expected a comma-separated list");
    return out;
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

using Setter = std::function<void(ScenarioConfig&, const ConfigEntry&)>;
using Getter = std::function<std::string(const ScenarioConfig&)>;

struct KeySpec {
    Setter set;
    Getter get;
};

template <class F>
KeySpec real_key(F field) {
    return {[field](ScenarioConfig& c, const ConfigEntry& e) { field(c) = parse_double(e); },
            [field](const ScenarioConfig& c) { return format_double(field(c)); }};
}

template <class F>
KeySpec int_key(F field) {
    return {[field](ScenarioConfig& c, const ConfigEntry& e) { field(c) = parse_int(e); },
            [field](const ScenarioConfig& c) { return std::to_string(field(c)); }};
}

template <class F>
KeySpec bool_key(F field) {
    return {[field](ScenarioConfig& c, const ConfigEntry& e) { field(c) = parse_bool(e); },
            [field](const ScenarioConfig& c) {
                return std::string(field(c) ? "true" : "false");
            }};
}

#define WEHRLSIM_FIELD(expr) [](auto& c) -> auto& { return expr; }

inline const std::map<std::string, KeySpec>& key_table() {
    static const std::map<std::string, KeySpec> table = [] {
        std::map<std::string, KeySpec> t;
        t["N"] = int_key(WEHRLSIM_FIELD(c.N));
        t["kappa"] = int_key(WEHRLSIM_FIELD(c.kappa));
        t["tau"] = real_key(WEHRLSIM_FIELD(c.potential.tau));
        t["calE"] = real_key(WEHRLSIM_FIELD(c.potential.calE));
        t["W"] = real_key(WEHRLSIM_FIELD(c.potential.W));
        t["mass"] = real_key(WEHRLSIM_FIELD(c.potential.mass));
        t["omega"] = real_key(WEHRLSIM_FIELD(c.potential.omega));
        t["gamma"] = real_key(WEHRLSIM_FIELD(c.diss.gamma));
        t["Lambda"] = real_key(WEHRLSIM_FIELD(c.diss.Lambda));
        t["beta_bath"] = real_key(WEHRLSIM_FIELD(c.diss.beta_bath));
        t["beta_init"] = real_key(WEHRLSIM_FIELD(c.beta_init));
        t["zeta"] = real_key(WEHRLSIM_FIELD(c.zeta));
        t["dt"] = real_key(WEHRLSIM_FIELD(c.integ.dt));
        t["sample_every"] = int_key(WEHRLSIM_FIELD(c.integ.sample_every));
        t["renormalize_trace"] = bool_key(WEHRLSIM_FIELD(c.integ.renormalize_trace));
        t["positivity_tol"] = real_key(WEHRLSIM_FIELD(c.integ.positivity_tol));
        t["substep_stiff"] = bool_key(WEHRLSIM_FIELD(c.integ.substep_stiff));
        t["n_theta"] = int_key(WEHRLSIM_FIELD(c.n_theta));
        t["n_phi"] = int_key(WEHRLSIM_FIELD(c.n_phi));
        t["rates_every"] = int_key(WEHRLSIM_FIELD(c.rates_every));
        t["sweep_min"] = real_key(WEHRLSIM_FIELD(c.sweep.min));
        t["sweep_max"] = real_key(WEHRLSIM_FIELD(c.sweep.max));
        t["sweep_points"] = int_key(WEHRLSIM_FIELD(c.sweep.points));
        t["sweep_log"] = bool_key(WEHRLSIM_FIELD(c.sweep.log));
        t["lambda_ratio"] = real_key(WEHRLSIM_FIELD(c.lambda_ratio));
        t["ness_window"] = int_key(WEHRLSIM_FIELD(c.ness.window));
        t["ness_tol"] = real_key(WEHRLSIM_FIELD(c.ness.tol));
        t["ness_cap"] = real_key(WEHRLSIM_FIELD(c.ness.cap));
        t["threads"] = int_key(WEHRLSIM_FIELD(c.threads));
        t["cont_L"] = real_key(WEHRLSIM_FIELD(c.continuum.half_width));
        t["cont_points"] = int_key(WEHRLSIM_FIELD(c.continuum.n_points));
        t["eig_levels"] = int_key(WEHRLSIM_FIELD(c.eig_levels));
        t["exp_radius"] = real_key(WEHRLSIM_FIELD(c.exp.radius));
        t["exp_wavelength"] = real_key(WEHRLSIM_FIELD(c.exp.wavelength));
        t["exp_na"] = real_key(WEHRLSIM_FIELD(c.exp.numerical_aperture));
        t["exp_epsilon"] = real_key(WEHRLSIM_FIELD(c.exp.epsilon));
        t["exp_pressure"] = real_key(WEHRLSIM_FIELD(c.exp.pressure));
        t["exp_temperature"] = real_key(WEHRLSIM_FIELD(c.exp.temperature));
        t["exp_gas_mass"] = real_key(WEHRLSIM_FIELD(c.exp.gas_mass));
        t["exp_density"] = real_key(WEHRLSIM_FIELD(c.exp.density));
        t["exp_omega"] = real_key(WEHRLSIM_FIELD(c.exp.omega));

        t["t_end"] = {[](ScenarioConfig& c, const ConfigEntry& e) { c.t_end = parse_double(e); },
                      [](const ScenarioConfig& c) { return format_double(c.resolved_t_end()); }};
        t["low_gammas"] = {[](ScenarioConfig& c, const ConfigEntry& e) { c.low_gammas = parse_list(e); },
                           [](const ScenarioConfig& c) {
                               std::string s;
                               for (double g : c.low_gammas) s += (s.empty() ? "" : ",") + format_double(g);
                               return s;
                           }};
        t["localization"] = {
            [](ScenarioConfig& c, const ConfigEntry& e) {
                if (e.value == "BareJx") c.diss.localization = LocalizationOperator::BareJx;
                else if (e.value == "Jxprime") c.diss.localization = LocalizationOperator::Jxprime;
                else bad_value(e, "expected BareJx or Jxprime");
            },
            [](const ScenarioConfig& c) {
                return std::string(c.diss.localization == LocalizationOperator::BareJx ? "BareJx" : "Jxprime");
            }};
        t["ladder"] = {
            [](ScenarioConfig& c, const ConfigEntry& e) {
                const auto v = lower(e.value);
                if (v == "auto") c.ladder = LadderChoice::Auto;
                else if (v == "spin") c.ladder = LadderChoice::Spin;
                else if (v == "oscillator") c.ladder = LadderChoice::Oscillator;
                else bad_value(e, "expected auto, spin or oscillator");
            },
            [](const ScenarioConfig& c) {
                switch (c.ladder) {
                case LadderChoice::Spin: return std::string("spin");
                case LadderChoice::Oscillator: return std::string("oscillator");
                default: return std::string("auto");
                }
            }};
        return t;
    }();
    return table;
}

#undef WEHRLSIM_FIELD

} // namespace detail

/// Parses `key = value` lines; `#` starts a comment.
inline std::vector<ConfigEntry> parse_config_text(std::string_view text, std::string_view source) {
    std::vector<ConfigEntry> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const std::string body = detail::trim(line);
        if (body.empty()) continue;
        const std::string origin = std::string(source) + ":" + std::to_string(line_no);
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::ParseError, origin + ": expected key = value, got '" + body + "'");
        ConfigEntry e{detail::trim(std::string_view(body).substr(0, eq)),
                      detail::trim(std::string_view(body).substr(eq + 1)), origin};
        if (e.key.empty()) throw Error(ErrorKind::ParseError, origin + ": empty key");
        out.push_back(std::move(e));
    }
    return out;
}

inline std::vector<ConfigEntry> read_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

inline bool is_config_key(std::string_view key) {
    return key == "scenario" || detail::key_table().count(std::string(key)) > 0;
}

/// WEHRLSIM_<KEY> variables, matched case-insensitively against known keys.
inline std::vector<ConfigEntry> environment_entries(
    const std::function<const char*(const char*)>& getenv_fn = [](const char* n) { return std::getenv(n); }) {
    std::vector<ConfigEntry> out;
    std::vector<std::string> keys{"scenario"};
    for (const auto& [k, _] : detail::key_table()) keys.push_back(k);
    for (const auto& k : keys) {
        std::string name = "WEHRLSIM_" + k;
        for (auto& c : name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        if (const char* v = getenv_fn(name.c_str())) out.push_back({k, v, "env " + name});
    }
    return out;
}

/// Resolves a configuration from layered entries (later entries win).
/// `scenario` must be given by some layer or by `fallback`.
inline ScenarioConfig build_config(const std::vector<ConfigEntry>& entries,
                                   std::optional<Scenario> fallback = std::nullopt) {
    std::optional<Scenario> scenario = fallback;
    for (const auto& e : entries) {
        if (e.key != "scenario") continue;
        scenario = scenario_from_string(e.value);
        if (!scenario) detail::bad_value(e, "unknown scenario");
    }
    if (!scenario) throw Error(ErrorKind::ValidationError, "no scenario given");

    ScenarioConfig cfg = ScenarioConfig::defaults(*scenario);
    const auto& table = detail::key_table();
    std::map<std::string, std::string> seen;
    for (const auto& e : entries) {
        if (e.key == "scenario") continue;
        const auto it = table.find(e.key);
        if (it == table.end())
            throw Error(ErrorKind::ParseError, e.origin + ": unknown key '" + e.key + "'");
        it->second.set(cfg, e);
    }
    // t_end of LowCoupling follows tau unless set explicitly
    if (*scenario == Scenario::LowCoupling) {
        const bool explicit_t_end = std::any_of(entries.begin(), entries.end(),
                                                [](const ConfigEntry& e) { return e.key == "t_end"; });
        if (!explicit_t_end) cfg.t_end = 4.0 * cfg.potential.tau;
    }
    cfg.validate();
    return cfg;
}

/// Every resolved key with its value; feeding it back to build_config
/// reproduces the configuration exactly.
inline std::vector<std::pair<std::string, std::string>> config_snapshot(const ScenarioConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> out;
    out.emplace_back("scenario", std::string(to_string(cfg.scenario)));
    for (const auto& [k, spec] : detail::key_table()) out.emplace_back(k, spec.get(cfg));
    return out;
}

inline std::string config_text(const ScenarioConfig& cfg) {
    std::string s;
    for (const auto& [k, v] : config_snapshot(cfg)) s += k + " = " + v + "\n";
    return s;
}

} // namespace wehrlsim
