#pragma once

// Runs a configured scenario, writes its tables and a JSON manifest.

#include "config.hpp"
#include "io.hpp"

#include <json.hpp>

#include <chrono>

namespace wehrlsim {

inline constexpr std::string_view kVersion = "1.0.0";

enum class Verb { Simulate, Sweep, Eigs, ExpParams };

inline std::string_view to_string(Verb v) {
    switch (v) {
    case Verb::Simulate: return "simulate";
    case Verb::Sweep: return "sweep";
    case Verb::Eigs: return "eigs";
    case Verb::ExpParams: return "expparams";
    }
    return "unknown";
}

inline Verb verb_for(Scenario s) {
    switch (s) {
    case Scenario::LambdaSweep:
    case Scenario::CouplingSweep:
    case Scenario::SqueezeSweep:
        return Verb::Sweep;
    case Scenario::EigenCompare:
        return Verb::Eigs;
    case Scenario::ExpParams:
        return Verb::ExpParams;
    default:
        return Verb::Simulate;
    }
}

struct RunManifest {
    nlohmann::ordered_json config;
    std::string version{kVersion};
    double wall_seconds = 0.0;
    std::vector<std::string> outputs;
    nlohmann::ordered_json convergence = nlohmann::ordered_json::object();
    nlohmann::ordered_json results = nlohmann::ordered_json::object();

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["artifact"] = "wehrlsim";
        j["version"] = version;
        j["scenario"] = config.value("scenario", "");
        j["config"] = config;
        j["wall_clock_seconds"] = wall_seconds;
        j["outputs"] = outputs;
        j["convergence"] = convergence;
        j["results"] = results;
        return j;
    }
};

inline nlohmann::ordered_json config_json(const ScenarioConfig& cfg) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [k, v] : config_snapshot(cfg)) j[k] = v;
    return j;
}

/// Config entries from a manifest's embedded snapshot.
inline std::vector<ConfigEntry> manifest_entries(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open manifest '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, path + ": " + e.what());
    }
    if (!j.contains("config") || !j["config"].is_object())
        throw Error(ErrorKind::ParseError, path + ": manifest has no config object");
    std::vector<ConfigEntry> out;
    for (const auto& [k, v] : j["config"].items()) {
        if (!v.is_string()) throw Error(ErrorKind::ParseError, path + ": config value of '" + k + "' is not a string");
        out.push_back({k, v.get<std::string>(), path + ":config"});
    }
    return out;
}

namespace detail {

inline nlohmann::ordered_json ness_json(const RunResult& run) {
    nlohmann::ordered_json j;
    j["t_final"] = run.t_final();
    j["checked"] = run.ness.has_value();
    if (run.ness) {
        j["is_ness"] = run.ness->is_ness;
        j["residual"] = run.ness->residual;
        j["max_rate"] = run.ness->max_rate;
        j["rho_dot"] = run.ness->rho_dot;
    }
    j["cap_hit"] = run.cap_hit;
    return j;
}

class OutputSink {
public:
    OutputSink(std::filesystem::path dir, RunManifest& m) : dir_(std::move(dir)), manifest_(m) {}

    void csv(const std::string& name, const Table& t) {
        write_csv(dir_ / name, t);
        manifest_.outputs.push_back(name);
    }
    void text(const std::string& name, const std::string& s) {
        write_text(dir_ / name, s);
        manifest_.outputs.push_back(name);
    }
    void trajectory(const RunResult& run) {
        csv(run.label + "_trajectory.csv", trajectory_table(run));
        csv(run.label + "_populations.csv", populations_table(run));
    }

private:
    std::filesystem::path dir_;
    RunManifest& manifest_;
};

} // namespace detail

/// Executes the scenario and writes every output plus manifest.json into
/// `out_dir`. Returns the manifest that was written.
inline RunManifest run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    RunManifest m;
    m.config = config_json(cfg);
    detail::OutputSink sink(out_dir, m);

    switch (cfg.scenario) {
    case Scenario::SpinStudy: {
        const auto r = run_spin_study(cfg);
        sink.trajectory(r.thermal);
        sink.trajectory(r.localization);
        sink.trajectory(r.combined);
        m.convergence["combined"] = detail::ness_json(r.combined);
        break;
    }
    case Scenario::DoubleWellIsolated:
    case Scenario::DoubleWellCombined: {
        const auto r = run_doublewell(cfg, cfg.scenario == Scenario::DoubleWellIsolated);
        sink.trajectory(r);
        const auto& pops = r.rows.back().populations;
        m.results["final_peaks"] = profile_peaks(pops);
        break;
    }
    case Scenario::LowCoupling: {
        const auto r = run_low_coupling(cfg);
        for (const auto& run : r.runs) {
            sink.trajectory(run);
            nlohmann::ordered_json j;
            j["gamma"] = run.diss.gamma;
            j["Lambda"] = run.diss.Lambda;
            j["final_peaks"] = profile_peaks(run.rows.back().populations);
            const auto late = late_rates(run, run.t_final() - 0.5 * cfg.potential.tau);
            j["late_dS_U"] = late.dS_U;
            j["late_dS_D"] = late.dS_D;
            m.results[run.label] = j;
        }
        break;
    }
    case Scenario::LambdaSweep: {
        const auto r = run_lambda_sweep(cfg);
        sink.csv("sweep.csv", lambda_sweep_table(r));
        int steady = 0, capped = 0;
        for (const auto& p : r.points) {
            steady += p.ness;
            capped += p.cap_hit;
        }
        m.convergence["ness_points"] = steady;
        m.convergence["cap_hit_points"] = capped;
        m.results["argmax_lambda_over_gamma"] = r.points[r.argmax_coherence()].ratio;
        break;
    }
    case Scenario::CouplingSweep: {
        const auto r = run_coupling_sweep(cfg);
        sink.csv("sweep.csv", coupling_sweep_table(r));
        int steady = 0, capped = 0;
        for (const auto& p : r.points) {
            steady += p.ness;
            capped += p.cap_hit;
        }
        m.convergence["ness_points"] = steady;
        m.convergence["cap_hit_points"] = capped;
        break;
    }
    case Scenario::SqueezeSweep: {
        const auto r = run_squeeze_sweep(cfg);
        sink.csv("sweep.csv", squeeze_sweep_table(r));
        m.results["argmax_zeta"] = r.points[r.argmax_coherence()].zeta;
        break;
    }
    case Scenario::EigenCompare: {
        const auto rows = run_eigen_compare(cfg);
        sink.csv("eigs.csv", eigen_table(rows));
        double worst = 0.0;
        for (const auto& row : rows) worst = std::max(worst, row.rel_error);
        m.results["max_rel_error"] = worst;
        break;
    }
    case Scenario::ExpParams: {
        const auto e = compute_exp_params(cfg.exp);
        nlohmann::ordered_json j;
        j["Lambda_over_omega"] = e.Lambda_over_omega;
        j["gamma_exp"] = e.gamma_exp;
        j["thermalization_rate_over_omega"] = e.thermalization_rate_over_omega;
        j["n_th"] = e.n_th;
        j["gas_velocity"] = e.gas_velocity;
        sink.text("expparams.json", j.dump(2) + "\n");
        m.results = j;
        break;
    }
    }

    m.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    m.outputs.push_back("manifest.json");
    write_text(out_dir / "manifest.json", m.to_json().dump(2) + "\n");
    return m;
}

inline std::string list_scenarios() {
    std::string out;
    for (const auto& info : scenario_table()) {
        out += std::string(info.name) + " → " + std::string(info.figure) + "    " + std::string(info.summary) + "\n";
    }
    return out;
}

} // namespace wehrlsim
