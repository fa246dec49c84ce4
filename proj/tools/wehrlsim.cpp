// Command-line front end: list, simulate, sweep, eigs, expparams.

#include <wehrlsim/runner.hpp>

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace wehrlsim;

struct CommonOptions {
    std::string scenario;
    std::string config_path;
    std::string manifest_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    int threads = -1;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("-s,--scenario", o.scenario, "scenario name (see `list`)");
    cmd->add_option("-c,--config", o.config_path, "key = value configuration file");
    cmd->add_option("-m,--manifest", o.manifest_path, "re-run the config embedded in a manifest.json");
    cmd->add_option("--set", o.overrides, "override a key, e.g. --set gamma=0.1 (repeatable)");
    cmd->add_option("-o,--out", o.out_dir, "output directory (default out/<scenario>)");
    cmd->add_option("-j,--threads", o.threads, "worker threads for sweeps (0: all cores)");
}

ScenarioConfig resolve(const CommonOptions& o, Verb verb, std::optional<Scenario> fallback) {
    std::vector<ConfigEntry> entries;
    if (!o.manifest_path.empty()) {
        auto m = manifest_entries(o.manifest_path);
        entries.insert(entries.end(), m.begin(), m.end());
    }
    if (!o.config_path.empty()) {
        auto f = read_config_file(o.config_path);
        entries.insert(entries.end(), f.begin(), f.end());
    }
    auto env = environment_entries();
    entries.insert(entries.end(), env.begin(), env.end());
    for (const auto& s : o.overrides) {
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::ParseError, "--set expects key=value, got '" + s + "'");
        entries.push_back({s.substr(0, eq), s.substr(eq + 1), "--set"});
    }
    if (!o.scenario.empty()) entries.push_back({"scenario", o.scenario, "--scenario"});
    if (o.threads >= 0) entries.push_back({"threads", std::to_string(o.threads), "--threads"});

    ScenarioConfig cfg = build_config(entries, fallback);
    if (verb_for(cfg.scenario) != verb)
        throw Error(ErrorKind::ValidationError,
                    std::string(to_string(cfg.scenario)) + " runs under `" +
                        std::string(to_string(verb_for(cfg.scenario))) + "`, not `" +
                        std::string(to_string(verb)) + "`");
    return cfg;
}

int execute(const CommonOptions& o, Verb verb, std::optional<Scenario> fallback) {
    const ScenarioConfig cfg = resolve(o, verb, fallback);
    const std::filesystem::path dir =
        o.out_dir.empty() ? std::filesystem::path("out") / std::string(to_string(cfg.scenario))
                          : std::filesystem::path(o.out_dir);
    const RunManifest m = run_scenario(cfg, dir);
    for (const auto& f : m.outputs) std::cout << (dir / f).string() << "\n";
    if (cfg.scenario == Scenario::ExpParams) std::cout << m.results.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wehrl-entropy thermodynamics of a spin-discretized double well"};
    app.require_subcommand(1);

    CommonOptions simulate_opts, sweep_opts, eigs_opts, exp_opts;
    auto* list_cmd = app.add_subcommand("list", "print the scenarios and their figure layouts");
    auto* simulate_cmd = app.add_subcommand("simulate", "run a trajectory scenario");
    auto* sweep_cmd = app.add_subcommand("sweep", "run a parameter sweep scenario");
    auto* eigs_cmd = app.add_subcommand("eigs", "compare spin and continuous spectra");
    auto* exp_cmd = app.add_subcommand("expparams", "experimental parameter calculator");
    add_common(simulate_cmd, simulate_opts);
    add_common(sweep_cmd, sweep_opts);
    add_common(eigs_cmd, eigs_opts);
    add_common(exp_cmd, exp_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (list_cmd->parsed()) {
            std::cout << list_scenarios();
            return 0;
        }
        if (simulate_cmd->parsed()) return execute(simulate_opts, Verb::Simulate, std::nullopt);
        if (sweep_cmd->parsed()) return execute(sweep_opts, Verb::Sweep, std::nullopt);
        if (eigs_cmd->parsed()) return execute(eigs_opts, Verb::Eigs, Scenario::EigenCompare);
        if (exp_cmd->parsed()) return execute(exp_opts, Verb::ExpParams, Scenario::ExpParams);
    } catch (const Error& e) {
        std::cerr << "error[" << to_string(e.kind()) << "]: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error[IoError]: " << e.what() << "\n";
        return exit_code(ErrorKind::IoError);
    } catch (const std::exception& e) {
        std::cerr << "error[Internal]: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
