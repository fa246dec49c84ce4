#pragma once

// CSV tables for trajectories, populations and sweeps. Numbers carry 17
// significant digits, '.' decimals and '\n' line endings so identical runs
// give identical bytes.

#include "scenarios.hpp"

#include <filesystem>
#include <fstream>
#include <limits>

namespace wehrlsim {

inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) {
        if (row.size() != columns.size())
            throw Error(ErrorKind::DimensionMismatch, "table row has " + std::to_string(row.size()) +
                                                          " cells, expected " +
                                                          std::to_string(columns.size()));
        rows.push_back(std::move(row));
    }

    std::string to_csv() const {
        std::string out;
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t k = 0; k < cells.size(); ++k) {
                if (k) out += ',';
                out += cells[k];
            }
            out += '\n';
        };
        line(columns);
        for (const auto& r : rows) line(r);
        return out;
    }
};

inline std::vector<std::string> numbers(std::initializer_list<double> values) {
    std::vector<std::string> out;
    for (double v : values) out.push_back(format_number(v));
    return out;
}

inline const std::vector<std::string>& trajectory_columns() {
    static const std::vector<std::string> cols{
        "time",   "energy", "S_Q",    "S_vN",   "dS_U",         "dS_th",        "dS_lc",
        "Pi_th",  "Phi_th", "Pi_lc",  "coherence_l1", "fidelity_ref", "trace_err", "min_eig"};
    return cols;
}

inline Table trajectory_table(const RunResult& run) {
    Table t{trajectory_columns(), {}};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& r : run.rows) {
        // rates are only evaluated every rates_every samples
        const EntropyRates q = r.has_rates ? r.rates : EntropyRates{nan, nan, nan, nan, nan, nan};
        t.add(numbers({r.time, r.energy, r.S_Q, r.S_vN, q.dS_U, q.dS_th, q.dS_lc, q.Pi_th, q.Phi_th, q.Pi_lc,
                       r.coherence_l1, r.fidelity_ref, r.trace_err, r.min_eig}));
    }
    return t;
}

inline Table populations_table(const RunResult& run) {
    Table t{{"time", "level_index", "probability"}, {}};
    for (const auto& r : run.rows)
        for (std::size_t k = 0; k < r.populations.size(); ++k)
            t.add({format_number(r.time), std::to_string(k), format_number(r.populations[k])});
    return t;
}

inline std::string flag(bool b) { return b ? "1" : "0"; }

inline Table lambda_sweep_table(const LambdaSweepResult& res) {
    Table t{{"sweep_param", "lambda_over_gamma", "t_final", "ness", "cap_hit", "coherence_l1",
             "fidelity_thermal", "fidelity_mixed", "S_Q", "S_vN", "energy", "Pi_th", "Phi_th",
             "Pi_lc", "residual", "S_Q_thermal_ref", "S_Q_mixed_ref"},
            {}};
    for (const auto& p : res.points) {
        auto row = numbers({p.Lambda, p.ratio, p.t_final});
        row.push_back(flag(p.ness));
        row.push_back(flag(p.cap_hit));
        for (auto& s : numbers({p.coherence_l1, p.fidelity_thermal, p.fidelity_mixed, p.S_Q, p.S_vN,
                                p.energy, p.rates.Pi_th, p.rates.Phi_th, p.rates.Pi_lc, p.residual,
                                res.S_Q_thermal, res.S_Q_mixed}))
            row.push_back(std::move(s));
        t.add(std::move(row));
    }
    return t;
}

inline Table coupling_sweep_table(const CouplingSweepResult& res) {
    Table t{{"sweep_param", "branch", "gamma", "Lambda", "fidelity_tau", "coherence_tau", "S_Q_tau",
             "t_final", "ness", "cap_hit", "fidelity_final", "coherence_final", "S_Q_final"},
            {}};
    for (const auto& p : res.points) {
        std::vector<std::string> row{format_number(p.coupling), std::string(to_string(p.branch))};
        for (auto& s : numbers({p.gamma, p.Lambda, p.fidelity_tau, p.coherence_tau, p.S_Q_tau, p.t_final}))
            row.push_back(std::move(s));
        row.push_back(flag(p.ness));
        row.push_back(flag(p.cap_hit));
        for (auto& s : numbers({p.fidelity_final, p.coherence_final, p.S_Q_final})) row.push_back(std::move(s));
        t.add(std::move(row));
    }
    return t;
}

inline Table squeeze_sweep_table(const SqueezeSweepResult& res) {
    Table t{{"sweep_param", "energy_initial", "energy", "coherence_l1", "S_Q"}, {}};
    for (const auto& p : res.points)
        t.add(numbers({p.zeta, p.energy_initial, p.energy, p.coherence_l1, p.S_Q}));
    return t;
}

inline Table eigen_table(const std::vector<EigenRow>& rows) {
    Table t{{"time", "level_index", "spin_energy", "continuous_energy", "rel_error"}, {}};
    for (const auto& r : rows)
        t.add({format_number(r.time), std::to_string(r.level), format_number(r.spin),
               format_number(r.continuous), format_number(r.rel_error)});
    return t;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path.string() + "'");
    out << text;
    out.close();
    if (!out) throw Error(ErrorKind::IoError, "write failed for '" + path.string() + "'");
}

inline void write_csv(const std::filesystem::path& path, const Table& table) {
    write_text(path, table.to_csv());
}

} // namespace wehrlsim
