#pragma once

// Scenario drivers: the spin study, the Lambda sweep, the double-well runs,
// the coupling and squeezing sweeps, the spectrum comparison against the
// continuous model and the experimental parameter calculator.

#include "observables.hpp"
#include "phasespace.hpp"

#include <array>
#include <atomic>
#include <limits>
#include <optional>
#include <thread>

namespace wehrlsim {

enum class Scenario {
    SpinStudy,
    LambdaSweep,
    DoubleWellIsolated,
    DoubleWellCombined,
    CouplingSweep,
    LowCoupling,
    SqueezeSweep,
    EigenCompare,
    ExpParams,
};

struct ScenarioInfo {
    Scenario id;
    std::string_view name;
    std::string_view figure;
    std::string_view summary;
};

inline const std::array<ScenarioInfo, 9>& scenario_table() {
    static const std::array<ScenarioInfo, 9> table{{
        {Scenario::SpinStudy, "SpinStudy", "Fig. 2", "j=3/2 thermal, localization and combined relaxation"},
        {Scenario::LambdaSweep, "LambdaSweep", "Fig. 3", "steady-state coherence vs Lambda/gamma"},
        {Scenario::DoubleWellIsolated, "DoubleWellIsolated", "Fig. 4", "closed double-well protocol, N=25"},
        {Scenario::DoubleWellCombined, "DoubleWellCombined", "Fig. 4", "double-well protocol with both dissipators"},
        {Scenario::CouplingSweep, "CouplingSweep", "Fig. 5", "fidelity to the closed run vs coupling strength"},
        {Scenario::LowCoupling, "LowCoupling", "Fig. 6", "weak coupling, Lambda=10 gamma, to 4 tau"},
        {Scenario::SqueezeSweep, "SqueezeSweep", "Fig. 6", "squeezed initial states, zeta in [-1, 1]"},
        {Scenario::EigenCompare, "EigenCompare", "Fig. 1", "spin vs continuous instantaneous spectra"},
        {Scenario::ExpParams, "ExpParams", "-", "experimental Lambda, gamma_exp and thermalization rate"},
    }};
    return table;
}

inline std::string_view to_string(Scenario s) {
    for (const auto& info : scenario_table())
        if (info.id == s) return info.name;
    return "Unknown";
}

inline std::optional<Scenario> scenario_from_string(std::string_view name) {
    for (const auto& info : scenario_table())
        if (info.name == name) return info.id;
    return std::nullopt;
}

inline bool is_spin_model(Scenario s) {
    return s == Scenario::SpinStudy || s == Scenario::LambdaSweep;
}

// ---------------------------------------------------------------------------
// Experimental calculator (SI units)

inline constexpr double kBoltzmann = 1.380649e-23;
inline constexpr double kHbar = 1.054571817e-34;
inline constexpr double kAtomicMass = 1.66053906660e-27;

struct ExpParams {
    double radius = 50e-9;
    double wavelength = 1550e-9;
    double numerical_aperture = 0.75;
    /// Relative permittivity of fused silica at 1550 nm (n = 1.444).
    double epsilon = 1.444 * 1.444;
    double pressure = 3e-7; // 3e-9 mbar
    double temperature = 60.0;
    double gas_mass = 28.0134 * kAtomicMass; // N2
    double density = 2200.0;
    /// Effective trap frequency with the additional potential at alpha = 1.
    double omega = 2.0 * kPi * 77.6e3;

    double epsilon_c() const { return (epsilon - 1.0) / (3.0 * (epsilon + 2.0)); }
    double particle_mass() const { return 4.0 / 3.0 * kPi * radius * radius * radius * density; }

    std::vector<std::string> violations() const {
        std::vector<std::string> bad;
        auto need = [&](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v)) bad.emplace_back(name);
        };
        need(radius, "exp_radius");
        need(wavelength, "exp_wavelength");
        need(numerical_aperture, "exp_na");
        if (!(epsilon > 1.0)) bad.emplace_back("exp_epsilon");
        need(pressure, "exp_pressure");
        need(temperature, "exp_temperature");
        need(gas_mass, "exp_gas_mass");
        need(density, "exp_density");
        need(omega, "exp_omega");
        return bad;
    }
};

struct ExpResult {
    double Lambda_over_omega;
    double gas_velocity;  ///< m/s
    double gamma_exp;     ///< Hz
    double n_th;          ///< k_B T / (hbar omega)
    double thermalization_rate_over_omega;
};

inline ExpResult compute_exp_params(const ExpParams& e) {
    const double ratio = e.radius / e.wavelength;
    const double lambda_over_omega = 64.0 / 45.0 * kPi * kPi * kPi * e.epsilon_c() /
                                     (e.numerical_aperture * e.numerical_aperture) * ratio * ratio *
                                     ratio;
    const double v_gas = std::sqrt(8.0 * kBoltzmann * e.temperature / (kPi * e.gas_mass));
    const double gamma_exp =
        64.0 / 3.0 * e.radius * e.radius * e.pressure / (e.particle_mass() * v_gas);
    const double n_th = kBoltzmann * e.temperature / (kHbar * e.omega);
    return {lambda_over_omega, v_gas, gamma_exp, n_th, n_th * gamma_exp / e.omega};
}

// ---------------------------------------------------------------------------
// Configuration

enum class LadderChoice { Auto, Spin, Oscillator };

struct SweepRange {
    double min = 0.0;
    double max = 0.0;
    int points = 1;
    bool log = false;

    std::vector<double> values() const {
        std::vector<double> v;
        for (int i = 0; i < points; ++i) {
            const double f = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
            if (log)
                v.push_back(std::exp(std::log(min) + f * (std::log(max) - std::log(min))));
            else
                v.push_back(min + f * (max - min));
        }
        // pin the endpoints against rounding in exp/log
        if (!v.empty()) {
            v.front() = min;
            if (points > 1) v.back() = max;
        }
        return v;
    }
};

struct NessSettings {
    int window = 10;      ///< trailing samples inspected
    double tol = 1e-3;
    double cap = 16.0;    ///< longest run, in units of tau
};

inline constexpr double kMaxCalE = 200.0;

struct ScenarioConfig {
    Scenario scenario = Scenario::DoubleWellIsolated;
    int N = 25;
    int kappa = 15;
    PotentialParams potential;
    DissipatorParams diss;
    LadderChoice ladder = LadderChoice::Auto;
    double beta_init = 2.0;
    double zeta = 0.0;
    IntegratorConfig integ;
    std::optional<double> t_end;
    int n_theta = 64;
    int n_phi = 64;
    /// Compute the entropy rates on every k-th sample (the last sample always).
    int rates_every = 1;
    SweepRange sweep;
    double lambda_ratio = 10.0;
    std::vector<double> low_gammas{1e-3, 1e-2};
    NessSettings ness;
    int threads = 0; ///< 0: hardware concurrency
    ContinuousGrid continuum;
    int eig_levels = 8;
    ExpParams exp;

    static ScenarioConfig defaults(Scenario s) {
        ScenarioConfig c;
        c.scenario = s;
        switch (s) {
        case Scenario::SpinStudy:
            c.N = 4;
            c.diss.gamma = c.diss.Lambda = 0.5;
            c.t_end = 40.0;
            break;
        case Scenario::LambdaSweep:
            c.N = 4;
            c.diss.gamma = 0.5;
            c.sweep = {0.05, 50.0, 12, true};
            break;
        case Scenario::DoubleWellCombined:
            c.diss.gamma = c.diss.Lambda = 0.5;
            break;
        case Scenario::CouplingSweep:
            c.sweep = {1e-5, 1.0, 11, true};
            break;
        case Scenario::LowCoupling:
            c.t_end = 4.0 * c.potential.tau;
            break;
        case Scenario::SqueezeSweep:
            c.diss.gamma = 1e-3;
            c.diss.Lambda = 1e-2;
            c.sweep = {-1.0, 1.0, 41, false};
            break;
        default:
            break;
        }
        return c;
    }

    double resolved_t_end() const { return t_end ? *t_end : potential.tau; }

    LadderOrientation orientation() const {
        switch (ladder) {
        case LadderChoice::Spin: return LadderOrientation::Spin;
        case LadderChoice::Oscillator: return LadderOrientation::Oscillator;
        case LadderChoice::Auto: break;
        }
        return is_spin_model(scenario) ? LadderOrientation::Spin : LadderOrientation::Oscillator;
    }

    DissipatorParams dissipator() const {
        DissipatorParams d = diss;
        d.orientation = orientation();
        d.bath_omega = potential.omega;
        return d;
    }

    IntegratorConfig integrator() const {
        IntegratorConfig c = integ;
        c.t_end = resolved_t_end();
        return c;
    }

    unsigned worker_count() const {
        if (threads > 0) return static_cast<unsigned>(threads);
        return std::max(1u, std::thread::hardware_concurrency());
    }

    std::vector<std::string> violations() const {
        std::vector<std::string> bad;
        if (N < 2) bad.emplace_back("N");
        if (kappa < 1) bad.emplace_back("kappa");
        if (!(potential.tau > 0.0)) bad.emplace_back("tau");
        if (!(potential.calE >= 0.0) || potential.calE > kMaxCalE) bad.emplace_back("calE");
        if (!(potential.W > 0.0)) bad.emplace_back("W");
        if (!(potential.mass > 0.0)) bad.emplace_back("mass");
        if (!(potential.omega > 0.0)) bad.emplace_back("omega");
        if (!(diss.gamma >= 0.0)) bad.emplace_back("gamma");
        if (!(diss.Lambda >= 0.0)) bad.emplace_back("Lambda");
        if (!(diss.beta_bath > 0.0)) bad.emplace_back("beta_bath");
        if (!(beta_init >= 0.0)) bad.emplace_back("beta_init");
        if (!(std::abs(zeta) <= 1.0)) bad.emplace_back("zeta");
        if (!(integ.dt > 0.0) || !std::isfinite(integ.dt)) bad.emplace_back("dt");
        if (t_end && !(*t_end >= 0.0)) bad.emplace_back("t_end");
        if (integ.sample_every < 1) bad.emplace_back("sample_every");
        if (!(integ.positivity_tol > 0.0)) bad.emplace_back("positivity_tol");
        if (n_theta < 8) bad.emplace_back("n_theta");
        if (n_phi < 8) bad.emplace_back("n_phi");
        if (rates_every < 1) bad.emplace_back("rates_every");
        if (sweep.points < 1 || !(sweep.min <= sweep.max) || (sweep.points > 1 && sweep.min == sweep.max))
            bad.emplace_back("sweep");
        if (sweep.log && !(sweep.min > 0.0)) bad.emplace_back("sweep_min");
        if (!(lambda_ratio >= 0.0)) bad.emplace_back("lambda_ratio");
        if (low_gammas.empty() || std::any_of(low_gammas.begin(), low_gammas.end(),
                                              [](double g) { return !(g >= 0.0); }))
            bad.emplace_back("low_gammas");
        if (ness.window < 2) bad.emplace_back("ness_window");
        if (!(ness.tol > 0.0)) bad.emplace_back("ness_tol");
        if (!(ness.cap >= 1.0)) bad.emplace_back("ness_cap");
        if (threads < 0) bad.emplace_back("threads");
        if (continuum.n_points < 128) bad.emplace_back("cont_points");
        if (!(continuum.half_width > 0.0)) bad.emplace_back("cont_L");
        if (eig_levels < 1 || eig_levels > 12 || (scenario == Scenario::EigenCompare && eig_levels > N))
            bad.emplace_back("eig_levels");
        for (auto& v : exp.violations()) bad.push_back(std::move(v));
        return bad;
    }

    void validate() const {
        const auto bad = violations();
        if (bad.empty()) return;
        std::string msg = "invalid configuration:";
        for (const auto& b : bad) msg += " " + b;
        throw Error(ErrorKind::ValidationError, msg);
    }
};

// ---------------------------------------------------------------------------
// Model and per-sample analysis

/// Everything fixed for one scenario: basis, Hamiltonian, measurement basis
/// (Jz for the spin, Jx' for the oscillator), localization operator and the
/// tabulated phase space.
class Model {
public:
    static Model from_config(const ScenarioConfig& cfg) {
        Model m(cfg);
        return m;
    }

    const SpinBasis& basis() const noexcept { return basis_; }
    const SpinOperators& spin() const noexcept { return spin_; }
    const PhaseSpace& phase_space() const noexcept { return *ps_; }
    const Matrix& measure_op() const noexcept { return measure_; }
    const Matrix& localization_op() const noexcept { return loc_; }
    bool is_spin() const noexcept { return dw_ == nullptr; }
    Matrix hamiltonian(double t) const { return provider_(t); }
    const HamiltonianProvider& provider() const noexcept { return provider_; }

    Liouvillian liouvillian(const DissipatorParams& d) const {
        return Liouvillian(provider_, d, thermal_ladder(spin_, d.orientation), loc_);
    }

    DensityMatrix initial_state(double beta, double zeta, int kappa) const {
        DensityMatrix rho = thermal_state(provider_(0.0), beta);
        if (zeta != 0.0) rho = squeeze_state(rho, zeta, basis_, kappa);
        return rho;
    }

private:
    explicit Model(const ScenarioConfig& cfg)
        : basis_(cfg.N), spin_(build_spin_operators(basis_)),
          ps_(std::make_shared<PhaseSpace>(basis_, SphereGrid(cfg.n_theta, cfg.n_phi))) {
        if (is_spin_model(cfg.scenario)) {
            const Matrix h = cfg.potential.omega * spin_.Jz.entries;
            provider_ = constant_hamiltonian(h);
            measure_ = spin_.Jz.entries;
            loc_ = spin_.Jx.entries;
        } else {
            dw_ = std::make_shared<DoubleWellHamiltonian>(basis_, cfg.kappa, cfg.potential);
            provider_ = [dw = dw_](double t) { return (*dw)(t); };
            measure_ = dw_->position();
            loc_ = cfg.diss.localization == LocalizationOperator::BareJx ? spin_.Jx.entries
                                                                         : dw_->position();
        }
    }

    SpinBasis basis_;
    SpinOperators spin_;
    std::shared_ptr<const PhaseSpace> ps_;
    std::shared_ptr<const DoubleWellHamiltonian> dw_;
    HamiltonianProvider provider_;
    Matrix measure_;
    Matrix loc_;
};

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct SampleRow {
    double time = 0.0;
    double energy = 0.0;
    double S_Q = 0.0;
    double S_vN = 0.0;
    EntropyRates rates{kNaN, kNaN, kNaN, kNaN, kNaN, kNaN};
    bool has_rates = false;
    double coherence_l1 = 0.0;
    double fidelity_ref = 0.0;
    double trace_err = 0.0;
    double hermiticity_err = 0.0;
    double min_eig = 0.0;
    double rho_dot_norm = 0.0;
    std::vector<double> populations;
};

using ReferenceState = std::function<Matrix(double)>;

inline SampleRow analyze_sample(const DensityMatrix& state, const Liouvillian& generator,
                                const Model& model, const ReferenceState& reference,
                                bool with_rates) {
    const Matrix& rho = state.entries();
    const double t = state.time();
    SampleRow row;
    row.time = t;
    row.energy = mean_energy(rho, generator.hamiltonian(t));
    row.S_Q = wehrl_entropy(rho, model.phase_space());
    row.S_vN = von_neumann_entropy(rho);
    if (with_rates) {
        row.rates = entropy_rates(rho, t, generator, model.phase_space());
        row.has_rates = true;
    }
    row.coherence_l1 = l1_coherence(rho, model.measure_op());
    row.fidelity_ref = reference ? fidelity(rho, reference(t)) : kNaN;
    row.trace_err = state.trace_error();
    row.hermiticity_err = state.hermiticity_error();
    row.min_eig = state.min_eigenvalue();
    row.rho_dot_norm = generator.apply(rho, t).norm();
    row.populations = populations(rho, model.measure_op());
    return row;
}

struct NessResult {
    bool is_ness = false;
    double residual = 0.0;  ///< largest |Pi_th + Pi_lc - Phi_th| in the window
    double max_rate = 0.0;  ///< largest |rate| in the window
    double rho_dot = 0.0;   ///< largest ||drho/dt||_F in the window
};

/// A steady state is declared when, over the trailing `window` samples,
/// ||drho/dt||_F < tol and |Pi_th + Pi_lc - Phi_th| < tol * max rate.
inline NessResult detect_ness(const std::vector<SampleRow>& rows, int window, double tol) {
    if (window < 1 || static_cast<std::size_t>(window) > rows.size())
        throw Error(ErrorKind::WindowTooLarge, "window of " + std::to_string(window) +
                                                   " samples exceeds trajectory of " +
                                                   std::to_string(rows.size()));
    NessResult r;
    for (std::size_t k = rows.size() - static_cast<std::size_t>(window); k < rows.size(); ++k) {
        if (!rows[k].has_rates)
            throw Error(ErrorKind::ValidationError, "NESS window sample lacks entropy rates");
        r.residual = std::max(r.residual, std::abs(stationarity_residual(rows[k].rates)));
        r.max_rate = std::max(r.max_rate, rows[k].rates.max_rate());
        r.rho_dot = std::max(r.rho_dot, rows[k].rho_dot_norm);
    }
    r.is_ness = r.rho_dot < tol && r.residual <= tol * r.max_rate;
    return r;
}

struct RunResult {
    std::string label;
    DissipatorParams diss;
    std::vector<SampleRow> rows;
    DensityMatrix final_state;
    std::optional<NessResult> ness;
    bool cap_hit = false;

    double t_final() const { return final_state.time(); }
};

struct RunOptions {
    bool rates = true;
    int rates_every = 1;
    bool require_ness = false;
    NessSettings ness;
};

namespace detail {

inline void append_rows(RunResult& out, const TrajectoryRecord& record, const Liouvillian& generator,
                        const Model& model, const ReferenceState& reference, const RunOptions& opt,
                        bool skip_first) {
    for (std::size_t k = skip_first ? 1 : 0; k < record.size(); ++k) {
        const bool last = k + 1 == record.size();
        const bool rates = opt.rates && (out.rows.size() % static_cast<std::size_t>(opt.rates_every) == 0 || last);
        out.rows.push_back(analyze_sample(record.states[k], generator, model, reference, rates));
    }
}

/// Make sure the trailing `window` rows carry entropy rates.
inline void fill_window_rates(RunResult& out, const TrajectoryRecord& record, std::size_t record_offset,
                              const Liouvillian& generator, const Model& model, int window) {
    const std::size_t n = out.rows.size();
    const std::size_t w = std::min(n, static_cast<std::size_t>(window));
    for (std::size_t k = n - w; k < n; ++k) {
        if (out.rows[k].has_rates) continue;
        const auto& state = record.states[k - record_offset];
        out.rows[k].rates = entropy_rates(state.entries(), state.time(), generator, model.phase_space());
        out.rows[k].has_rates = true;
    }
}

} // namespace detail

/// Propagates and analyzes one run. With `require_ness` the run is doubled in
/// length until a steady state is detected or `cap * tau` is reached.
inline RunResult run_observed(const Model& model, const DissipatorParams& diss,
                              const DensityMatrix& rho0, IntegratorConfig integ, double tau,
                              const ReferenceState& reference, std::string label,
                              const RunOptions& opt = {}) {
    const Liouvillian generator = model.liouvillian(diss);
    RunResult out;
    out.label = std::move(label);
    out.diss = diss;

    TrajectoryRecord record = propagate(rho0, integ, generator);
    std::size_t offset = 0; // rows index of record.states[0]
    detail::append_rows(out, record, generator, model, reference, opt, false);
    out.final_state = record.back();

    if (!opt.require_ness) return out;
    const double cap = opt.ness.cap * tau;
    while (true) {
        if (static_cast<int>(out.rows.size()) >= opt.ness.window) {
            detail::fill_window_rates(out, record, offset, generator, model, opt.ness.window);
            out.ness = detect_ness(out.rows, opt.ness.window, opt.ness.tol);
            if (out.ness->is_ness) break;
        }
        const double t_now = out.final_state.time();
        if (t_now >= cap * (1.0 - 1e-12)) {
            out.cap_hit = true;
            break;
        }
        IntegratorConfig next = integ;
        next.t_end = std::min(std::max(2.0 * t_now, t_now + integ.dt), cap);
        offset = out.rows.size() - 1;
        record = propagate(out.final_state, next, generator);
        detail::append_rows(out, record, generator, model, reference, opt, true);
        out.final_state = record.back();
    }
    return out;
}

/// Runs `fn(i)` for i in [0, n) on up to `workers` threads; results keep
/// index order. The first exception (by index) is rethrown.
template <class Fn>
auto parallel_map(std::size_t n, unsigned workers, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
    using R = decltype(fn(std::size_t{}));
    std::vector<std::optional<R>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                slots[i].emplace(fn(i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned count = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
    if (count == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned k = 0; k < count; ++k) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::vector<R> out;
    out.reserve(n);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

// ---------------------------------------------------------------------------
// Spin study

struct SpinStudyResult {
    RunResult thermal;
    RunResult localization;
    RunResult combined;
};

inline SpinStudyResult run_spin_study(const ScenarioConfig& cfg) {
    cfg.validate();
    const Model model = Model::from_config(cfg);
    const DensityMatrix rho0 = model.initial_state(cfg.beta_init, 0.0, cfg.kappa);
    const DissipatorParams base = cfg.dissipator();
    const Matrix gibbs = thermal_state(model.hamiltonian(0.0), base.beta_bath).entries();
    const Matrix mixed = Matrix::Identity(cfg.N, cfg.N) / static_cast<double>(cfg.N);
    const ReferenceState to_gibbs = [gibbs](double) { return gibbs; };
    const ReferenceState to_mixed = [mixed](double) { return mixed; };

    DissipatorParams th = base, lc = base;
    th.Lambda = 0.0;
    lc.gamma = 0.0;
    RunOptions opt{true, cfg.rates_every, false, cfg.ness};
    const auto integ = cfg.integrator();

    SpinStudyResult r;
    r.thermal = run_observed(model, th, rho0, integ, cfg.potential.tau, to_gibbs, "thermal", opt);
    r.localization = run_observed(model, lc, rho0, integ, cfg.potential.tau, to_mixed, "localization", opt);
    opt.require_ness = true;
    r.combined = run_observed(model, base, rho0, integ, cfg.potential.tau, to_gibbs, "combined", opt);
    return r;
}

// ---------------------------------------------------------------------------
// Lambda sweep

struct LambdaPoint {
    double Lambda = 0.0;
    double ratio = 0.0;
    double t_final = 0.0;
    bool ness = false;
    bool cap_hit = false;
    double coherence_l1 = 0.0;
    double fidelity_thermal = 0.0;
    double fidelity_mixed = 0.0;
    double S_Q = 0.0;
    double S_vN = 0.0;
    double energy = 0.0;
    EntropyRates rates;
    double residual = 0.0;
};

struct LambdaSweepResult {
    std::vector<LambdaPoint> points;
    double S_Q_thermal = 0.0; ///< Wehrl entropy of the bath Gibbs state
    double S_Q_mixed = 0.0;   ///< Wehrl entropy of the fully localized (mixed) state

    std::size_t argmax_coherence() const {
        std::size_t best = 0;
        for (std::size_t k = 1; k < points.size(); ++k)
            if (points[k].coherence_l1 > points[best].coherence_l1) best = k;
        return best;
    }
};

inline LambdaSweepResult run_lambda_sweep(const ScenarioConfig& cfg) {
    cfg.validate();
    const Model model = Model::from_config(cfg);
    const DensityMatrix rho0 = model.initial_state(cfg.beta_init, 0.0, cfg.kappa);
    const DissipatorParams base = cfg.dissipator();
    const Matrix gibbs = thermal_state(model.hamiltonian(0.0), base.beta_bath).entries();
    const Matrix mixed = Matrix::Identity(cfg.N, cfg.N) / static_cast<double>(cfg.N);
    const auto lambdas = cfg.sweep.values();
    const auto integ = cfg.integrator();

    LambdaSweepResult out;
    out.S_Q_thermal = wehrl_entropy(gibbs, model.phase_space());
    out.S_Q_mixed = wehrl_entropy(mixed, model.phase_space());
    out.points = parallel_map(lambdas.size(), cfg.worker_count(), [&](std::size_t i) {
        DissipatorParams d = base;
        d.Lambda = lambdas[i];
        const RunOptions opt{false, 1, true, cfg.ness};
        const RunResult run = run_observed(model, d, rho0, integ, cfg.potential.tau, {}, "lambda", opt);
        const Matrix& rho = run.final_state.entries();
        const SampleRow& last = run.rows.back();
        LambdaPoint p;
        p.Lambda = d.Lambda;
        p.ratio = d.gamma > 0.0 ? d.Lambda / d.gamma : kNaN;
        p.t_final = run.t_final();
        p.ness = run.ness && run.ness->is_ness;
        p.cap_hit = run.cap_hit;
        p.coherence_l1 = last.coherence_l1;
        p.fidelity_thermal = fidelity(rho, gibbs);
        p.fidelity_mixed = fidelity(rho, mixed);
        p.S_Q = last.S_Q;
        p.S_vN = last.S_vN;
        p.energy = last.energy;
        p.rates = last.rates;
        p.residual = stationarity_residual(last.rates);
        return p;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Double-well runs

inline RunResult run_doublewell(const ScenarioConfig& cfg, bool isolated) {
    cfg.validate();
    const Model model = Model::from_config(cfg);
    const DensityMatrix rho0 = model.initial_state(cfg.beta_init, cfg.zeta, cfg.kappa);
    DissipatorParams d = cfg.dissipator();
    if (isolated) d.gamma = d.Lambda = 0.0;
    ReferenceState reference;
    if (isolated) {
        const Matrix start = rho0.entries();
        reference = [start](double) { return start; };
    } else {
        const double beta = d.beta_bath;
        reference = [&model, beta](double t) { return thermal_state(model.hamiltonian(t), beta).entries(); };
    }
    const RunOptions opt{true, cfg.rates_every, false, cfg.ness};
    return run_observed(model, d, rho0, cfg.integrator(), cfg.potential.tau, reference,
                        isolated ? "isolated" : "combined", opt);
}

// ---------------------------------------------------------------------------
// Coupling sweep

enum class CouplingBranch { Thermal, Localization, Combined };

inline std::string_view to_string(CouplingBranch b) {
    switch (b) {
    case CouplingBranch::Thermal: return "thermal";
    case CouplingBranch::Localization: return "localization";
    case CouplingBranch::Combined: return "combined";
    }
    return "unknown";
}

struct CouplingPoint {
    CouplingBranch branch = CouplingBranch::Combined;
    double coupling = 0.0;
    double gamma = 0.0;
    double Lambda = 0.0;
    /// At t = tau, against the closed run at t = tau.
    double fidelity_tau = 0.0;
    double coherence_tau = 0.0;
    double S_Q_tau = 0.0;
    /// After NESS extension (equal to the t = tau values when none was needed
    /// or allowed), still against the closed run at t = tau.
    double t_final = 0.0;
    bool ness = false;
    bool cap_hit = false;
    double fidelity_final = 0.0;
    double coherence_final = 0.0;
    double S_Q_final = 0.0;
};

struct CouplingSweepResult {
    std::vector<CouplingPoint> points;
    Matrix isolated_final;

    const CouplingPoint* find(CouplingBranch b, double coupling, double rel = 1e-9) const {
        for (const auto& p : points)
            if (p.branch == b && std::abs(p.coupling - coupling) <= rel * std::abs(coupling)) return &p;
        return nullptr;
    }
};

inline CouplingSweepResult run_coupling_sweep(const ScenarioConfig& cfg,
                                              std::vector<CouplingBranch> branches = {
                                                  CouplingBranch::Thermal, CouplingBranch::Localization,
                                                  CouplingBranch::Combined}) {
    cfg.validate();
    const Model model = Model::from_config(cfg);
    const DensityMatrix rho0 = model.initial_state(cfg.beta_init, cfg.zeta, cfg.kappa);
    const DissipatorParams base = cfg.dissipator();
    IntegratorConfig integ = cfg.integrator();
    integ.t_end = cfg.potential.tau;

    DissipatorParams closed = base;
    closed.gamma = closed.Lambda = 0.0;
    const auto closed_run = propagate(rho0, integ, model.liouvillian(closed));
    CouplingSweepResult out;
    out.isolated_final = closed_run.back().entries();

    struct Job {
        CouplingBranch branch;
        double coupling;
    };
    std::vector<Job> jobs;
    for (auto b : branches)
        for (double c : cfg.sweep.values()) jobs.push_back({b, c});

    const Matrix& target = out.isolated_final;
    out.points = parallel_map(jobs.size(), cfg.worker_count(), [&](std::size_t i) {
        const Job job = jobs[i];
        DissipatorParams d = base;
        switch (job.branch) {
        case CouplingBranch::Thermal: d.gamma = job.coupling; d.Lambda = 0.0; break;
        case CouplingBranch::Localization: d.gamma = 0.0; d.Lambda = job.coupling; break;
        case CouplingBranch::Combined: d.gamma = job.coupling; d.Lambda = cfg.lambda_ratio * job.coupling; break;
        }
        const Liouvillian generator = model.liouvillian(d);
        const auto at_tau = propagate(rho0, integ, generator);
        const DensityMatrix& s_tau = at_tau.back();
        CouplingPoint p;
        p.branch = job.branch;
        p.coupling = job.coupling;
        p.gamma = d.gamma;
        p.Lambda = d.Lambda;
        p.fidelity_tau = fidelity(s_tau.entries(), target);
        p.coherence_tau = l1_coherence(s_tau.entries(), model.measure_op());
        p.S_Q_tau = wehrl_entropy(s_tau.entries(), model.phase_space());

        DensityMatrix rho_f = s_tau;
        if (cfg.ness.cap > 1.0) {
            // continue past tau, doubling until steady or capped
            IntegratorConfig rest = integ;
            rest.t_end = std::min(2.0, cfg.ness.cap) * cfg.potential.tau;
            const RunResult tail = run_observed(model, d, s_tau, rest, cfg.potential.tau, {}, "tail",
                                                RunOptions{false, 1, true, cfg.ness});
            rho_f = tail.final_state;
            p.ness = tail.ness && tail.ness->is_ness;
            p.cap_hit = tail.cap_hit;
        } else {
            p.cap_hit = true;
        }
        p.t_final = rho_f.time();
        p.fidelity_final = fidelity(rho_f.entries(), target);
        p.coherence_final = l1_coherence(rho_f.entries(), model.measure_op());
        p.S_Q_final = wehrl_entropy(rho_f.entries(), model.phase_space());
        return p;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Low coupling

struct LowCouplingResult {
    std::vector<RunResult> runs; ///< one per gamma, Lambda = lambda_ratio * gamma
};

inline LowCouplingResult run_low_coupling(const ScenarioConfig& cfg) {
    cfg.validate();
    const Model model = Model::from_config(cfg);
    const DensityMatrix rho0 = model.initial_state(cfg.beta_init, cfg.zeta, cfg.kappa);
    const DissipatorParams base = cfg.dissipator();
    const double beta = base.beta_bath;
    const ReferenceState reference = [&model, beta](double t) {
        return thermal_state(model.hamiltonian(t), beta).entries();
    };
    LowCouplingResult out;
    out.runs = parallel_map(cfg.low_gammas.size(), cfg.worker_count(), [&](std::size_t i) {
        DissipatorParams d = base;
        d.gamma = cfg.low_gammas[i];
        d.Lambda = cfg.lambda_ratio * d.gamma;
        const RunOptions opt{true, cfg.rates_every, false, cfg.ness};
        char label[64];
        std::snprintf(label, sizeof label, "gamma_%g", d.gamma);
        return run_observed(model, d, rho0, cfg.integrator(), cfg.potential.tau, reference, label, opt);
    });
    return out;
}

/// Mean of dS_U and of dS_th + dS_lc over samples with t >= t_from.
struct LateRates {
    double dS_U = 0.0;
    double dS_D = 0.0;
    int samples = 0;
};

inline LateRates late_rates(const RunResult& run, double t_from) {
    LateRates r;
    for (const auto& row : run.rows) {
        if (row.time < t_from - 1e-12 || !row.has_rates) continue;
        r.dS_U += row.rates.dS_U;
        r.dS_D += row.rates.dS_th + row.rates.dS_lc;
        ++r.samples;
    }
    if (r.samples > 0) {
        r.dS_U /= r.samples;
        r.dS_D /= r.samples;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Squeezing sweep

struct SqueezePoint {
    double zeta = 0.0;
    double energy_initial = 0.0;
    double energy = 0.0;
    double coherence_l1 = 0.0;
    double S_Q = 0.0;
};

struct SqueezeSweepResult {
    std::vector<SqueezePoint> points;

    std::size_t argmax_coherence() const {
        std::size_t best = 0;
        for (std::size_t k = 1; k < points.size(); ++k)
            if (points[k].coherence_l1 > points[best].coherence_l1) best = k;
        return best;
    }
};

inline SqueezeSweepResult run_squeeze_sweep(const ScenarioConfig& cfg) {
    cfg.validate();
    const Model model = Model::from_config(cfg);
    const DissipatorParams d = cfg.dissipator();
    const auto zetas = cfg.sweep.values();
    const auto integ = cfg.integrator();
    for (double z : zetas)
        if (std::abs(z) > 1.0) throw Error(ErrorKind::ValidationError, "zeta outside [-1, 1]");
    SqueezeSweepResult out;
    out.points = parallel_map(zetas.size(), cfg.worker_count(), [&](std::size_t i) {
        const DensityMatrix rho0 = model.initial_state(cfg.beta_init, zetas[i], cfg.kappa);
        const auto record = propagate(rho0, integ, model.liouvillian(d));
        const DensityMatrix& last = record.back();
        SqueezePoint p;
        p.zeta = zetas[i];
        p.energy_initial = mean_energy(rho0.entries(), model.hamiltonian(0.0));
        p.energy = mean_energy(last.entries(), model.hamiltonian(last.time()));
        p.coherence_l1 = l1_coherence(last.entries(), model.measure_op());
        p.S_Q = wehrl_entropy(last.entries(), model.phase_space());
        return p;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Spectrum comparison

struct EigenRow {
    double time;
    int level;
    double spin;
    double continuous;
    double rel_error;
};

inline std::vector<double> eigen_compare_times(double tau) {
    return {0.0, 0.25 * tau, 0.5 * tau, 0.75 * tau, tau};
}

inline std::vector<EigenRow> run_eigen_compare(const ScenarioConfig& cfg,
                                               std::vector<double> times = {}) {
    cfg.validate();
    if (times.empty()) times = eigen_compare_times(cfg.potential.tau);
    const DoubleWellHamiltonian h(SpinBasis(cfg.N), cfg.kappa, cfg.potential);
    std::vector<EigenRow> rows;
    for (double t : times) {
        const auto spin = lowest_eigenvalues(h(t), cfg.eig_levels);
        const auto cont = continuous_eigs(cfg.potential, t, cfg.continuum, cfg.eig_levels).values;
        for (int k = 0; k < cfg.eig_levels; ++k) {
            const double s = spin[static_cast<std::size_t>(k)];
            const double c = cont[static_cast<std::size_t>(k)];
            rows.push_back({t, k, s, c, std::abs(s - c) / std::abs(c)});
        }
    }
    return rows;
}

} // namespace wehrlsim
