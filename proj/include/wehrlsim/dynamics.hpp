#pragma once

// Density-matrix propagation under
//     drho/dt = -i [H(t), rho] + D_th[rho] + D_lc[rho]
// with a fixed-step classical RK4, plus thermal and squeezed initial states.

#include "operators.hpp"

#include <Eigen/Sparse>

#include <cstdint>
#include <memory>
#include <optional>

namespace wehrlsim {

/// A trace-one Hermitian positive-semidefinite state stamped with its time.
class DensityMatrix {
public:
    static constexpr double kHermiticityTol = 1e-10;
    static constexpr double kTraceTol = 1e-8;
    static constexpr double kPositivityTol = 1e-8;

    DensityMatrix() = default;
    explicit DensityMatrix(Matrix entries, double time_tag = 0.0)
        : entries_(std::move(entries)), time_(time_tag) {}

    const Matrix& entries() const noexcept { return entries_; }
    Matrix& entries() noexcept { return entries_; }
    double time() const noexcept { return time_; }
    void set_time(double t) noexcept { time_ = t; }
    Eigen::Index dimension() const noexcept { return entries_.rows(); }

    double trace_error() const { return std::abs(entries_.trace() - cplx(1.0, 0.0)); }
    double hermiticity_error() const { return wehrlsim::hermiticity_error(entries_); }
    double min_eigenvalue() const { return hermitian_eigen(entries_).values.minCoeff(); }

    bool is_valid() const {
        return entries_.rows() == entries_.cols() && hermiticity_error() <= kHermiticityTol &&
               trace_error() <= kTraceTol && min_eigenvalue() >= -kPositivityTol;
    }

private:
    Matrix entries_;
    double time_ = 0.0;
};

using HamiltonianProvider = std::function<Matrix(double)>;

inline HamiltonianProvider constant_hamiltonian(Matrix h) {
    return [h = std::move(h)](double) { return h; };
}

/// The full generator: Hamiltonian, thermal ladder and localization operator.
///
/// Evaluated as G rho + rho G^dag + sum_k c_k O_k rho O_k^dag with
/// G = -iH - (1/2) sum_k c_k O_k^dag O_k; the localization double commutator
/// contributes -Lambda A^2 to G and 2 Lambda A rho A to the jump part.
/// Writing rho G^dag as (G rho)^dag would save a product but lets round-off
/// in the anti-Hermitian part of rho grow exponentially.
class Liouvillian {
public:
    Liouvillian(HamiltonianProvider hamiltonian, DissipatorParams diss, ThermalLadder ladder,
                Matrix localization_op)
        : hamiltonian_(std::move(hamiltonian)), diss_(diss), ladder_(std::move(ladder)),
          loc_(std::move(localization_op)) {
        diss_.validate();
        require_same_shape(ladder_.lowering, loc_, "Liouvillian");
        require_same_shape(ladder_.raising, loc_, "Liouvillian");
        const Eigen::Index n = loc_.rows();
        static_part_ = Matrix::Zero(n, n);
        if (diss_.gamma > 0.0) {
            const double nbar = diss_.nbar();
            add_jump(ladder_.lowering, diss_.gamma * (nbar + 1.0));
            add_jump(ladder_.raising, diss_.gamma * nbar);
        }
        if (diss_.Lambda > 0.0) {
            jumps_.push_back({sparse(loc_), 2.0 * diss_.Lambda});
            static_part_ -= diss_.Lambda * loc_ * loc_;
            const auto ea = hermitian_eigen(loc_).values;
            loc_spread_sq_ = (ea.maxCoeff() - ea.minCoeff()) * (ea.maxCoeff() - ea.minCoeff());
        }
    }

    Matrix hamiltonian(double t) const { return hamiltonian_(t); }

    /// Upper bound on the spectral radius of the generator at time t: the
    /// spread of H, Lambda times the squared spread of A, and the summed
    /// jump rates times |O|_F^2.
    double stiffness_bound(double t) const {
        const auto eh = hermitian_eigen(hamiltonian_(t)).values;
        double bound = eh.maxCoeff() - eh.minCoeff() + loc_spread_sq_ * diss_.Lambda;
        for (const auto& [op, c] : ladder_rates_) bound += c * op;
        return bound;
    }
    const DissipatorParams& dissipator() const noexcept { return diss_; }
    const ThermalLadder& ladder() const noexcept { return ladder_; }
    const Matrix& localization_operator() const noexcept { return loc_; }

    Matrix unitary_part(const Matrix& rho, double t) const {
        const Matrix h = hamiltonian_(t);
        return -kI * commutator(h, rho);
    }
    Matrix thermal_part(const Matrix& rho) const {
        return apply_thermal_dissipator(rho, diss_, ladder_);
    }
    Matrix localization_part(const Matrix& rho) const {
        return apply_localization_dissipator(rho, diss_, loc_);
    }

    Matrix apply(const Matrix& rho, double t) const {
        require_same_shape(rho, loc_, "lindblad_rhs");
        const Matrix g = static_part_ - kI * hamiltonian_(t);
        Matrix out = g * rho;
        out.noalias() += rho * g.adjoint();
        for (const auto& jump : jumps_) {
            const Matrix left = jump.op * rho;
            out += jump.rate * (left * jump.op.adjoint());
        }
        return out;
    }

private:
    using Sparse = Eigen::SparseMatrix<cplx>;
    struct Jump {
        Sparse op;
        double rate;
    };

    static Sparse sparse(const Matrix& m) { return m.sparseView(0.0, 0.0); }

    void add_jump(const Matrix& op, double rate) {
        if (rate == 0.0) return;
        jumps_.push_back({sparse(op), rate});
        ladder_rates_.emplace_back(op.squaredNorm(), rate);
        static_part_ -= 0.5 * rate * op.adjoint() * op;
    }

    HamiltonianProvider hamiltonian_;
    DissipatorParams diss_;
    ThermalLadder ladder_;
    Matrix loc_;
    Matrix static_part_;
    std::vector<Jump> jumps_;
    std::vector<std::pair<double, double>> ladder_rates_; ///< (|O|_F^2, rate)
    double loc_spread_sq_ = 0.0;
};

inline Matrix lindblad_rhs(const Matrix& rho, double t, const Liouvillian& generator) {
    return generator.apply(rho, t);
}

struct IntegratorConfig {
    double dt = 1e-3;
    double t_end = 10.0;
    int sample_every = 100;
    bool renormalize_trace = false;
    /// Abort threshold for the smallest eigenvalue of a sampled state.
    double positivity_tol = 1e-6;
    /// Split each dt into equal RK4 substeps when dt times the generator's
    /// stiffness bound exceeds 2 (strong localization at large j needs it).
    bool substep_stiff = true;

    void validate() const {
        if (!(dt > 0.0) || !std::isfinite(dt))
            throw Error(ErrorKind::StepSizeInvalid, "dt must be positive, got " + std::to_string(dt));
        if (!(t_end >= 0.0))
            throw Error(ErrorKind::StepSizeInvalid, "t_end must be >= 0");
        if (sample_every < 1)
            throw Error(ErrorKind::StepSizeInvalid, "sample_every must be >= 1");
    }
};

struct SampleDiagnostics {
    double trace_error = 0.0;
    double hermiticity_error = 0.0;
    double min_eigenvalue = 0.0;
};

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
    std::vector<SampleDiagnostics> diagnostics;

    int substeps = 1; ///< RK4 steps taken per dt

    std::size_t size() const noexcept { return times.size(); }
    const DensityMatrix& back() const { return states.back(); }
};

/// |lambda h| kept below this on the generator's spectrum; RK4 is stable to
/// about 2.8 on both the real and imaginary axes.
inline constexpr double kStableStep = 2.0;

inline Matrix rk4_step(const Matrix& rho, double t, double dt, const Liouvillian& generator) {
    const Matrix k1 = generator.apply(rho, t);
    const Matrix k2 = generator.apply(rho + 0.5 * dt * k1, t + 0.5 * dt);
    const Matrix k3 = generator.apply(rho + 0.5 * dt * k2, t + 0.5 * dt);
    const Matrix k4 = generator.apply(rho + dt * k3, t + dt);
    return rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Fixed-step RK4 from rho0.time() to cfg.t_end. Samples the initial state,
/// every `sample_every` steps, and the final state. The step count is
/// round((t_end - t0) / dt); times are t0 + k dt exactly.
inline TrajectoryRecord propagate(const DensityMatrix& rho0, const IntegratorConfig& cfg,
                                  const Liouvillian& generator) {
    cfg.validate();
    const double t0 = rho0.time();
    if (cfg.t_end < t0)
        throw Error(ErrorKind::StepSizeInvalid, "t_end precedes the initial time");
    const auto steps = static_cast<std::int64_t>(std::llround((cfg.t_end - t0) / cfg.dt));

    int substeps = 1;
    if (cfg.substep_stiff) {
        const double bound = std::max(generator.stiffness_bound(t0), generator.stiffness_bound(cfg.t_end));
        substeps = std::max(1, static_cast<int>(std::ceil(bound * cfg.dt / kStableStep)));
    }
    const double h = cfg.dt / substeps;

    TrajectoryRecord record;
    record.substeps = substeps;
    Matrix rho = rho0.entries();
    auto sample = [&](std::int64_t step) {
        const double t = t0 + static_cast<double>(step) * cfg.dt;
        DensityMatrix state(rho, t);
        SampleDiagnostics diag{state.trace_error(), state.hermiticity_error(),
                               state.min_eigenvalue()};
        if (diag.min_eigenvalue < -cfg.positivity_tol)
            throw Error(ErrorKind::PositivityViolation,
                        "min eigenvalue " + std::to_string(diag.min_eigenvalue) + " at t=" +
                            std::to_string(t) + " (dt=" + std::to_string(cfg.dt) +
                            " too large?)");
        record.times.push_back(t);
        record.states.push_back(std::move(state));
        record.diagnostics.push_back(diag);
    };

    sample(0);
    for (std::int64_t step = 1; step <= steps; ++step) {
        const double t = t0 + static_cast<double>(step - 1) * cfg.dt;
        for (int sub = 0; sub < substeps; ++sub) rho = rk4_step(rho, t + sub * h, h, generator);
        if (cfg.renormalize_trace) rho /= rho.trace();
        if (step % cfg.sample_every == 0 || step == steps) sample(step);
    }
    return record;
}

/// exp(-beta H) / Z through the eigen-decomposition of H.
inline DensityMatrix thermal_state(const Matrix& h, double beta) {
    if (!(beta >= 0.0)) throw Error(ErrorKind::ValidationError, "beta must be >= 0");
    const auto eig = hermitian_eigen(h);
    const double e0 = eig.values.minCoeff();
    RealVector w = (-beta * (eig.values.array() - e0)).exp().matrix();
    w /= w.sum();
    Matrix rho = eig.vectors * w.asDiagonal() * eig.vectors.adjoint();
    rho = 0.5 * (rho + rho.adjoint());
    rho /= rho.trace().real();
    return DensityMatrix(rho);
}

/// S(zeta) = exp((zeta^* b^2 - zeta b^dag^2) / 2) with the HP-truncated
/// b = M^-1 J+; exact unitary on the truncated space.
inline Matrix squeeze_operator(const SpinBasis& basis, int kappa, double zeta) {
    const auto spin = build_spin_operators(basis);
    const auto hp = hp_taylor(basis, kappa);
    const Matrix b = hp.MkappaInv.entries * spin.Jplus.entries;
    const Matrix bdag = b.adjoint();
    const Matrix generator = 0.5 * (zeta * b * b - zeta * bdag * bdag);
    // generator is anti-Hermitian: exp(G) = exp(i K) with K = -i G.
    return unitary_exponential(-kI * generator);
}

inline DensityMatrix squeeze_state(const DensityMatrix& rho, double zeta, const SpinBasis& basis,
                                   int kappa) {
    if (zeta == 0.0) return rho;
    const Matrix s = squeeze_operator(basis, kappa, zeta);
    Matrix out = s * rho.entries() * s.adjoint();
    out = 0.5 * (out + out.adjoint());
    return DensityMatrix(out, rho.time());
}

} // namespace wehrlsim
