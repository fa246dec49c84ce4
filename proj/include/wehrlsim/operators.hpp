#pragma once

// Spin-j algebra, the Holstein-Primakoff (HP) bridge between a truncated
// oscillator and a spin, the time-dependent double-well Hamiltonian and the
// two dissipators acting on density matrices.
//
// Basis convention: index k = 0..N-1 labels |j, m = j - k>, i.e. j_z runs
// from +j down to -j. Under HP the same index is the boson number n = k, so
// |j, j> is the oscillator vacuum.

#include "common.hpp"

namespace wehrlsim {

class SpinBasis {
public:
    explicit SpinBasis(int dimension) : dim_(dimension) {
        if (dimension < 2)
            throw Error(ErrorKind::ValidationError,
                        "spin basis dimension must be >= 2, got " + std::to_string(dimension));
    }

    static SpinBasis from_two_j(int two_j) { return SpinBasis(two_j + 1); }

    int dimension() const noexcept { return dim_; }
    int two_j() const noexcept { return dim_ - 1; }
    double j() const noexcept { return 0.5 * (dim_ - 1); }
    /// j_z of basis index k.
    double m(int k) const noexcept { return j() - k; }

    friend bool operator==(const SpinBasis&, const SpinBasis&) = default;

private:
    int dim_;
};

enum class OperatorLabel {
    Jz,
    Jplus,
    Jminus,
    Jx,
    Jy,
    Mkappa,
    MkappaInv,
    Jxprime,
    Jyprime,
    Hamiltonian,
    Other,
};

/// A dense N x N operator tagged with what it represents.
struct OperatorMatrix {
    Matrix entries;
    OperatorLabel label = OperatorLabel::Other;

    Eigen::Index dimension() const { return entries.rows(); }
};

struct SpinOperators {
    OperatorMatrix Jz, Jplus, Jminus, Jx, Jy;
};

inline SpinOperators build_spin_operators(const SpinBasis& basis) {
    const int n = basis.dimension();
    const double j = basis.j();
    Matrix jz = Matrix::Zero(n, n);
    Matrix jp = Matrix::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        const double m = basis.m(k);
        jz(k, k) = m;
        // J+ |j,m> = sqrt((j-m)(j+m+1)) |j,m+1>, and m+1 sits at index k-1.
        if (k > 0) jp(k - 1, k) = std::sqrt((j - m) * (j + m + 1.0));
    }
    Matrix jm = jp.adjoint();
    Matrix jx = 0.5 * (jp + jm);
    Matrix jy = (jp - jm) / (2.0 * kI);
    return {{jz, OperatorLabel::Jz},
            {jp, OperatorLabel::Jplus},
            {jm, OperatorLabel::Jminus},
            {jx, OperatorLabel::Jx},
            {jy, OperatorLabel::Jy}};
}

/// Order-`kappa` Taylor polynomial of sqrt(2j - n) about n = 0, evaluated at
/// n = 0..levels-1. `levels` may exceed 2j+1 to probe the series outside the
/// physical range.
inline std::vector<double> taylor_sqrt_levels(int two_j, int kappa, int levels) {
    if (kappa < 1)
        throw Error(ErrorKind::ValidationError, "kappa must be >= 1, got " + std::to_string(kappa));
    const double root = std::sqrt(static_cast<double>(two_j));
    std::vector<double> out(static_cast<std::size_t>(levels));
    for (int n = 0; n < levels; ++n) {
        // sqrt(2j) * sum_k binom(1/2, k) (-x)^k with x = n / 2j
        const double x = static_cast<double>(n) / two_j;
        double term = 1.0;
        double sum = 1.0;
        for (int k = 1; k <= kappa; ++k) {
            term *= -(0.5 - (k - 1)) / k * x;
            sum += term;
        }
        out[static_cast<std::size_t>(n)] = root * sum;
    }
    return out;
}

struct HpTaylor {
    OperatorMatrix Mkappa, MkappaInv;
};

inline HpTaylor hp_taylor(const SpinBasis& basis, int kappa) {
    const int n = basis.dimension();
    const auto diag = taylor_sqrt_levels(basis.two_j(), kappa, n);
    Matrix mk = Matrix::Zero(n, n);
    Matrix mi = Matrix::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        const double v = diag[static_cast<std::size_t>(k)];
        if (!(v > 0.0))
            throw Error(ErrorKind::NonInvertible,
                        "M_kappa(n=" + std::to_string(k) + ") = " + std::to_string(v) +
                            " is not positive (kappa=" + std::to_string(kappa) + ")");
        mk(k, k) = v;
        mi(k, k) = 1.0 / v;
    }
    return {{mk, OperatorLabel::Mkappa}, {mi, OperatorLabel::MkappaInv}};
}

struct QuadratureOperators {
    OperatorMatrix Jxprime, Jyprime;
};

/// Position-like Jx' and momentum-like Jy' built from b ~ M^-1 J+ and
/// b^dag ~ J- M^-1.
inline QuadratureOperators quadrature_operators(const SpinBasis& basis, int kappa) {
    const auto spin = build_spin_operators(basis);
    const auto hp = hp_taylor(basis, kappa);
    const Matrix b = hp.MkappaInv.entries * spin.Jplus.entries;
    const Matrix bdag = spin.Jminus.entries * hp.MkappaInv.entries;
    const double s = 1.0 / std::sqrt(2.0);
    Matrix x = s * (bdag + b);
    Matrix p = kI * s * (bdag - b);
    return {{0.5 * (x + x.adjoint()), OperatorLabel::Jxprime},
            {0.5 * (p + p.adjoint()), OperatorLabel::Jyprime}};
}

struct PotentialParams {
    double calE = 10.0;
    double W = 1.0;
    double tau = 10.0;
    double mass = 1.0;
    double omega = 1.0;
};

struct ProtocolValue {
    double alpha;
    double alphabar;
};

/// Linear ramp alpha = 1 - t/tau on [0, tau], held at 0 afterwards.
inline ProtocolValue protocol_alpha(double t, double tau) {
    if (t < 0.0) throw Error(ErrorKind::NegativeTime, "protocol time t=" + std::to_string(t));
    const double alpha = t >= tau ? 0.0 : 1.0 - t / tau;
    return {alpha, 1.0 - alpha};
}

/// H(t) = H_osc + alpha(t) * A + alphabar(t) * B with A, B the two Gaussian
/// pieces of the additional potential; the pieces are built once.
class DoubleWellHamiltonian {
public:
    DoubleWellHamiltonian(const SpinBasis& basis, int kappa, const PotentialParams& params)
        : basis_(basis), params_(params) {
        if (!(params.calE >= 0.0) || !(params.W > 0.0) || !(params.tau > 0.0) ||
            !(params.mass > 0.0) || !(params.omega > 0.0))
            throw Error(ErrorKind::ValidationError, "potential parameters must be positive");
        const auto quad = quadrature_operators(basis, kappa);
        position_ = quad.Jxprime.entries;
        const Matrix& x = quad.Jxprime.entries;
        const Matrix& p = quad.Jyprime.entries;
        oscillator_ = p * p / (2.0 * params.mass) +
                      0.5 * params.mass * params.omega * params.omega * x * x;
        oscillator_ = 0.5 * (oscillator_ + oscillator_.adjoint());
        const double w2 = 2.0 * params.W * params.W;
        const double e = params.calE;
        gaussian_ = hermitian_function(x, [=](double v) { return -e * std::exp(-v * v / w2); });
        shoulder_ = hermitian_function(
            x, [=](double v) { return -e * (v * v / w2) * std::exp(-v * v / w2); });
    }

    Matrix operator()(double t) const {
        const auto a = protocol_alpha(t, params_.tau);
        return oscillator_ + a.alpha * gaussian_ + a.alphabar * shoulder_;
    }

    OperatorMatrix at(double t) const { return {(*this)(t), OperatorLabel::Hamiltonian}; }

    const Matrix& position() const noexcept { return position_; }
    const SpinBasis& basis() const noexcept { return basis_; }
    const PotentialParams& params() const noexcept { return params_; }

private:
    SpinBasis basis_;
    PotentialParams params_;
    Matrix position_;
    Matrix oscillator_;
    Matrix gaussian_;
    Matrix shoulder_;
};

inline OperatorMatrix build_hamiltonian(const SpinBasis& basis, int kappa,
                                        const PotentialParams& params, double t) {
    return DoubleWellHamiltonian(basis, kappa, params).at(t);
}

/// Scalar potential of the continuous model, x^2/2 m w^2 + H_add(x, t).
inline double continuous_potential(const PotentialParams& params, double x, double t) {
    const auto a = protocol_alpha(t, params.tau);
    const double w2 = 2.0 * params.W * params.W;
    return 0.5 * params.mass * params.omega * params.omega * x * x -
           params.calE * (a.alpha + a.alphabar * x * x / w2) * std::exp(-x * x / w2);
}

// ---------------------------------------------------------------------------
// Dissipators

enum class LocalizationOperator { BareJx, Jxprime };

/// Which ladder operator is the energy-lowering jump of the thermal bath.
/// `Spin`: J- lowers (H = w Jz). `Oscillator`: J+ ~ sqrt(2j) b lowers, which
/// is the right reading once Jz = j - b^dag b.
enum class LadderOrientation { Spin, Oscillator };

struct DissipatorParams {
    double gamma = 0.0;
    double Lambda = 0.0;
    double beta_bath = 1.0;
    /// Bath mode frequency entering nbar (natural units: 1).
    double bath_omega = 1.0;
    LocalizationOperator localization = LocalizationOperator::BareJx;
    LadderOrientation orientation = LadderOrientation::Spin;

    double nbar() const { return 1.0 / std::expm1(beta_bath * bath_omega); }

    void validate() const {
        std::vector<std::string> bad;
        if (!(gamma >= 0.0)) bad.emplace_back("gamma");
        if (!(Lambda >= 0.0)) bad.emplace_back("Lambda");
        if (!(beta_bath > 0.0)) bad.emplace_back("beta_bath");
        if (!bad.empty()) {
            std::string msg = "invalid dissipator parameters:";
            for (const auto& b : bad) msg += " " + b;
            throw Error(ErrorKind::ValidationError, msg);
        }
    }
};

struct ThermalLadder {
    Matrix lowering;
    Matrix raising;
};

inline ThermalLadder thermal_ladder(const SpinOperators& spin, LadderOrientation orientation) {
    if (orientation == LadderOrientation::Spin)
        return {spin.Jminus.entries, spin.Jplus.entries};
    return {spin.Jplus.entries, spin.Jminus.entries};
}

/// L_O(rho) = O rho O^dag - {O^dag O, rho} / 2
inline Matrix lindblad_term(const Matrix& op, const Matrix& rho) {
    const Matrix odo = op.adjoint() * op;
    return op * rho * op.adjoint() - 0.5 * (odo * rho + rho * odo);
}

/// gamma [ (nbar+1) L_lower(rho) + nbar L_raise(rho) ]
inline Matrix apply_thermal_dissipator(const Matrix& rho, const DissipatorParams& p,
                                       const ThermalLadder& ladder) {
    require_same_shape(rho, ladder.lowering, "apply_thermal_dissipator");
    require_same_shape(rho, ladder.raising, "apply_thermal_dissipator");
    if (p.gamma == 0.0) return Matrix::Zero(rho.rows(), rho.cols());
    const double nbar = p.nbar();
    return p.gamma * ((nbar + 1.0) * lindblad_term(ladder.lowering, rho) +
                      nbar * lindblad_term(ladder.raising, rho));
}

/// -Lambda [A, [A, rho]]
inline Matrix apply_localization_dissipator(const Matrix& rho, const DissipatorParams& p,
                                            const Matrix& loc_op) {
    require_same_shape(rho, loc_op, "apply_localization_dissipator");
    if (p.Lambda == 0.0) return Matrix::Zero(rho.rows(), rho.cols());
    return -p.Lambda * commutator(loc_op, commutator(loc_op, rho));
}

} // namespace wehrlsim
