#pragma once

// Spin-coherent-state phase space: Husimi Q on a Gauss-Legendre x uniform
// sphere grid, Wehrl entropy, and the split of its rate into unitary,
// thermal and localization parts, with the thermal part further split into
// production and flux.

#include "dynamics.hpp"

namespace wehrlsim {

/// Gauss-Legendre nodes in cos(theta) times a uniform periodic phi grid.
/// Nodes are stored theta-major: node = i_theta * n_phi + i_phi, with theta
/// ascending.
class SphereGrid {
public:
    SphereGrid(int n_theta = 64, int n_phi = 64) : n_theta_(n_theta), n_phi_(n_phi) {
        if (n_theta < 8 || n_phi < 8)
            throw Error(ErrorKind::ValidationError, "sphere grid needs n_theta, n_phi >= 8");
        const auto [x, w] = gauss_legendre(n_theta);
        // x descending gives theta ascending
        for (int i = n_theta - 1; i >= 0; --i) {
            theta_.push_back(std::acos(x[static_cast<std::size_t>(i)]));
            theta_weight_.push_back(w[static_cast<std::size_t>(i)]);
        }
        for (int k = 0; k < n_phi; ++k) phi_.push_back(2.0 * kPi * k / n_phi);
    }

    int n_theta() const noexcept { return n_theta_; }
    int n_phi() const noexcept { return n_phi_; }
    int size() const noexcept { return n_theta_ * n_phi_; }
    double theta(int i) const { return theta_[static_cast<std::size_t>(i)]; }
    double phi(int k) const { return phi_[static_cast<std::size_t>(k)]; }
    double theta_of(int node) const { return theta(node / n_phi_); }
    double phi_of(int node) const { return phi(node % n_phi_); }
    /// Solid-angle weight of a node; the weights sum to 4 pi.
    double weight(int node) const {
        return theta_weight_[static_cast<std::size_t>(node / n_phi_)] * 2.0 * kPi / n_phi_;
    }

    /// Quadrature of a nodal field over the sphere (fixed pairwise order).
    double integrate(const std::vector<double>& field) const {
        std::vector<double> terms(field.size());
        for (std::size_t k = 0; k < field.size(); ++k)
            terms[k] = weight(static_cast<int>(k)) * field[k];
        return pairwise_sum(terms);
    }

    static std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
        std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0, p1 = 0.0;
                for (int k = 1; k <= n; ++k) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
                }
                dp = n * (z * p0 - p1) / (z * z - 1.0);
                const double dz = p0 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-15) break;
            }
            // recompute derivative at the converged node
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            x[static_cast<std::size_t>(i)] = z;
            w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
        return {x, w};
    }

private:
    int n_theta_;
    int n_phi_;
    std::vector<double> theta_;
    std::vector<double> theta_weight_;
    std::vector<double> phi_;
};

namespace detail {

inline double ipow(double x, int e) { return e == 0 ? 1.0 : std::pow(x, e); }

inline double sqrt_binomial(int n, int k) {
    return std::exp(0.5 * (std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)));
}

inline void check_angles(double theta, double phi) {
    if (!(theta >= 0.0 && theta <= kPi) || !(phi >= 0.0 && phi < 2.0 * kPi))
        throw Error(ErrorKind::AngleOutOfRange,
                    "theta=" + std::to_string(theta) + " phi=" + std::to_string(phi));
}

/// Amplitudes <j,m|Omega> and, if requested, their theta derivatives. No
/// range check; callers evaluating off-grid for finite differences use it
/// directly.
inline Vector coherent_amplitudes(const SpinBasis& basis, double theta, double phi,
                                  Vector* dtheta = nullptr) {
    const int n = basis.dimension();
    const int two_j = basis.two_j();
    const double c = std::cos(0.5 * theta);
    const double s = std::sin(0.5 * theta);
    Vector amp(n);
    if (dtheta) dtheta->resize(n);
    for (int k = 0; k < n; ++k) {
        const int a = two_j - k; // power of cos(theta/2), = j + m
        const int b = k;         // power of sin(theta/2), = j - m
        const double norm = sqrt_binomial(two_j, k);
        const cplx phase = std::exp(-kI * (basis.m(k) * phi));
        amp(k) = norm * ipow(c, a) * ipow(s, b) * phase;
        if (dtheta) {
            double d = 0.0;
            if (a > 0) d -= a * ipow(c, a - 1) * ipow(s, b + 1);
            if (b > 0) d += b * ipow(c, a + 1) * ipow(s, b - 1);
            (*dtheta)(k) = 0.5 * norm * d * phase;
        }
    }
    return amp;
}

} // namespace detail

/// |Omega> = exp(-i phi Jz) exp(-i theta Jy) |j,j> in closed form.
inline Vector coherent_state(const SpinBasis& basis, double theta, double phi) {
    detail::check_angles(theta, phi);
    return detail::coherent_amplitudes(basis, theta, phi);
}

/// Q(theta, phi) = <Omega|rho|Omega> at a single point.
inline double husimi_at(const Matrix& rho, double theta, double phi) {
    const SpinBasis basis(static_cast<int>(rho.rows()));
    const Vector v = detail::coherent_amplitudes(basis, theta, phi);
    return (v.adjoint() * rho * v)(0, 0).real();
}

struct HusimiField {
    static constexpr double kLogFloor = 1e-300;
    std::vector<double> values;
};

/// Coherent states tabulated on a sphere grid for one basis.
class PhaseSpace {
public:
    PhaseSpace(const SpinBasis& basis, SphereGrid grid)
        : basis_(basis), grid_(std::move(grid)), spin_(build_spin_operators(basis)) {
        const int n = basis.dimension();
        const int nodes = grid_.size();
        states_.resize(n, nodes);
        dtheta_.resize(n, nodes);
        for (int node = 0; node < nodes; ++node) {
            Vector d;
            states_.col(node) =
                detail::coherent_amplitudes(basis, grid_.theta_of(node), grid_.phi_of(node), &d);
            dtheta_.col(node) = d;
        }
        // pi rotation about x: Jz -> -Jz, J+ <-> J-
        flip_ = unitary_exponential(-kPi * spin_.Jx.entries);
    }

    const SpinBasis& basis() const noexcept { return basis_; }
    const SphereGrid& grid() const noexcept { return grid_; }
    const SpinOperators& spin() const noexcept { return spin_; }
    const Matrix& states() const noexcept { return states_; }

    /// N / 4pi, the normalization of the coherent-state resolution of identity.
    double measure() const { return basis_.dimension() / (4.0 * kPi); }

    /// <Omega|X|Omega> at every node.
    std::vector<cplx> expectation(const Matrix& x) const {
        require_same_shape(x, Matrix::Zero(basis_.dimension(), basis_.dimension()),
                           "PhaseSpace::expectation");
        const Matrix xs = x * states_;
        std::vector<cplx> out(static_cast<std::size_t>(grid_.size()));
        for (int node = 0; node < grid_.size(); ++node)
            out[static_cast<std::size_t>(node)] = states_.col(node).dot(xs.col(node));
        return out;
    }

    std::vector<double> real_expectation(const Matrix& x) const {
        const auto c = expectation(x);
        std::vector<double> out(c.size());
        for (std::size_t k = 0; k < c.size(); ++k) out[k] = c[k].real();
        return out;
    }

    /// dQ/dtheta at every node, from the exact derivative of the amplitudes.
    std::vector<double> theta_derivative(const Matrix& rho) const {
        const Matrix rs = rho * states_;
        std::vector<double> out(static_cast<std::size_t>(grid_.size()));
        for (int node = 0; node < grid_.size(); ++node)
            out[static_cast<std::size_t>(node)] = 2.0 * dtheta_.col(node).dot(rs.col(node)).real();
        return out;
    }

    /// The state rotated by pi about x, used to evaluate the thermal
    /// production/flux when J+ is the lowering jump.
    Matrix flipped(const Matrix& rho) const { return flip_ * rho * flip_.adjoint(); }

private:
    SpinBasis basis_;
    SphereGrid grid_;
    SpinOperators spin_;
    Matrix states_;
    Matrix dtheta_;
    Matrix flip_;
};

inline HusimiField husimi(const Matrix& rho, const PhaseSpace& ps) {
    HusimiField q{ps.real_expectation(rho)};
    for (auto& v : q.values) {
        if (v < -1e-9)
            throw Error(ErrorKind::NegativeQ, "Husimi value " + std::to_string(v) + " < -1e-9");
        if (v < 0.0) v = 0.0;
    }
    return q;
}

/// (N/4pi) * integral of Q; equals 1 for a normalized state.
inline double husimi_normalization(const HusimiField& q, const PhaseSpace& ps) {
    return ps.measure() * ps.grid().integrate(q.values);
}

/// S_Q = -(N/4pi) * integral of Q ln Q, with 0 ln 0 = 0.
inline double wehrl_entropy(const HusimiField& q, const PhaseSpace& ps) {
    std::vector<double> f(q.values.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double v = q.values[k];
        f[k] = v > 0.0 ? v * std::log(std::max(v, HusimiField::kLogFloor)) : 0.0;
    }
    return -ps.measure() * ps.grid().integrate(f);
}

inline double wehrl_entropy(const Matrix& rho, const PhaseSpace& ps) {
    return wehrl_entropy(husimi(rho, ps), ps);
}

/// <Omega|[op, rho]|Omega> on the grid. `op` must be J+, J-, Jz or Jx.
inline std::vector<cplx> phase_space_commutator(const Matrix& rho, const OperatorMatrix& op,
                                                const PhaseSpace& ps) {
    switch (op.label) {
    case OperatorLabel::Jplus:
    case OperatorLabel::Jminus:
    case OperatorLabel::Jz:
    case OperatorLabel::Jx:
        break;
    default:
        throw Error(ErrorKind::UnsupportedOperator,
                    "phase-space commutator only maps J+, J-, Jz, Jx");
    }
    return ps.expectation(commutator(op.entries, rho));
}

/// The same field from the differential operators acting on Q,
///   J+ -> e^{i phi} (d_theta + i cot(theta) d_phi) Q
///   J- -> -e^{-i phi} (d_theta - i cot(theta) d_phi) Q
///   Jz -> -i d_phi Q,  Jx -> (J+ + J-) / 2,
/// with fourth-order central differences of step h. Evaluated at interior
/// nodes only (the Gauss-Legendre grid never touches the poles).
inline cplx differential_commutator_at(const Matrix& rho, OperatorLabel label, double theta,
                                       double phi, double h) {
    auto q = [&](double th, double ph) { return husimi_at(rho, th, ph); };
    const double dth =
        (-q(theta + 2 * h, phi) + 8 * q(theta + h, phi) - 8 * q(theta - h, phi) + q(theta - 2 * h, phi)) /
        (12 * h);
    const double dph =
        (-q(theta, phi + 2 * h) + 8 * q(theta, phi + h) - 8 * q(theta, phi - h) + q(theta, phi - 2 * h)) /
        (12 * h);
    const double cot = std::cos(theta) / std::sin(theta);
    const cplx jp = std::exp(kI * phi) * (dth + kI * cot * dph);
    const cplx jm = -std::exp(-kI * phi) * (dth - kI * cot * dph);
    switch (label) {
    case OperatorLabel::Jplus: return jp;
    case OperatorLabel::Jminus: return jm;
    case OperatorLabel::Jz: return -kI * dph;
    case OperatorLabel::Jx: return 0.5 * (jp + jm);
    default:
        throw Error(ErrorKind::UnsupportedOperator,
                    "phase-space commutator only maps J+, J-, Jz, Jx");
    }
}

inline std::vector<cplx> differential_commutator(const Matrix& rho, OperatorLabel label,
                                                 const PhaseSpace& ps, double h = 1e-3) {
    const auto& g = ps.grid();
    std::vector<cplx> out(static_cast<std::size_t>(g.size()));
    for (int node = 0; node < g.size(); ++node)
        out[static_cast<std::size_t>(node)] =
            differential_commutator_at(rho, label, g.theta_of(node), g.phi_of(node), h);
    return out;
}

// ---------------------------------------------------------------------------
// Entropy rates

struct EntropyRates {
    double dS_U = 0.0;
    double dS_th = 0.0;
    double dS_lc = 0.0;
    double Pi_th = 0.0;
    double Phi_th = 0.0;
    double Pi_lc = 0.0;

    double total() const { return dS_U + dS_th + dS_lc; }
    double max_rate() const {
        return std::max({std::abs(Pi_th), std::abs(Pi_lc), std::abs(Phi_th)});
    }
};

/// Floor for Q inside ln Q and 1/Q of the rate integrals.
inline constexpr double kRateFloor = 1e-12;

namespace detail {

/// -(N/4pi) * integral of <Omega|term|Omega> ln Q.
inline double entropy_rate_of(const Matrix& term, const HusimiField& q, const PhaseSpace& ps) {
    const auto field = ps.real_expectation(term);
    std::vector<double> f(field.size());
    for (std::size_t k = 0; k < f.size(); ++k)
        f[k] = field[k] * std::log(std::max(q.values[k], kRateFloor));
    return -ps.measure() * ps.grid().integrate(f);
}

inline Matrix thermal_frame(const Matrix& rho, const DissipatorParams& diss, const PhaseSpace& ps) {
    return diss.orientation == LadderOrientation::Spin ? rho : ps.flipped(rho);
}

} // namespace detail

/// dS_U, dS_th and dS_lc; the production/flux fields are left zero.
inline EntropyRates rate_decomposition(const Matrix& rho, double t, const Liouvillian& generator,
                                       const PhaseSpace& ps) {
    const auto q = husimi(rho, ps);
    EntropyRates r;
    r.dS_U = detail::entropy_rate_of(generator.unitary_part(rho, t), q, ps);
    r.dS_th = generator.dissipator().gamma == 0.0
                  ? 0.0
                  : detail::entropy_rate_of(generator.thermal_part(rho), q, ps);
    r.dS_lc = generator.dissipator().Lambda == 0.0
                  ? 0.0
                  : detail::entropy_rate_of(generator.localization_part(rho), q, ps);
    return r;
}

/// Thermal entropy flux rate
///   Phi = gamma j(2j+1)/4pi * integral sin(theta) [2j Q sin(theta) / (2nbar+1 - cos(theta)) - dQ/dtheta]
inline double flux_thermal(const Matrix& rho, const DissipatorParams& diss, const PhaseSpace& ps) {
    if (diss.gamma == 0.0) return 0.0;
    const Matrix frame = detail::thermal_frame(rho, diss, ps);
    const auto q = husimi(frame, ps);
    const auto dq = ps.theta_derivative(frame);
    const double j = ps.basis().j();
    const double a = 2.0 * diss.nbar() + 1.0;
    const auto& g = ps.grid();
    std::vector<double> f(q.values.size());
    for (int node = 0; node < g.size(); ++node) {
        const auto k = static_cast<std::size_t>(node);
        const double th = g.theta_of(node);
        const double s = std::sin(th);
        const double c = std::cos(th);
        f[k] = s * (2.0 * j * q.values[k] * s / (a - c) - dq[k]);
    }
    return diss.gamma * j * (2.0 * j + 1.0) / (4.0 * kPi) * g.integrate(f);
}

/// Thermal irreversible entropy production rate
///   Pi = gamma (2j+1)/8pi * integral (1/Q) { |Jz(Q)|^2 ((2nbar+1)cos - 1)/(tan sin)
///        + [2j Q sin + (cos - (2nbar+1)) dQ/dtheta]^2 / ((2nbar+1) - cos) }
inline double production_thermal(const Matrix& rho, const DissipatorParams& diss,
                                 const PhaseSpace& ps) {
    if (diss.gamma == 0.0) return 0.0;
    const Matrix frame = detail::thermal_frame(rho, diss, ps);
    const auto q = husimi(frame, ps);
    const auto dq = ps.theta_derivative(frame);
    const auto jz = ps.expectation(commutator(ps.spin().Jz.entries, frame));
    const double j = ps.basis().j();
    const double a = 2.0 * diss.nbar() + 1.0;
    const auto& g = ps.grid();
    std::vector<double> f(q.values.size());
    for (int node = 0; node < g.size(); ++node) {
        const auto k = static_cast<std::size_t>(node);
        const double th = g.theta_of(node);
        const double s = std::sin(th);
        const double c = std::cos(th);
        const double qv = q.values[k];
        const double flow = 2.0 * j * qv * s + (c - a) * dq[k];
        const double rot = std::norm(jz[k]) * (a * c - 1.0) / (std::tan(th) * s);
        f[k] = (rot + flow * flow / (a - c)) / std::max(qv, kRateFloor);
    }
    return diss.gamma * (2.0 * j + 1.0) / (8.0 * kPi) * g.integrate(f);
}

/// Localization entropy production rate, Lambda N/4pi * integral |Jx(Q)|^2 / Q
/// with Jx(Q) = <Omega|[Jx, rho]|Omega>. That identity needs the localization
/// operator to be a rotation generator; for Jx' the direct rate -(N/4pi)
/// * integral D_lc(Q) ln Q is returned instead (no localization flux).
inline double production_localization(const Matrix& rho, const DissipatorParams& diss,
                                      const PhaseSpace& ps, const Matrix& loc_op) {
    if (diss.Lambda == 0.0) return 0.0;
    const auto q = husimi(rho, ps);
    if (diss.localization == LocalizationOperator::Jxprime)
        return detail::entropy_rate_of(apply_localization_dissipator(rho, diss, loc_op), q, ps);
    const auto jx = phase_space_commutator(rho, ps.spin().Jx, ps);
    std::vector<double> f(jx.size());
    for (std::size_t k = 0; k < f.size(); ++k)
        f[k] = std::norm(jx[k]) / std::max(q.values[k], kRateFloor);
    return diss.Lambda * ps.measure() * ps.grid().integrate(f);
}

/// All six rates at one instant.
inline EntropyRates entropy_rates(const Matrix& rho, double t, const Liouvillian& generator,
                                  const PhaseSpace& ps) {
    EntropyRates r = rate_decomposition(rho, t, generator, ps);
    r.Phi_th = flux_thermal(rho, generator.dissipator(), ps);
    r.Pi_th = production_thermal(rho, generator.dissipator(), ps);
    r.Pi_lc = production_localization(rho, generator.dissipator(), ps,
                                      generator.localization_operator());
    return r;
}

/// Pi_th + Pi_lc - Phi_th; vanishes at a non-equilibrium steady state.
inline double stationarity_residual(const EntropyRates& r) { return r.Pi_th + r.Pi_lc - r.Phi_th; }

} // namespace wehrlsim
