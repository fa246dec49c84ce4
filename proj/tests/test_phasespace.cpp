#include "oracles.hpp"

#include <wehrlsim/observables.hpp>
#include <wehrlsim/phasespace.hpp>

#include <gtest/gtest.h>

using namespace wehrlsim;

namespace {

const PhaseSpace& space(int dim) {
    static std::map<int, PhaseSpace> cache;
    auto it = cache.find(dim);
    if (it == cache.end()) it = cache.emplace(dim, PhaseSpace(SpinBasis(dim), SphereGrid(64, 64))).first;
    return it->second;
}

Liouvillian spin_generator(int dim, double gamma, double lambda, double beta_bath = 1.0) {
    const auto s = build_spin_operators(SpinBasis(dim));
    DissipatorParams d;
    d.gamma = gamma;
    d.Lambda = lambda;
    d.beta_bath = beta_bath;
    return Liouvillian(constant_hamiltonian(s.Jz.entries), d, thermal_ladder(s, LadderOrientation::Spin),
                       s.Jx.entries);
}

} // namespace

TEST(SphereGrid, WeightsAndPolynomialExactness) {
    const SphereGrid g(16, 16);
    std::vector<double> one(static_cast<std::size_t>(g.size()), 1.0), c4(one.size());
    for (int n = 0; n < g.size(); ++n) c4[static_cast<std::size_t>(n)] = std::pow(std::cos(g.theta_of(n)), 4);
    EXPECT_NEAR(g.integrate(one), 4 * kPi, 1e-13);
    EXPECT_NEAR(g.integrate(c4), 4 * kPi / 5, 1e-13);
    EXPECT_THROW(SphereGrid(4, 64), Error);
}

TEST(CoherentState, TopAndNorm) {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> th(0, kPi), ph(0, 2 * kPi);
    for (int dim = 2; dim <= 25; ++dim) {
        const SpinBasis b(dim);
        const Vector top = coherent_state(b, 0.0, 0.0);
        EXPECT_NEAR(std::abs(top(0)), 1.0, 1e-15);
        EXPECT_NEAR(top.norm(), 1.0, 1e-15);
        EXPECT_NEAR(coherent_state(b, th(rng), ph(rng)).norm(), 1.0, 1e-12);
    }
}

TEST(CoherentState, MatchesRotationOracle) {
    for (int dim : {2, 4, 25}) {
        const Vector v = coherent_state(SpinBasis(dim), 1.1, 2.3);
        const Vector ref = oracle::rotated_top_state(dim, 1.1, 2.3);
        EXPECT_LT((v - ref).cwiseAbs().maxCoeff(), 1e-10) << dim;
    }
}

TEST(CoherentState, AngleRange) {
    try {
        coherent_state(SpinBasis(3), -0.1, 0.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::AngleOutOfRange);
    }
    EXPECT_THROW(coherent_state(SpinBasis(3), 1.0, 2 * kPi), Error);
}

TEST(PhaseSpace, ResolutionOfIdentity) {
    for (int dim : {2, 4, 25}) {
        const auto& ps = space(dim);
        Matrix acc = Matrix::Zero(dim, dim);
        for (int n = 0; n < ps.grid().size(); ++n)
            acc += ps.grid().weight(n) * ps.states().col(n) * ps.states().col(n).adjoint();
        EXPECT_LT(max_abs(ps.measure() * acc - Matrix::Identity(dim, dim)), 1e-6) << dim;
    }
}

TEST(Husimi, MixedAndTopState) {
    const auto& ps = space(4);
    const auto q = husimi(Matrix::Identity(4, 4) / 4.0, ps);
    for (double v : q.values) EXPECT_NEAR(v, 0.25, 1e-14);
    Matrix top = Matrix::Zero(4, 4);
    top(0, 0) = 1.0;
    const auto qt = husimi(top, ps);
    for (int n = 0; n < ps.grid().size(); n += 37)
        EXPECT_NEAR(qt.values[static_cast<std::size_t>(n)], std::pow(std::cos(0.5 * ps.grid().theta_of(n)), 6), 1e-14);
}

TEST(Husimi, Normalization) {
    std::mt19937 rng(12);
    for (int dim : {2, 4, 25}) {
        const Matrix rho = oracle::random_density(dim, rng);
        EXPECT_NEAR(husimi_normalization(husimi(rho, space(dim)), space(dim)), 1.0, 1e-6);
    }
}

TEST(Husimi, NegativeRejected) {
    Matrix bad = Matrix::Zero(2, 2);
    bad(0, 0) = -1.0;
    bad(1, 1) = 2.0;
    try {
        husimi(bad, space(2));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NegativeQ);
    }
}

TEST(Wehrl, ClosedForms) {
    EXPECT_NEAR(wehrl_entropy(Matrix(Matrix::Identity(2, 2) / 2.0), space(2)), std::log(2.0), 1e-10);
    for (int dim : {2, 3, 4, 25}) {
        const double j = 0.5 * (dim - 1);
        const double expect = 2 * j / (2 * j + 1);
        EXPECT_NEAR(oracle::coherent_wehrl(j), expect, 1e-9);
        const Vector v = coherent_state(SpinBasis(dim), 0.7, 4.0);
        EXPECT_NEAR(wehrl_entropy(Matrix(v * v.adjoint()), space(dim)), expect, 1e-6) << dim;
    }
}

TEST(Wehrl, BoundsVonNeumann) {
    std::mt19937 rng(13);
    for (int k = 0; k < 10; ++k) {
        const Matrix rho = oracle::random_density(4, rng);
        EXPECT_GE(wehrl_entropy(rho, space(4)), von_neumann_entropy(rho) - 1e-6);
    }
}

TEST(Commutator, VanishingCases) {
    const auto& ps = space(4);
    const Matrix diag = thermal_state(ps.spin().Jz.entries, 1.3).entries();
    for (const auto& v : phase_space_commutator(diag, ps.spin().Jz, ps)) EXPECT_LT(std::abs(v), 1e-14);
    const auto eig = hermitian_eigen(ps.spin().Jx.entries);
    const Matrix proj = eig.vectors.col(2) * eig.vectors.col(2).adjoint();
    for (const auto& v : phase_space_commutator(proj, ps.spin().Jx, ps)) EXPECT_LT(std::abs(v), 1e-12);
    EXPECT_THROW(phase_space_commutator(diag, ps.spin().Jy, ps), Error);
}

TEST(Commutator, MatrixVersusDifferentialRoute) {
    std::mt19937 rng(14);
    const PhaseSpace ps(SpinBasis(4), SphereGrid(128, 128));
    const Matrix rho = oracle::random_density(4, rng);
    for (const auto& op : {ps.spin().Jplus, ps.spin().Jminus, ps.spin().Jz, ps.spin().Jx}) {
        const auto a = phase_space_commutator(rho, op, ps);
        const auto b = differential_commutator(rho, op.label, ps);
        double worst = 0;
        for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
        EXPECT_LT(worst, 1e-4);
    }
}

TEST(ThetaDerivative, MatchesFiniteDifference) {
    std::mt19937 rng(15);
    const auto& ps = space(4);
    const Matrix rho = oracle::random_density(4, rng);
    const auto d = ps.theta_derivative(rho);
    const double h = 1e-4;
    for (int n = 5; n < ps.grid().size(); n += 97) {
        const double th = ps.grid().theta_of(n), ph = ps.grid().phi_of(n);
        const double fd = (husimi_at(rho, th + h, ph) - husimi_at(rho, th - h, ph)) / (2 * h);
        EXPECT_NEAR(d[static_cast<std::size_t>(n)], fd, 1e-7);
    }
}

TEST(Rates, StationaryUnitary) {
    const auto gen = spin_generator(4, 0.0, 0.0);
    const Matrix rho = thermal_state(space(4).spin().Jz.entries, 2.0).entries();
    const auto r = entropy_rates(rho, 0.0, gen, space(4));
    EXPECT_NEAR(r.dS_U, 0.0, 1e-14);
    EXPECT_EQ(r.dS_th, 0.0);
    EXPECT_EQ(r.dS_lc, 0.0);
    EXPECT_EQ(r.Phi_th, 0.0);
    EXPECT_EQ(r.Pi_th, 0.0);
    EXPECT_EQ(r.Pi_lc, 0.0);
    EXPECT_EQ(stationarity_residual(EntropyRates{}), 0.0);
}

TEST(Rates, BathGibbsIsEquilibrium) {
    const auto gen = spin_generator(4, 0.5, 0.0);
    const Matrix rho = thermal_state(space(4).spin().Jz.entries, 1.0).entries();
    const auto r = entropy_rates(rho, 0.0, gen, space(4));
    EXPECT_NEAR(r.dS_th, 0.0, 1e-6);
    EXPECT_NEAR(r.Phi_th, 0.0, 1e-5);
    EXPECT_NEAR(r.Pi_th, 0.0, 1e-5);
}

TEST(Rates, ColdSystemHeats) {
    const auto gen = spin_generator(4, 0.5, 0.5);
    const Matrix rho = thermal_state(space(4).spin().Jz.entries, 2.0).entries();
    const auto r = entropy_rates(rho, 0.0, gen, space(4));
    EXPECT_GT(r.dS_th, 0.0);
    EXPECT_LT(r.Phi_th, 0.0);
    EXPECT_GT(r.Pi_th, 0.0);
    EXPECT_GT(r.Pi_lc, r.Pi_th);
    EXPECT_GT(std::abs(stationarity_residual(r)), 1e-3);
}

TEST(Rates, ProductionMinusFluxIsThermalRate) {
    std::mt19937 rng(16);
    for (int k = 0; k < 4; ++k) {
        const auto gen = spin_generator(4, 0.4, 0.3, 0.5 + k);
        const Matrix rho = oracle::random_density(4, rng);
        const auto r = entropy_rates(rho, 0.0, gen, space(4));
        const double scale = std::max(std::abs(r.Pi_th), std::abs(r.Phi_th));
        EXPECT_LT(std::abs(r.dS_th - (r.Pi_th - r.Phi_th)), 1e-4 * scale);
        EXPECT_LT(std::abs(r.dS_lc - r.Pi_lc), 1e-4 * r.Pi_lc);
        EXPECT_GE(r.Pi_th, -1e-6);
        EXPECT_GE(r.Pi_lc, -1e-6);
    }
}

TEST(Rates, FluxAgainstFiniteDifferenceQuadrature) {
    // same integrand, dQ/dtheta by central differences of the pointwise Husimi function
    std::mt19937 rng(17);
    const auto& ps = space(4);
    const Matrix rho = oracle::random_density(4, rng);
    DissipatorParams d;
    d.gamma = 0.5;
    const double j = 1.5, a = 2 * d.nbar() + 1;
    std::vector<double> f(static_cast<std::size_t>(ps.grid().size()));
    for (int n = 0; n < ps.grid().size(); ++n) {
        const double th = ps.grid().theta_of(n), ph = ps.grid().phi_of(n), h = 1e-5;
        const double q = husimi_at(rho, th, ph);
        const double dq = (husimi_at(rho, th + h, ph) - husimi_at(rho, th - h, ph)) / (2 * h);
        f[static_cast<std::size_t>(n)] = std::sin(th) * (2 * j * q * std::sin(th) / (a - std::cos(th)) - dq);
    }
    const double ref = d.gamma * j * (2 * j + 1) / (4 * kPi) * ps.grid().integrate(f);
    EXPECT_NEAR(flux_thermal(rho, d, ps), ref, 1e-8);
}

TEST(Rates, OscillatorOrientationUsesFlippedFrame) {
    std::mt19937 rng(18);
    const auto& ps = space(4);
    const Matrix rho = oracle::random_density(4, rng);
    DissipatorParams spin_d, osc_d;
    spin_d.gamma = osc_d.gamma = 0.5;
    osc_d.orientation = LadderOrientation::Oscillator;
    const Matrix flipped = ps.flipped(rho);
    EXPECT_NEAR(flux_thermal(rho, osc_d, ps), flux_thermal(flipped, spin_d, ps), 1e-12);
    EXPECT_NEAR(production_thermal(rho, osc_d, ps), production_thermal(flipped, spin_d, ps), 1e-12);
    // and the split still closes against the matrix route of the flipped ladder
    const auto s = ps.spin();
    const Liouvillian gen(constant_hamiltonian(s.Jz.entries), osc_d, thermal_ladder(s, LadderOrientation::Oscillator),
                          s.Jx.entries);
    const auto r = entropy_rates(rho, 0.0, gen, ps);
    EXPECT_LT(std::abs(r.dS_th - (r.Pi_th - r.Phi_th)), 1e-4 * std::max(std::abs(r.Pi_th), std::abs(r.Phi_th)));
}

TEST(Rates, LocalizationVanishesForMixedState) {
    DissipatorParams d;
    d.Lambda = 0.5;
    EXPECT_NEAR(production_localization(Matrix::Identity(4, 4) / 4.0, d, space(4), space(4).spin().Jx.entries), 0.0,
                1e-14);
    d.Lambda = 0.0;
    EXPECT_EQ(production_localization(Matrix::Identity(4, 4) / 4.0, d, space(4), space(4).spin().Jx.entries), 0.0);
}
