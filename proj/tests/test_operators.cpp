#include "oracles.hpp"

#include <wehrlsim/operators.hpp>

#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_dec_float.hpp>

using namespace wehrlsim;

TEST(SpinOperators, QubitDefinitions) {
    const auto s = build_spin_operators(SpinBasis(2));
    EXPECT_NEAR(s.Jz.entries(0, 0).real(), 0.5, 1e-15);
    EXPECT_NEAR(s.Jz.entries(1, 1).real(), -0.5, 1e-15);
    Vector top = Vector::Zero(2);
    top(0) = 1.0;
    EXPECT_LT((s.Jplus.entries * top).norm(), 1e-15);
}

TEST(SpinOperators, SpinOneRaisingElement) {
    const auto s = build_spin_operators(SpinBasis(3));
    // <1,1|J+|1,0>, i.e. row index 0, column index 1
    EXPECT_NEAR(std::abs(s.Jplus.entries(0, 1)), std::sqrt(2.0), 1e-14);
}

TEST(SpinOperators, MatchLadderRecursionOracle) {
    for (int dim = 2; dim <= 25; ++dim) {
        const auto s = build_spin_operators(SpinBasis(dim));
        const auto o = oracle::spin(dim);
        EXPECT_LT(max_abs(s.Jx.entries - o.jx), 1e-13) << dim;
        EXPECT_LT(max_abs(s.Jy.entries - o.jy), 1e-13) << dim;
        EXPECT_LT(max_abs(s.Jz.entries - o.jz), 1e-13) << dim;
    }
}

TEST(SpinOperators, CommutationAndCasimir) {
    for (int dim = 2; dim <= 25; ++dim) {
        const auto s = build_spin_operators(SpinBasis(dim));
        const Matrix& x = s.Jx.entries;
        const Matrix& y = s.Jy.entries;
        const Matrix& z = s.Jz.entries;
        EXPECT_LT(max_abs(commutator(x, y) - kI * z), 1e-12);
        EXPECT_LT(max_abs(commutator(y, z) - kI * x), 1e-12);
        EXPECT_LT(max_abs(commutator(z, x) - kI * y), 1e-12);
        const double j = 0.5 * (dim - 1);
        const Matrix c = x * x + y * y + z * z - j * (j + 1) * Matrix::Identity(dim, dim);
        EXPECT_LT(max_abs(c), 1e-10);
    }
}

TEST(SpinBasis, RejectsTooSmall) { EXPECT_THROW(SpinBasis(1), Error); }

TEST(HpTaylor, ZerothEntryIsRootTwoJ) {
    for (int k : {1, 2, 15}) {
        const auto hp = hp_taylor(SpinBasis(25), k);
        EXPECT_NEAR(hp.Mkappa.entries(0, 0).real(), std::sqrt(24.0), 1e-13);
    }
}

TEST(HpTaylor, SecondOrderClosedForm) {
    const SpinBasis b(25);
    const auto hp = hp_taylor(b, 2);
    const double r = std::sqrt(24.0);
    for (int n = 0; n < 25; ++n) {
        const double expect = r - n / (2 * r) - n * n / (8 * r * r * r);
        EXPECT_NEAR(hp.Mkappa.entries(n, n).real(), expect, 1e-12) << n;
        EXPECT_NEAR((hp.Mkappa.entries(n, n) * hp.MkappaInv.entries(n, n)).real(), 1.0, 1e-14);
    }
}

TEST(HpTaylor, HighOrderAgainstMultiprecisionSeries) {
    using Big = boost::multiprecision::cpp_dec_float_50;
    // sqrt(2j - n) = sqrt(2j) sum_k binom(1/2, k) (-n/2j)^k, summed exactly to order 15
    const Big x = Big(4) / 24;
    Big term = 1, sum = 1;
    for (int k = 1; k <= 15; ++k) {
        term *= -(Big(0.5) - (k - 1)) / k * x;
        sum += term;
    }
    const double series = static_cast<double>(sqrt(Big(24)) * sum);
    const auto hp = hp_taylor(SpinBasis(25), 15);
    EXPECT_NEAR(hp.Mkappa.entries(4, 4).real(), series, 1e-12);
    EXPECT_LT(std::abs(hp.Mkappa.entries(4, 4).real() - std::sqrt(20.0)) / std::sqrt(20.0), 1e-6);
}

TEST(HpTaylor, RejectsNonPositiveOrder) { EXPECT_THROW(hp_taylor(SpinBasis(4), 0), Error); }

TEST(HpTaylor, NonInvertibleWhenSeriesCrossesZero) {
    // order 1 vanishes at n = 4j, which a basis never reaches; probe the series directly
    const auto v = taylor_sqrt_levels(2, 1, 5);
    EXPECT_NEAR(v[4], 0.0, 1e-15);
    EXPECT_NO_THROW(hp_taylor(SpinBasis(3), 1));
}

TEST(Quadratures, MatchOscillatorLowSector) {
    const auto q = quadrature_operators(SpinBasis(25), 15);
    EXPECT_NEAR(std::abs(q.Jxprime.entries(0, 1)), 1.0 / std::sqrt(2.0), 1e-6);
    EXPECT_LT(hermiticity_error(q.Jxprime.entries), 1e-12);
    EXPECT_LT(hermiticity_error(q.Jyprime.entries), 1e-12);
    const Matrix c = commutator(q.Jxprime.entries, q.Jyprime.entries);
    EXPECT_LT(std::abs(c(0, 0) - kI), 1e-4);
}

TEST(Protocol, Ramp) {
    auto a = protocol_alpha(0.0, 10.0);
    EXPECT_EQ(a.alpha, 1.0);
    EXPECT_EQ(a.alphabar, 0.0);
    a = protocol_alpha(10.0, 10.0);
    EXPECT_EQ(a.alpha, 0.0);
    EXPECT_EQ(a.alphabar, 1.0);
    a = protocol_alpha(20.0, 10.0);
    EXPECT_EQ(a.alpha, 0.0);
    a = protocol_alpha(2.5, 10.0);
    EXPECT_DOUBLE_EQ(a.alpha + a.alphabar, 1.0);
    EXPECT_THROW(protocol_alpha(-1.0, 10.0), Error);
}

TEST(Hamiltonian, HermitianAtAllTimes) {
    const DoubleWellHamiltonian h(SpinBasis(25), 15, PotentialParams{});
    for (double t : {0.0, 3.3, 10.0, 25.0}) EXPECT_LT(hermiticity_error(h(t)), 1e-12);
}

TEST(Hamiltonian, AdditionalTermAtOrigin) {
    const PotentialParams p;
    EXPECT_NEAR(continuous_potential(p, 0.0, 0.0), -p.calE, 1e-14);
    EXPECT_NEAR(continuous_potential(p, 0.0, p.tau), 0.0, 1e-14);
}

TEST(Hamiltonian, FinalPotentialMinimaAgainstRootFinder) {
    const PotentialParams p;
    // dv/dx = x (1 - 10 e^{-x^2/2} (1 - x^2/2)); bracket the positive root
    const double xs = oracle::bisect([](double x) { return 1 - 10 * std::exp(-x * x / 2) * (1 - x * x / 2); },
                                     1.0, 3.0);
    const double vs = xs * xs / 2 - 10 * (xs * xs / 2) * std::exp(-xs * xs / 2);
    EXPECT_NEAR(continuous_potential(p, xs, p.tau), vs, 1e-12);
    EXPECT_NEAR(continuous_potential(p, -xs, p.tau), vs, 1e-12);
    for (double dx : {-1e-3, 1e-3}) {
        EXPECT_GT(continuous_potential(p, xs + dx, p.tau), vs);
    }
    EXPECT_GT(continuous_potential(p, 0.0, p.tau), vs);
}

TEST(Hamiltonian, GaussianThroughEigendecomposition) {
    // at t = 0 the additional term is -E exp(-Jx'^2/2): compare with the matrix exponential
    const SpinBasis b(25);
    PotentialParams p;
    const DoubleWellHamiltonian h(b, 15, p);
    p.calE = 0.0;
    const DoubleWellHamiltonian h0(b, 15, p);
    const Matrix x = h.position();
    const Matrix expect = -10.0 * oracle::expm(-0.5 * x * x);
    EXPECT_LT(max_abs(h(0.0) - h0(0.0) - expect), 1e-10);
}

TEST(Hamiltonian, RejectsBadParameters) {
    PotentialParams p;
    p.W = 0.0;
    EXPECT_THROW(DoubleWellHamiltonian(SpinBasis(5), 3, p), Error);
}

class DissipatorTest : public ::testing::Test {
protected:
    SpinBasis basis{4};
    SpinOperators s = build_spin_operators(basis);
    ThermalLadder ladder = thermal_ladder(s, LadderOrientation::Spin);
};

TEST_F(DissipatorTest, ThermalOffIsZero) {
    DissipatorParams p;
    std::mt19937 rng(1);
    EXPECT_EQ(max_abs(apply_thermal_dissipator(oracle::random_density(4, rng), p, ladder)), 0.0);
}

TEST_F(DissipatorTest, GibbsIsFixedPoint) {
    DissipatorParams p;
    p.gamma = 0.5;
    const Matrix gibbs = oracle::expm(-p.beta_bath * s.Jz.entries);
    const Matrix rho = gibbs / gibbs.trace();
    EXPECT_LT(apply_thermal_dissipator(rho, p, ladder).norm(), 1e-10);
}

TEST_F(DissipatorTest, OscillatorOrientationFixesFlippedGibbs) {
    DissipatorParams p;
    p.gamma = 0.5;
    const Matrix gibbs = oracle::expm(p.beta_bath * s.Jz.entries);
    const Matrix rho = gibbs / gibbs.trace();
    EXPECT_LT(apply_thermal_dissipator(rho, p, thermal_ladder(s, LadderOrientation::Oscillator)).norm(), 1e-10);
}

TEST_F(DissipatorTest, TracelessAndHermitian) {
    DissipatorParams p;
    p.gamma = 0.7;
    p.Lambda = 0.3;
    std::mt19937 rng(2);
    for (int k = 0; k < 5; ++k) {
        const Matrix rho = oracle::random_density(4, rng);
        const Matrix th = apply_thermal_dissipator(rho, p, ladder);
        const Matrix lc = apply_localization_dissipator(rho, p, s.Jx.entries);
        EXPECT_LT(std::abs(th.trace()), 1e-12);
        EXPECT_LT(std::abs(lc.trace()), 1e-12);
        EXPECT_LT(hermiticity_error(th), 1e-12);
        EXPECT_LT(hermiticity_error(lc), 1e-12);
    }
}

TEST_F(DissipatorTest, LocalizationCommutingStatesAreFixed) {
    DissipatorParams p;
    p.Lambda = 0.5;
    const auto eig = hermitian_eigen(s.Jx.entries);
    const Matrix proj = eig.vectors.col(1) * eig.vectors.col(1).adjoint();
    EXPECT_LT(max_abs(apply_localization_dissipator(proj, p, s.Jx.entries)), 1e-12);
    EXPECT_LT(max_abs(apply_localization_dissipator(Matrix::Identity(4, 4) / 4.0, p, s.Jx.entries)), 1e-14);
}

TEST_F(DissipatorTest, LocalizationOnTopStateAgainstSuperoperator) {
    DissipatorParams p;
    p.Lambda = 0.5;
    Matrix top = Matrix::Zero(4, 4);
    top(0, 0) = 1.0;
    // -L[A,[A,rho]] equals 2L D[A] rho for Hermitian A
    const Matrix sup = oracle::lindblad_superoperator(Matrix::Zero(4, 4), {{s.Jx.entries, 2 * p.Lambda}});
    const Matrix expect = oracle::unvec(sup * oracle::vec(top), 4);
    const Matrix got = apply_localization_dissipator(top, p, s.Jx.entries);
    EXPECT_GT(got.norm(), 0.1);
    EXPECT_LT(max_abs(got - expect), 1e-13);
    EXPECT_LT(std::abs(got.trace()), 1e-14);
}

TEST_F(DissipatorTest, ShapeMismatchRejected) {
    DissipatorParams p;
    p.gamma = 1.0;
    EXPECT_THROW(apply_thermal_dissipator(Matrix::Identity(3, 3), p, ladder), Error);
}

TEST(DissipatorParams, Validation) {
    DissipatorParams p;
    p.gamma = -1.0;
    try {
        p.validate();
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ValidationError);
        EXPECT_NE(std::string(e.what()).find("gamma"), std::string::npos);
    }
}
