#include "oracles.hpp"

#include <wehrlsim/dynamics.hpp>
#include <wehrlsim/observables.hpp>

#include <gtest/gtest.h>

using namespace wehrlsim;

TEST(Energy, Expectations) {
    std::mt19937 rng(21);
    const Matrix h = oracle::random_hermitian(5, rng);
    const auto eig = hermitian_eigen(h);
    const Matrix ground = eig.vectors.col(0) * eig.vectors.col(0).adjoint();
    EXPECT_NEAR(mean_energy(ground, h), eig.values(0), 1e-12);
    EXPECT_NEAR(mean_energy(Matrix::Identity(5, 5) / 5.0, h), h.trace().real() / 5, 1e-13);
}

TEST(Energy, ThermalOscillatorAboveGround) {
    const auto q = quadrature_operators(SpinBasis(25), 15);
    const Matrix h = 0.5 * (q.Jxprime.entries * q.Jxprime.entries + q.Jyprime.entries * q.Jyprime.entries);
    const auto eig = hermitian_eigen(h);
    std::vector<double> e(eig.values.data(), eig.values.data() + eig.values.size());
    const auto w = oracle::boltzmann(e, 2.0);
    double ref = 0;
    for (std::size_t k = 0; k < e.size(); ++k) ref += w[k] * e[k];
    const double got = mean_energy(thermal_state(h, 2.0).entries(), h);
    EXPECT_NEAR(got, ref, 1e-10);
    EXPECT_GT(got, e[0]);
}

TEST(Coherence, DiagonalAndPlusState) {
    const auto s = build_spin_operators(SpinBasis(2));
    EXPECT_NEAR(l1_coherence(thermal_state(s.Jz.entries, 1.0).entries(), s.Jz.entries), 0.0, 1e-15);
    Matrix plus = Matrix::Constant(2, 2, 0.5);
    EXPECT_NEAR(l1_coherence(plus, s.Jz.entries), 1.0, 1e-14);
    EXPECT_NEAR(l1_coherence(plus, s.Jx.entries), 0.0, 1e-14);
}

TEST(Fidelity, ClosedForms) {
    std::mt19937 rng(22);
    const Matrix rho = oracle::random_density(4, rng);
    EXPECT_NEAR(fidelity(rho, rho), 1.0, 1e-9);
    Matrix a = Matrix::Zero(2, 2), b = Matrix::Zero(2, 2);
    a(0, 0) = 1.0;
    b(1, 1) = 1.0;
    EXPECT_NEAR(fidelity(a, b), 0.0, 1e-12);
    EXPECT_NEAR(fidelity(Matrix::Identity(2, 2) / 2.0, a), 0.5, 1e-12);
}

TEST(Fidelity, Symmetric) {
    std::mt19937 rng(23);
    for (int k = 0; k < 20; ++k) {
        const Matrix r = oracle::random_density(5, rng), s = oracle::random_density(5, rng);
        EXPECT_NEAR(fidelity(r, s), fidelity(s, r), 1e-9);
    }
}

TEST(Fidelity, RejectsNonPositive) {
    Matrix bad = Matrix::Zero(2, 2);
    bad(0, 0) = 1.5;
    bad(1, 1) = -0.5;
    try {
        fidelity(bad, Matrix::Identity(2, 2) / 2.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NonPositiveInput);
    }
}

TEST(VonNeumann, Values) {
    Matrix pure = Matrix::Zero(3, 3);
    pure(1, 1) = 1.0;
    EXPECT_NEAR(von_neumann_entropy(pure), 0.0, 1e-14);
    EXPECT_NEAR(von_neumann_entropy(Matrix::Identity(4, 4) / 4.0), std::log(4.0), 1e-13);
    const auto w = oracle::boltzmann({1.5, 0.5, -0.5, -1.5}, 2.0);
    double ref = 0;
    for (double p : w) ref -= p * std::log(p);
    const auto s = build_spin_operators(SpinBasis(4));
    EXPECT_NEAR(von_neumann_entropy(thermal_state(s.Jz.entries, 2.0).entries()), ref, 1e-13);
}

TEST(Populations, ProjectorsAndMixed) {
    std::mt19937 rng(24);
    const Matrix op = oracle::random_hermitian(5, rng);
    const auto eig = hermitian_eigen(op);
    const Matrix proj = eig.vectors.col(3) * eig.vectors.col(3).adjoint();
    const auto p = populations(proj, op);
    for (int k = 0; k < 5; ++k) EXPECT_NEAR(p[static_cast<std::size_t>(k)], k == 3 ? 1.0 : 0.0, 1e-12);
    for (double v : populations(Matrix::Identity(5, 5) / 5.0, op)) EXPECT_NEAR(v, 0.2, 1e-14);
    const Matrix rho = oracle::random_density(5, rng);
    const auto a = populations(rho, op), b = populations(rho, op);
    double sum = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a[k], b[k]);
        EXPECT_GE(a[k], -1e-8);
        sum += a[k];
    }
    EXPECT_NEAR(sum, 1.0, 1e-8);
}

TEST(Profile, Peaks) {
    EXPECT_TRUE(is_bimodal({0.0, 0.1, 0.3, 0.1, 0.05, 0.1, 0.3, 0.05}));
    EXPECT_FALSE(is_unimodal({0.0, 0.1, 0.3, 0.1, 0.05, 0.1, 0.3, 0.05}));
    EXPECT_TRUE(is_unimodal({0.0, 0.1, 0.5, 0.2, 0.1, 0.05}));
    // a ripple below 5% of the maximum is not a peak
    EXPECT_TRUE(is_unimodal({0.0, 0.01, 0.005, 0.2, 0.5, 0.2, 0.0}));
}

TEST(Continuum, HarmonicLimit) {
    PotentialParams p;
    p.calE = 0.0;
    const auto spec = continuous_eigs(p, 0.0, ContinuousGrid{}, 8);
    for (int n = 0; n < 8; ++n) EXPECT_NEAR(spec.values[static_cast<std::size_t>(n)], n + 0.5, 1e-4);
}

TEST(Continuum, DeepWellAndDoublet) {
    const PotentialParams p;
    const auto start = continuous_eigs(p, 0.0, ContinuousGrid{}, 4);
    EXPECT_LT(start.values[0], 0.5);
    const auto end = continuous_eigs(p, p.tau, ContinuousGrid{}, 4);
    const double split = end.values[1] - end.values[0];
    const double gap = end.values[2] - end.values[1];
    EXPECT_LT(split, 0.1 * gap);
}

TEST(Continuum, AgainstDenseDiagonalization) {
    const PotentialParams p;
    const ContinuousGrid g{8.0, 301};
    const double h = g.spacing();
    const int n = g.n_points - 2;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        m(i, i) = 1 / (h * h) + continuous_potential(p, -g.half_width + (i + 1) * h, 3.0);
        if (i + 1 < n) m(i, i + 1) = m(i + 1, i) = -0.5 / (h * h);
    }
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues();
    const auto got = detail::continuous_eigs_at(p, 3.0, g, 8);
    for (int k = 0; k < 8; ++k) EXPECT_NEAR(got[static_cast<std::size_t>(k)], ev(k), 1e-10);
}

TEST(Continuum, Validation) {
    const PotentialParams p;
    EXPECT_THROW(continuous_eigs(p, 0.0, ContinuousGrid{}, 13), Error);
    EXPECT_THROW(continuous_eigs(p, 0.0, ContinuousGrid{8.0, 16}, 4), Error);
    try {
        continuous_eigs(p, 0.0, ContinuousGrid{}, 8, 1e-12, 2048);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotConverged);
    }
}
