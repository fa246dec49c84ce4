#pragma once

// Scalar diagnostics of a density matrix and the finite-difference
// eigensolver for the continuous double-well potential.

#include "operators.hpp"

namespace wehrlsim {

inline double mean_energy(const Matrix& rho, const Matrix& h) {
    require_same_shape(rho, h, "mean_energy");
    return (rho * h).trace().real();
}

/// Eigenvectors of a Hermitian operator, eigenvalues ascending.
inline Matrix sorted_eigenbasis(const Matrix& basis_op) { return hermitian_eigen(basis_op).vectors; }

/// rho expressed in the sorted eigenbasis of `basis_op`.
inline Matrix in_eigenbasis(const Matrix& rho, const Matrix& basis_op) {
    require_same_shape(rho, basis_op, "in_eigenbasis");
    const Matrix v = sorted_eigenbasis(basis_op);
    return v.adjoint() * rho * v;
}

/// Sum of |rho_jk|, j != k, in the eigenbasis of `basis_op`.
inline double l1_coherence(const Matrix& rho, const Matrix& basis_op) {
    const Matrix r = in_eigenbasis(rho, basis_op);
    double total = 0.0;
    for (Eigen::Index c = 0; c < r.cols(); ++c)
        for (Eigen::Index k = 0; k < r.rows(); ++k)
            if (k != c) total += std::abs(r(k, c));
    return total;
}

inline std::vector<double> populations(const Matrix& rho, const Matrix& basis_op) {
    const Matrix r = in_eigenbasis(rho, basis_op);
    std::vector<double> p(static_cast<std::size_t>(r.rows()));
    for (Eigen::Index k = 0; k < r.rows(); ++k) p[static_cast<std::size_t>(k)] = r(k, k).real();
    return p;
}

/// (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, clamped to [0, 1].
inline double fidelity(const Matrix& rho, const Matrix& sigma) {
    require_same_shape(rho, sigma, "fidelity");
    const auto er = hermitian_eigen(rho);
    const auto es = hermitian_eigen(sigma);
    const double lo = std::min(er.values.minCoeff(), es.values.minCoeff());
    if (lo < -1e-6)
        throw Error(ErrorKind::NonPositiveInput,
                    "fidelity input has eigenvalue " + std::to_string(lo));
    const RealVector root = er.values.cwiseMax(0.0).cwiseSqrt();
    const Matrix sr = er.vectors * root.asDiagonal() * er.vectors.adjoint();
    const auto inner = hermitian_eigen(sr * sigma * sr);
    double tr = 0.0;
    for (Eigen::Index k = 0; k < inner.values.size(); ++k)
        tr += std::sqrt(std::max(inner.values(k), 0.0));
    return std::clamp(tr * tr, 0.0, 1.0);
}

inline double von_neumann_entropy(const Matrix& rho) {
    const auto eig = hermitian_eigen(rho);
    double s = 0.0;
    for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
        const double l = eig.values(k);
        if (l > 0.0) s -= l * std::log(l);
    }
    return std::max(s, 0.0);
}

inline double purity(const Matrix& rho) { return (rho * rho).trace().real(); }

/// Interior local maxima of a profile that reach at least `rel_height` of its
/// global maximum. The threshold drops numerical ripples in the tails.
inline std::vector<int> profile_peaks(const std::vector<double>& p, double rel_height = 0.05) {
    std::vector<int> peaks;
    if (p.size() < 3) return peaks;
    const double top = *std::max_element(p.begin(), p.end());
    for (std::size_t i = 1; i + 1 < p.size(); ++i)
        if (p[i] > p[i - 1] && p[i] >= p[i + 1] && p[i] >= rel_height * top)
            peaks.push_back(static_cast<int>(i));
    return peaks;
}

/// Two significant peaks with a dip between them.
inline bool is_bimodal(const std::vector<double>& p, double rel_height = 0.05) {
    const auto peaks = profile_peaks(p, rel_height);
    if (peaks.size() != 2) return false;
    const auto lo = std::min_element(p.begin() + peaks[0], p.begin() + peaks[1] + 1);
    return *lo < std::min(p[static_cast<std::size_t>(peaks[0])], p[static_cast<std::size_t>(peaks[1])]);
}

inline bool is_unimodal(const std::vector<double>& p, double rel_height = 0.05) {
    return profile_peaks(p, rel_height).size() == 1;
}

// ---------------------------------------------------------------------------
// Continuous reference

struct ContinuousGrid {
    double half_width = 8.0;
    int n_points = 1024;

    double spacing() const { return 2.0 * half_width / (n_points - 1); }

    void validate() const {
        if (n_points < 128 || !(half_width > 0.0))
            throw Error(ErrorKind::ValidationError, "continuous grid needs n_points >= 128, L > 0");
    }
};

namespace detail {

/// Number of eigenvalues below x of the symmetric tridiagonal (d, off e).
inline int sturm_count(const std::vector<double>& d, double e, double x) {
    int count = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        q = d[i] - x - (i == 0 ? 0.0 : e * e / q);
        if (q == 0.0) q = -1e-300;
        if (q < 0.0) ++count;
    }
    return count;
}

inline std::vector<double> tridiagonal_lowest(const std::vector<double>& d, double e, int k) {
    double lo = d[0], hi = d[0];
    for (double v : d) {
        lo = std::min(lo, v - 2.0 * std::abs(e));
        hi = std::max(hi, v + 2.0 * std::abs(e));
    }
    std::vector<double> out;
    for (int idx = 0; idx < k; ++idx) {
        double a = lo, b = hi;
        // smallest x with more than idx eigenvalues below it
        for (int it = 0; it < 200 && b - a > 1e-13 * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
            const double mid = 0.5 * (a + b);
            if (sturm_count(d, e, mid) > idx) b = mid;
            else a = mid;
        }
        out.push_back(0.5 * (a + b));
    }
    return out;
}

inline std::vector<double> continuous_eigs_at(const PotentialParams& params, double t,
                                              const ContinuousGrid& grid, int k) {
    const double h = grid.spacing();
    const int interior = grid.n_points - 2;
    std::vector<double> d(static_cast<std::size_t>(interior));
    for (int i = 0; i < interior; ++i) {
        const double x = -grid.half_width + (i + 1) * h;
        d[static_cast<std::size_t>(i)] = 1.0 / (h * h) + continuous_potential(params, x, t);
    }
    return tridiagonal_lowest(d, -0.5 / (h * h), k);
}

} // namespace detail

struct ContinuousSpectrum {
    std::vector<double> values;
    int n_points = 0; ///< finest grid used
};

/// Lowest k eigenvalues of -(1/2) d^2/dx^2 + V(x, t) with Dirichlet walls at
/// +-L by second-order differences. The grid is refined (spacing halved)
/// until consecutive levels move by less than `tol`.
inline ContinuousSpectrum continuous_eigs(const PotentialParams& params, double t,
                                          ContinuousGrid grid, int k, double tol = 1e-4,
                                          int max_points = 1 << 17) {
    grid.validate();
    if (k < 1 || k > 12) throw Error(ErrorKind::ValidationError, "k must be in 1..12");
    auto prev = detail::continuous_eigs_at(params, t, grid, k);
    while (2 * grid.n_points - 1 <= max_points) {
        grid.n_points = 2 * grid.n_points - 1;
        auto next = detail::continuous_eigs_at(params, t, grid, k);
        double diff = 0.0;
        for (int i = 0; i < k; ++i)
            diff = std::max(diff, std::abs(next[static_cast<std::size_t>(i)] - prev[static_cast<std::size_t>(i)]));
        prev = std::move(next);
        if (diff < tol) return {prev, grid.n_points};
    }
    throw Error(ErrorKind::NotConverged,
                "continuous eigenvalues not converged to " + std::to_string(tol) + " by n=" +
                    std::to_string(grid.n_points));
}

/// Lowest k eigenvalues of a Hermitian matrix.
inline std::vector<double> lowest_eigenvalues(const Matrix& h, int k) {
    const auto eig = hermitian_eigen(h);
    std::vector<double> out;
    for (int i = 0; i < k && i < eig.values.size(); ++i) out.push_back(eig.values(i));
    return out;
}

} // namespace wehrlsim
