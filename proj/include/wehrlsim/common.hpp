#pragma once

// Shared matrix aliases, error categories and small linear-algebra helpers.
// Everything runs in natural units (hbar = m = omega = k_B = 1).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wehrlsim {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

enum class ErrorKind {
    NonInvertible,
    NegativeTime,
    DimensionMismatch,
    PositivityViolation,
    StepSizeInvalid,
    AngleOutOfRange,
    NegativeQ,
    UnsupportedOperator,
    NonPositiveInput,
    NotConverged,
    WindowTooLarge,
    ParseError,
    ValidationError,
    IoError,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::NonInvertible: return "NonInvertible";
    case ErrorKind::NegativeTime: return "NegativeTime";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::PositivityViolation: return "PositivityViolation";
    case ErrorKind::StepSizeInvalid: return "StepSizeInvalid";
    case ErrorKind::AngleOutOfRange: return "AngleOutOfRange";
    case ErrorKind::NegativeQ: return "NegativeQ";
    case ErrorKind::UnsupportedOperator: return "UnsupportedOperator";
    case ErrorKind::NonPositiveInput: return "NonPositiveInput";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::WindowTooLarge: return "WindowTooLarge";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

/// Process exit code for an error category: 2 config, 3 numerical, 4 I/O.
inline int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::ParseError:
    case ErrorKind::ValidationError:
        return 2;
    case ErrorKind::IoError:
        return 4;
    default:
        return 3;
    }
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline void require_same_shape(const Matrix& a, const Matrix& b, std::string_view where) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw Error(ErrorKind::DimensionMismatch,
                    std::string(where) + ": " + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                        std::to_string(b.cols()));
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

inline double hermiticity_error(const Matrix& m) { return max_abs(m - m.adjoint()); }

inline Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

/// Eigen-decomposition of a Hermitian matrix with eigenvalues ascending and
/// ties kept in the solver's index order.
struct HermitianEigen {
    RealVector values;
    Matrix vectors;
};

inline HermitianEigen hermitian_eigen(const Matrix& m) {
    const Matrix sym = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    return {solver.eigenvalues(), solver.eigenvectors()};
}

/// f(A) for Hermitian A, applied to the spectrum and rotated back.
inline Matrix hermitian_function(const Matrix& m, const std::function<double(double)>& f) {
    const auto eig = hermitian_eigen(m);
    RealVector fv = eig.values.unaryExpr(f);
    Matrix out = eig.vectors * fv.asDiagonal() * eig.vectors.adjoint();
    return 0.5 * (out + out.adjoint());
}

/// exp(i * A) for Hermitian A.
inline Matrix unitary_exponential(const Matrix& hermitian) {
    const auto eig = hermitian_eigen(hermitian);
    Vector phases(eig.values.size());
    for (Eigen::Index k = 0; k < eig.values.size(); ++k)
        phases(k) = std::exp(kI * eig.values(k));
    return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

/// Pairwise (tree) summation; fixed reduction order for reproducible sums.
inline double pairwise_sum(const double* data, std::size_t n) {
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += data[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

} // namespace wehrlsim
