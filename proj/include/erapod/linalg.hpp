#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "erapod/error.hpp"

namespace erapod {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Dense eigen-solves are used up to this size; power iteration beyond.
inline constexpr Index kDenseSpectralLimit = 2000;

namespace detail {

inline double power_iteration_radius(const Matrix& A, double rel_tol = 1e-10, int max_iter = 100000) {
    // Two-step growth ratio tolerates a dominant real pair of opposite sign.
    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> normal;
    Vector x(A.rows());
    for (Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
    x.normalize();
    double prev = -1.0;
    for (int it = 0; it < max_iter; ++it) {
        Vector y = A * (A * x);
        const double growth = y.norm();
        if (growth == 0.0) return 0.0;
        const double estimate = std::sqrt(growth);
        x = y / growth;
        if (prev > 0.0 && std::abs(estimate - prev) <= rel_tol * estimate) return estimate;
        prev = estimate;
    }
    return prev;
}

}  // namespace detail

/// Spectral radius; dense eigenvalues for n <= `dense_limit`, power iteration above.
inline double spectral_radius(const Matrix& A, Index dense_limit = kDenseSpectralLimit) {
    if (A.size() == 0) return 0.0;
    if (A.rows() > dense_limit) return detail::power_iteration_radius(A);
    Eigen::EigenSolver<Matrix> es(A, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) detail::fail(ErrorKind::InvalidArgument, "eigenvalue solve did not converge");
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Flip column signs so each column's largest-magnitude entry is positive.
/// Returns the applied signs so paired factors can be flipped consistently.
inline Vector fix_column_signs(Matrix& M) {
    Vector signs = Vector::Ones(M.cols());
    for (Index j = 0; j < M.cols(); ++j) {
        Index imax = 0;
        M.col(j).cwiseAbs().maxCoeff(&imax);
        if (M(imax, j) < 0.0) {
            M.col(j) *= -1.0;
            signs(j) = -1.0;
        }
    }
    return signs;
}

inline double max_abs(const Matrix& M) { return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff(); }

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    detail::require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorKind::ShapeMismatch,
                    "max_abs_diff: shapes differ");
    return max_abs(a - b);
}

/// max|a-b| / max|a|, with 0/0 treated as 0.
inline double relative_max_diff(const Matrix& a, const Matrix& b) {
    const double diff = max_abs_diff(a, b);
    const double scale = max_abs(a);
    if (scale == 0.0) return diff;
    return diff / scale;
}

/// Column-major horizontal concatenation of equally tall blocks.
template <typename Range>
Matrix hstack(const Range& blocks) {
    Index rows = -1;
    Index cols = 0;
    for (const auto& b : blocks) {
        if (rows < 0) rows = b.rows();
        detail::require(b.rows() == rows, ErrorKind::DimensionMismatch, "hstack: block heights differ");
        cols += b.cols();
    }
    Matrix out(std::max<Index>(rows, 0), cols);
    Index c = 0;
    for (const auto& b : blocks) {
        out.middleCols(c, b.cols()) = b;
        c += b.cols();
    }
    return out;
}

}  // namespace erapod
