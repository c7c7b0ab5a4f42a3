#pragma once

#include <gtest/gtest.h>

#include "erapod/erapod.hpp"

namespace fixtures {

using erapod::Index;
using erapod::Matrix;
using erapod::StateSpaceModel;

inline StateSpaceModel scalar(double a = 0.5) {
    return erapod::make_system(Matrix::Constant(1, 1, a), Matrix::Ones(1, 1), Matrix::Ones(1, 1));
}

/// Upper-triangular 2-state system, eigenvalues 0.5 and 0.6.
inline StateSpaceModel s2() {
    Matrix A(2, 2), B(2, 1), C(1, 2);
    A << 0.5, 1.0, 0.0, 0.6;
    B << 0.0, 1.0;
    C << 1.0, 0.0;
    return erapod::make_system(A, B, C);
}

inline Matrix mat(Index r, Index c, std::initializer_list<double> v) {
    Matrix M(r, c);
    auto it = v.begin();
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j) M(i, j) = *it++;
    return M;
}

/// A^k by repeated squaring; the library itself never forms matrix powers.
inline Matrix power(const Matrix& A, long k) {
    Matrix result = Matrix::Identity(A.rows(), A.cols());
    Matrix base = A;
    while (k > 0) {
        if (k & 1) result = result * base;
        base = base * base;
        k >>= 1;
    }
    return result;
}

inline double rel(const Matrix& a, const Matrix& b) { return erapod::relative_max_diff(a, b); }

template <typename F>
erapod::ErrorKind kind_of(F&& f) {
    try {
        f();
    } catch (const erapod::Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected an erapod::Error";
    return erapod::ErrorKind::InvalidArgument;
}

/// Horizon m with rho^m below tol, with a margin for transient growth.
inline long tail_horizon(double rho, double tol = 1e-12) {
    return static_cast<long>(std::ceil(std::log(tol) / std::log(rho))) + 20;
}

}  // namespace fixtures
