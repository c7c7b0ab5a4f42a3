#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "erapod/lti.hpp"
#include "erapod/reduction.hpp"
#include "erapod/sampling.hpp"

namespace erapod {

enum class GramianKind { exact, empirical };

struct GramianPair {
    Matrix Wc;
    Matrix Wo;
    GramianKind kind = GramianKind::empirical;
};

/// T = [Phi_1 Phi_2] with Psi_1* Phi_2 = 0; `split` = columns of Phi_1.
struct FullTransformation {
    Matrix T;
    Matrix Tinv;
    Index split = 0;
};

/// Transformed Gramians partitioned at `split`. Norms are Frobenius.
struct BlockDiagnostics {
    Index split = 0;
    Matrix wc;    ///< Tinv Wc Tinv*
    Matrix wo;    ///< T* Wo T
    Matrix prod;  ///< Tinv Wc Wo T

    Matrix wc11, wo11, prod11;
    Matrix m1;  ///< lower-right block of the transformed Wc
    Matrix m2;  ///< lower-right block of the transformed Wo
    Matrix m3;  ///< upper-right block of the transformed Wo, as observed

    double wc_offdiag = 0.0;
    double wo_offdiag = 0.0;
    double prod12 = 0.0;
    double prod21 = 0.0;
    double prod22 = 0.0;
    double wc11_dev = 0.0;    ///< max |wc11 - Sigma_1|
    double wo11_dev = 0.0;    ///< max |wo11 - Sigma_1|
    double prod11_dev = 0.0;  ///< max |prod11 - Sigma_1^2|

    std::optional<Matrix> m3_independent;  ///< Sigma_1 Psi_1* Phi~_2
};

struct GramianDiagonalRow {
    Index i = 0;
    double sigma = 0.0;
    double wc = 0.0;
    double wo = 0.0;
};

inline GramianPair empirical_gramians(const SnapshotMatrix& X, const SnapshotMatrix& Y) {
    detail::require(X.state_dim() == Y.state_dim(), ErrorKind::DimensionMismatch, "X and Y state dimensions differ");
    return {X.data * X.data.transpose(), Y.data * Y.data.transpose(), GramianKind::empirical};
}

namespace detail {

/// Solves A W A* - W + Q = 0 by doubling: W <- W + A_k W A_k*, A_{k+1} = A_k^2.
inline Matrix stein_doubling(const Matrix& A, const Matrix& Q, double tol = 1e-14, int max_iter = 100) {
    Matrix W = Q;
    Matrix Ak = A;
    for (int it = 0; it < max_iter; ++it) {
        const Matrix update = Ak * W * Ak.transpose();
        W += update;
        if (update.norm() <= tol * W.norm()) break;
        Ak = Ak * Ak;
    }
    return 0.5 * (W + W.transpose());
}

inline Matrix stein_finite(const Matrix& A, const Matrix& Q, long horizon) {
    Matrix W = Matrix::Zero(Q.rows(), Q.cols());
    Matrix term = Q;
    for (long k = 0; k < horizon; ++k) {
        W += term;
        term = A * term * A.transpose();
    }
    return 0.5 * (W + W.transpose());
}

/// L with W = L L*, from the eigendecomposition (tiny negative eigenvalues clipped).
inline Matrix psd_factor(const Matrix& W) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(W);
    const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.asDiagonal();
}

template <LinearSystem S>
void require_dense_stable(const S& sys, const char* what) {
    require(sys.a().rows() <= kDenseSpectralLimit, ErrorKind::InvalidArgument,
            std::string(what) + ": state dimension above the dense limit");
    const double rho = spectral_radius(sys.a());
    if (!(rho < 1.0 - kStabilityMargin))
        fail(ErrorKind::UnstableSystem, std::string(what) + ": spectral radius " + std::to_string(rho));
}

}  // namespace detail

/// Infinite-horizon Gramians from the discrete Lyapunov (Stein) equations.
template <LinearSystem S>
GramianPair exact_gramians(const S& sys) {
    detail::require_dense_stable(sys, "exact_gramians");
    const Matrix& A = sys.a();
    return {detail::stein_doubling(A, sys.b() * sys.b().transpose()),
            detail::stein_doubling(A.transpose(), sys.c().transpose() * sys.c()), GramianKind::exact};
}

/// sqrt(lambda(Wc Wo)), as the singular values of Lo* Lc.
template <LinearSystem S>
Vector exact_hankel_singular_values(const S& sys) {
    const GramianPair g = exact_gramians(sys);
    const Matrix M = detail::psd_factor(g.Wo).transpose() * detail::psd_factor(g.Wc);
    return Eigen::JacobiSVD<Matrix>(M).singularValues();
}

/// Square-root balanced truncation from the exact Gramians (reference oracle).
inline ReducedModel exact_balanced_truncation(const StateSpaceModel& model, Index r) {
    detail::require(r >= 1, ErrorKind::InvalidArgument, "order must be >= 1");
    const GramianPair g = exact_gramians(model);
    const Matrix Lc = detail::psd_factor(g.Wc);
    const Matrix Lo = detail::psd_factor(g.Wo);
    Eigen::JacobiSVD<Matrix> svd(Lo.transpose() * Lc, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    Index n1 = 0;
    while (n1 < s.size() && s(n1) > 1e-10 * s(0)) ++n1;
    if (r > n1)
        detail::fail(ErrorKind::RankExceeded,
                     "order " + std::to_string(r) + " exceeds the minimal order " + std::to_string(n1));
    Matrix U = svd.matrixU().leftCols(r);
    const Vector signs = fix_column_signs(U);
    const Matrix V = svd.matrixV().leftCols(r) * signs.asDiagonal();
    const Vector isq = s.head(r).cwiseSqrt().cwiseInverse();
    const Matrix T = Lc * V * isq.asDiagonal();
    const Matrix Tinv = isq.asDiagonal() * U.transpose() * Lo.transpose();
    ReducedModel red;
    red.A = Tinv * model.a() * T;
    red.B = Tinv * model.b();
    red.C = model.c() * T;
    red.hsv = s.head(r);
    red.method = Method::bt_oracle;
    return red;
}

/// Completes Phi_1 with an orthonormal basis Phi_2 of null(Psi_1*) and inverts.
inline FullTransformation build_full_transformation(const Matrix& Phi1, const Matrix& Psi1,
                                                    double biorth_tol = 1e-8) {
    using detail::require;
    require(Phi1.rows() == Psi1.rows() && Phi1.cols() == Psi1.cols() && Phi1.cols() >= 1 &&
                Phi1.cols() <= Phi1.rows(),
            ErrorKind::DimensionMismatch, "mode matrices must both be n x r with r <= n");
    const Index n = Phi1.rows();
    const Index r1 = Phi1.cols();
    const double err = max_abs(Psi1.transpose() * Phi1 - Matrix::Identity(r1, r1));
    require(err <= biorth_tol, ErrorKind::BiorthogonalityFailure,
            "max |Psi*Phi - I| = " + std::to_string(err));

    FullTransformation out;
    out.split = r1;
    out.T.resize(n, n);
    out.T.leftCols(r1) = Phi1;
    if (r1 < n) {
        Eigen::JacobiSVD<Matrix> svd(Psi1, Eigen::ComputeFullU);
        Matrix Phi2 = svd.matrixU().rightCols(n - r1);
        fix_column_signs(Phi2);
        out.T.rightCols(n - r1) = Phi2;
    }
    Eigen::PartialPivLU<Matrix> lu(out.T);
    if (!(lu.rcond() > 1e-14))
        detail::fail(ErrorKind::SingularTransformation, "rcond(T) = " + std::to_string(lu.rcond()));
    out.Tinv = lu.solve(Matrix::Identity(n, n));
    return out;
}

/// Gramians in the coordinates of `trans`, partitioned at its split.
inline BlockDiagnostics transformed_gramians(const FullTransformation& trans, const GramianPair& grams,
                                             const Vector& sigma1, const Matrix* psi1_true = nullptr) {
    using detail::require;
    const Index n = trans.T.rows();
    const Index r1 = trans.split;
    require(grams.Wc.rows() == n && grams.Wo.rows() == n, ErrorKind::DimensionMismatch,
            "Gramians do not match the transformation size");
    require(sigma1.size() == r1, ErrorKind::DimensionMismatch, "Sigma_1 must have one entry per leading mode");
    const Index r2 = n - r1;

    BlockDiagnostics d;
    d.split = r1;
    d.wc = trans.Tinv * grams.Wc * trans.Tinv.transpose();
    d.wo = trans.T.transpose() * grams.Wo * trans.T;
    d.prod = trans.Tinv * grams.Wc * grams.Wo * trans.T;

    d.wc11 = d.wc.topLeftCorner(r1, r1);
    d.wo11 = d.wo.topLeftCorner(r1, r1);
    d.prod11 = d.prod.topLeftCorner(r1, r1);
    d.m1 = d.wc.bottomRightCorner(r2, r2);
    d.m2 = d.wo.bottomRightCorner(r2, r2);
    d.m3 = d.wo.topRightCorner(r1, r2);

    d.wc_offdiag = d.wc.topRightCorner(r1, r2).norm();
    d.wo_offdiag = d.m3.norm();
    d.prod12 = d.prod.topRightCorner(r1, r2).norm();
    d.prod21 = d.prod.bottomLeftCorner(r2, r1).norm();
    d.prod22 = d.prod.bottomRightCorner(r2, r2).norm();

    const Matrix S = sigma1.asDiagonal();
    d.wc11_dev = max_abs(d.wc11 - S);
    d.wo11_dev = max_abs(d.wo11 - S);
    d.prod11_dev = max_abs(d.prod11 - S * S);

    if (psi1_true != nullptr) {
        require(psi1_true->rows() == n && psi1_true->cols() == r1, ErrorKind::DimensionMismatch,
                "true adjoint modes must be n x split");
        d.m3_independent = S * psi1_true->transpose() * trans.T.rightCols(r2);
    }
    return d;
}

/// (i, sigma_i, Wc_ii, Wo_ii) for a reduced model; infinite horizon unless
/// `horizon` is given.
inline std::vector<GramianDiagonalRow> gramian_diagonals_report(const ReducedModel& reduced,
                                                                std::optional<long> horizon = std::nullopt) {
    detail::require_dense_stable(reduced, "gramian_diagonals_report");
    Matrix Wc, Wo;
    if (horizon) {
        Wc = detail::stein_finite(reduced.A, reduced.B * reduced.B.transpose(), *horizon);
        Wo = detail::stein_finite(reduced.A.transpose(), reduced.C.transpose() * reduced.C, *horizon);
    } else {
        const GramianPair g = exact_gramians(reduced);
        Wc = g.Wc;
        Wo = g.Wo;
    }
    std::vector<GramianDiagonalRow> rows;
    for (Index i = 0; i < reduced.r(); ++i) {
        const double s = i < reduced.hsv.size() ? reduced.hsv(i) : std::numeric_limits<double>::quiet_NaN();
        rows.push_back({i + 1, s, Wc(i, i), Wo(i, i)});
    }
    return rows;
}

inline constexpr std::uint64_t kAdjointPerturbationSeed = 0x5eed'ad10;

/// Adjoint system with A* replaced by A* + eps E, E a fixed seeded Gaussian
/// matrix of unit Frobenius norm. Stability is not enforced here; snapshot
/// collection rejects a destabilized adjoint.
inline StateSpaceModel perturb_adjoint(const StateSpaceModel& model, double eps,
                                       std::uint64_t seed = kAdjointPerturbationSeed) {
    detail::require(eps >= 0.0, ErrorKind::InvalidArgument, "perturbation size must be >= 0");
    if (eps == 0.0) return adjoint_system(model);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Matrix E(model.n(), model.n());
    for (Index j = 0; j < E.cols(); ++j)
        for (Index i = 0; i < E.rows(); ++i) E(i, j) = normal(rng);
    E /= E.norm();
    return make_system(Matrix(model.a().transpose() + eps * E), model.c().transpose(), model.b().transpose(), false);
}

}  // namespace erapod
