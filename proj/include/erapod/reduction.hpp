#pragma once

#include <limits>
#include <optional>
#include <string>

#include "erapod/hankel.hpp"
#include "erapod/lti.hpp"
#include "erapod/sampling.hpp"

namespace erapod {

enum class Method { era, bpod, pseudo, pod, bt_oracle };

constexpr const char* to_string(Method m) {
    switch (m) {
        case Method::era: return "era";
        case Method::bpod: return "bpod";
        case Method::pseudo: return "pseudo";
        case Method::pod: return "pod";
        case Method::bt_oracle: return "bt-oracle";
    }
    return "unknown";
}

inline std::optional<Method> parse_method(std::string_view s) {
    for (Method m : {Method::era, Method::bpod, Method::pseudo, Method::pod, Method::bt_oracle})
        if (s == to_string(m)) return m;
    return std::nullopt;
}

/// Retained SVD triples of a Hankel matrix. U's columns are sign-fixed
/// (largest-magnitude entry positive) and V is flipped to match.
struct HankelSVD {
    Matrix U;
    Vector sigma;
    Matrix V;
    double rank_tol = 1e-10;
    Index numerical_rank = 0;  ///< n_1: count of sigma_i > rank_tol * sigma_1

    Index retained() const { return sigma.size(); }
};

enum class ModeFlavor { true_adjoint, pseudo_adjoint, pod };

/// Primal modes Phi and the (pseudo-)adjoint modes Psi with Psi* Phi = I.
struct ModeSet {
    Matrix primal;
    Matrix adjoint;
    Vector hsv;
    ModeFlavor flavor = ModeFlavor::true_adjoint;

    Index r() const { return primal.cols(); }
};

struct ReducedModel {
    Matrix A;
    Matrix B;
    Matrix C;
    Vector hsv;
    Method method = Method::era;
    std::string projector_id;  ///< empty when outputs are not projected

    const Matrix& a() const { return A; }
    const Matrix& b() const { return B; }
    const Matrix& c() const { return C; }
    Index r() const { return A.rows(); }
};

inline HankelSVD svd_truncate(const Matrix& H, std::optional<Index> r = std::nullopt, double rank_tol = 1e-10) {
    HankelSVD out;
    out.rank_tol = rank_tol;
    if (r && *r == 0) {
        out.U.resize(H.rows(), 0);
        out.V.resize(H.cols(), 0);
        return out;
    }
    if (H.size() == 0 || max_abs(H) == 0.0) detail::fail(ErrorKind::ZeroMatrix, "Hankel matrix is identically zero");
    detail::require(!r || *r > 0, ErrorKind::InvalidArgument, "order must be nonnegative");

    Eigen::BDCSVD<Matrix> svd(H, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    Index n1 = 0;
    while (n1 < s.size() && s(n1) > rank_tol * s(0)) ++n1;
    out.numerical_rank = n1;

    const Index keep = r.value_or(n1);
    if (keep > n1)
        detail::fail(ErrorKind::RankExceeded,
                     "requested order " + std::to_string(keep) + " exceeds numerical rank " + std::to_string(n1));
    out.U = svd.matrixU().leftCols(keep);
    out.V = svd.matrixV().leftCols(keep);
    out.sigma = s.head(keep);
    const Vector signs = fix_column_signs(out.U);
    out.V = out.V * signs.asDiagonal();
    return out;
}

/// Smallest r whose discarded singular-value tail is below `tail_tol` of the
/// total, widened so a group of equal singular values is never split.
inline Index select_order(const Vector& sigma, double tail_tol = 1e-3) {
    const double total = sigma.sum();
    if (sigma.size() == 0 || total <= 0.0) return 0;
    Index r = 1;
    double kept = sigma(0);
    while (r < sigma.size() && (total - kept) / total >= tail_tol) kept += sigma(r++);
    while (r < sigma.size() && sigma(r - 1) - sigma(r) <= 1e-10 * sigma(r - 1)) ++r;
    return r;
}

namespace detail {

inline void require_order(const HankelSVD& svd, Index r) {
    require(r >= 1, ErrorKind::InvalidArgument, "order must be >= 1");
    if (r > svd.retained())
        fail(ErrorKind::RankExceeded, "order " + std::to_string(r) + " exceeds the " +
                                          std::to_string(svd.retained()) + " retained singular values");
}

inline ReducedModel petrov_galerkin(const StateSpaceModel& model, const Matrix& Phi, const Matrix& Psi,
                                    const OutputProjector* projector, Method method) {
    require(Phi.rows() == model.n() && Psi.rows() == model.n() && Phi.cols() == Psi.cols(),
            ErrorKind::DimensionMismatch, "mode matrices do not match the model state dimension");
    ReducedModel red;
    red.A = Psi.transpose() * (model.a() * Phi);
    red.B = Psi.transpose() * model.b();
    red.C = model.c() * Phi;
    if (projector != nullptr) {
        require(projector->output_dim() == model.q(), ErrorKind::ProjectorDimensionMismatch,
                "projector rows do not match model outputs");
        red.C = projector->basis.transpose() * red.C;
        red.projector_id = "pod" + std::to_string(projector->modes());
    }
    red.method = method;
    return red;
}

}  // namespace detail

/// Phi = X V_r Sigma_r^{-1/2}.
inline Matrix primal_modes(const SnapshotMatrix& X, const HankelSVD& svd, Index r) {
    detail::require_order(svd, r);
    detail::require(X.data.cols() == svd.V.rows(), ErrorKind::DimensionMismatch,
                    "snapshot count does not match Hankel column count");
    const Vector inv_sqrt = svd.sigma.head(r).cwiseSqrt().cwiseInverse();
    return X.data * svd.V.leftCols(r) * inv_sqrt.asDiagonal();
}

/// Balanced POD modes: Phi = X V_r Sigma_r^{-1/2}, Psi = Y U_r Sigma_r^{-1/2}.
inline ModeSet bpod_modes(const SnapshotMatrix& X, const SnapshotMatrix& Y, const HankelSVD& svd, Index r,
                          double biorth_tol = 1e-8) {
    detail::require_order(svd, r);
    detail::require(Y.data.cols() == svd.U.rows(), ErrorKind::DimensionMismatch,
                    "adjoint snapshot count does not match Hankel row count");
    const Vector inv_sqrt = svd.sigma.head(r).cwiseSqrt().cwiseInverse();
    ModeSet modes;
    modes.primal = primal_modes(X, svd, r);
    modes.adjoint = Y.data * svd.U.leftCols(r) * inv_sqrt.asDiagonal();
    modes.hsv = svd.sigma.head(r);
    modes.flavor = ModeFlavor::true_adjoint;
    const double err = max_abs(modes.adjoint.transpose() * modes.primal - Matrix::Identity(r, r));
    if (!(err <= biorth_tol))
        detail::fail(ErrorKind::BiorthogonalityFailure,
                     "max |Psi*Phi - I| = " + std::to_string(err) + "; X, Y and the SVD are inconsistent");
    return modes;
}

/// A_r = Psi* A Phi, B_r = Psi* B, C_r = C Phi (or Theta* C Phi with a projector).
inline ReducedModel bpod_reduce(const StateSpaceModel& model, const ModeSet& modes,
                                const OutputProjector* projector = nullptr) {
    Method method = Method::bpod;
    if (modes.flavor == ModeFlavor::pseudo_adjoint) method = Method::pseudo;
    if (modes.flavor == ModeFlavor::pod) method = Method::pod;
    ReducedModel red = detail::petrov_galerkin(model, modes.primal, modes.adjoint, projector, method);
    red.hsv = modes.hsv;
    return red;
}

/// ERA realization from H, H' and the SVD of H.
inline ReducedModel era_reduce(const HankelPair& pair, const HankelSVD& svd, Index r) {
    detail::require_order(svd, r);
    detail::require(svd.U.rows() == pair.H.rows() && svd.V.rows() == pair.H.cols(), ErrorKind::DimensionMismatch,
                    "SVD does not belong to this Hankel pair");
    const Vector sq = svd.sigma.head(r).cwiseSqrt();
    const Vector isq = sq.cwiseInverse();
    const auto Ur = svd.U.leftCols(r);
    const auto Vr = svd.V.leftCols(r);
    ReducedModel red;
    red.A = isq.asDiagonal() * (Ur.transpose() * pair.Hprime * Vr) * isq.asDiagonal();
    red.B = (sq.asDiagonal() * Vr.transpose()).leftCols(pair.in_dim);
    red.C = (Ur * sq.asDiagonal()).topRows(pair.out_dim);
    red.hsv = svd.sigma.head(r);
    red.method = Method::era;
    return red;
}

/// Pseudo-adjoint modes Phi (Phi* Phi)^{-1}, formed as Q R^{-T} from a thin QR.
inline ModeSet pseudo_adjoint_modes(const Matrix& Phi, double cond_limit = 1e12) {
    detail::require(Phi.cols() >= 1 && Phi.rows() >= Phi.cols(), ErrorKind::DimensionMismatch,
                    "primal modes must be a tall matrix with at least one column");
    const Index r = Phi.cols();
    Eigen::HouseholderQR<Matrix> qr(Phi);
    const Matrix Q = qr.householderQ() * Matrix::Identity(Phi.rows(), r);
    const Matrix R = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
    const Vector sv = Eigen::JacobiSVD<Matrix>(R).singularValues();
    const double cond = sv(r - 1) > 0.0 ? (sv(0) / sv(r - 1)) * (sv(0) / sv(r - 1))
                                        : std::numeric_limits<double>::infinity();
    if (!(cond < cond_limit))
        detail::fail(ErrorKind::IllConditioned, "cond(Phi* Phi) = " + std::to_string(cond));
    ModeSet modes;
    modes.primal = Phi;
    modes.adjoint = R.triangularView<Eigen::Upper>().solve(Q.transpose()).transpose();
    modes.flavor = ModeFlavor::pseudo_adjoint;
    return modes;
}

/// First r columns of both mode matrices.
inline ModeSet leading_modes(const ModeSet& modes, Index r) {
    detail::require(r >= 1 && r <= modes.r(), ErrorKind::RankExceeded,
                    "order " + std::to_string(r) + " exceeds available modes " + std::to_string(modes.r()));
    ModeSet out{modes.primal.leftCols(r), modes.adjoint.leftCols(r), Vector(), modes.flavor};
    if (modes.hsv.size() >= r) out.hsv = modes.hsv.head(r);
    return out;
}

inline ReducedModel pseudo_reduce(const StateSpaceModel& model, const Matrix& Phi_r, const Matrix& PsiTilde_r,
                                  const OutputProjector* projector = nullptr) {
    return detail::petrov_galerkin(model, Phi_r, PsiTilde_r, projector, Method::pseudo);
}

/// Galerkin projection onto the leading r left singular vectors of X.
inline ReducedModel pod_reduce(const SnapshotMatrix& X, const StateSpaceModel& model, Index r,
                               const OutputProjector* projector = nullptr, double rank_tol = 1e-10) {
    detail::require(r >= 1, ErrorKind::InvalidArgument, "order must be >= 1");
    detail::require(X.state_dim() == model.n(), ErrorKind::DimensionMismatch, "snapshots do not match model");
    Eigen::BDCSVD<Matrix> svd(X.data, Eigen::ComputeThinU);
    const Vector& s = svd.singularValues();
    Index rank = 0;
    while (rank < s.size() && s(rank) > rank_tol * s(0)) ++rank;
    if (r > rank)
        detail::fail(ErrorKind::RankExceeded,
                     "POD order " + std::to_string(r) + " exceeds snapshot rank " + std::to_string(rank));
    Matrix Phi = svd.matrixU().leftCols(r);
    fix_column_signs(Phi);
    ReducedModel red = detail::petrov_galerkin(model, Phi, Phi, projector, Method::pod);
    red.hsv = s.head(r);
    return red;
}

}  // namespace erapod
