#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "erapod/lti.hpp"

namespace erapod {

/// Leading POD modes of the output snapshots. `basis` (Theta) has orthonormal
/// columns; `energies` are all singular values of the snapshot matrix.
struct OutputProjector {
    Matrix basis;
    Vector energies;

    Index output_dim() const { return basis.rows(); }
    Index modes() const { return basis.cols(); }
};

struct SamplingPlan {
    long mc = 1;
    long mo = 1;
    int period = 1;
};

namespace detail {

inline void require_sampling(long m, int P) {
    require(m >= 0, ErrorKind::InvalidArgument, "snapshot count must be >= 0");
    require(P >= 1, ErrorKind::InvalidArgument, "sampling period must be >= 1");
}

inline void require_stable(const StateSpaceModel& model, const char* what) {
    if (!model.is_stable())
        fail(ErrorKind::UnstableSystem,
             std::string(what) + ": spectral radius " + std::to_string(model.spectral_radius()) + " is not below 1");
}

}  // namespace detail

inline SnapshotMatrix collect_primal(const StateSpaceModel& model, long mc, int P) {
    detail::require_sampling(mc, P);
    detail::require_stable(model, "collect_primal");
    return impulse_response_states(model, mc, P);
}

/// Adjoint snapshots from an already-formed adjoint system (possibly perturbed).
/// With a projector, the adjoint input map becomes C* Theta: one run per POD mode.
inline SnapshotMatrix collect_adjoint_snapshots(const StateSpaceModel& adjoint, long mo, int P,
                                                const OutputProjector* projector = nullptr) {
    detail::require_sampling(mo, P);
    detail::require_stable(adjoint, "collect_adjoint");
    Matrix input = adjoint.b();
    if (projector != nullptr) {
        detail::require(projector->output_dim() == input.cols(), ErrorKind::ProjectorDimensionMismatch,
                        "projector has " + std::to_string(projector->output_dim()) + " rows but the system has q=" +
                            std::to_string(input.cols()) + " outputs");
        input = input * projector->basis;
    }
    SnapshotMatrix Y{detail::channel_snapshots(adjoint.a(), input, mo, P), input.cols(), P, SnapshotKind::adjoint};
    return Y;
}

inline SnapshotMatrix collect_adjoint(const StateSpaceModel& model, long mo, int P,
                                      const OutputProjector* projector = nullptr) {
    return collect_adjoint_snapshots(adjoint_system(model), mo, P, projector);
}

/// Markov blocks at exponents {kP, kP+1 : 0 <= k <= mc+mo} from one impulse run
/// of (mc+mo)P+2 steps. Blocks are stored once per distinct exponent.
inline MarkovSequence collect_markov_pairs(const StateSpaceModel& model, long mc, long mo, int P,
                                           const OutputProjector* projector = nullptr) {
    detail::require_sampling(mc, P);
    detail::require_sampling(mo, P);
    detail::require_stable(model, "collect_markov_pairs");
    Matrix Cout = model.c();
    if (projector != nullptr) {
        detail::require(projector->output_dim() == model.q(), ErrorKind::ProjectorDimensionMismatch,
                        "projector has " + std::to_string(projector->output_dim()) + " rows but the system has q=" +
                            std::to_string(model.q()) + " outputs");
        Cout = projector->basis.transpose() * model.c();
    }
    MarkovSequence seq;
    std::set<long> unique;
    for (long k = 0; k <= mc + mo; ++k) {
        for (long e : {k * P, k * P + 1}) {
            seq.pattern.push_back(e);
            unique.insert(e);
        }
    }
    seq.indices.assign(unique.begin(), unique.end());
    seq.blocks = detail::channel_outputs(model.a(), model.b(), Cout, seq.indices);
    return seq;
}

/// Theta = leading m_out left singular vectors of the output-snapshot matrix,
/// each column signed so its largest-magnitude entry is positive.
inline OutputProjector fit_output_projector(const Matrix& output_snapshots, Index m_out) {
    using detail::require;
    require(m_out >= 1, ErrorKind::InvalidArgument, "projection order must be >= 1");
    require(m_out <= output_snapshots.rows() && m_out <= output_snapshots.cols(), ErrorKind::DimensionMismatch,
            "projection order " + std::to_string(m_out) + " exceeds output dimension or snapshot count");
    Eigen::BDCSVD<Matrix> svd(output_snapshots, Eigen::ComputeThinU);
    const Vector& s = svd.singularValues();
    if (!(s(0) > 0.0) || !(s(m_out - 1) > 1e-12 * s(0)))
        detail::fail(ErrorKind::RankDeficient, "fewer than " + std::to_string(m_out) + " nonzero singular values");
    OutputProjector proj{svd.matrixU().leftCols(m_out), s};
    fix_column_signs(proj.basis);
    return proj;
}

inline OutputProjector fit_output_projector(const MarkovSequence& outputs, Index m_out) {
    return fit_output_projector(outputs.stacked(), m_out);
}

/// The system with outputs replaced by their projection Theta* y.
inline StateSpaceModel projected_system(const StateSpaceModel& model, const OutputProjector& projector) {
    detail::require(projector.output_dim() == model.q(), ErrorKind::ProjectorDimensionMismatch,
                    "projector rows do not match model outputs");
    return make_system(model.a(), model.b(), projector.basis.transpose() * model.c(), false);
}

/// Smallest horizon k with ||A^k B||_F < tol ||B||_F; snapshots cap at `cap`
/// and the sampling period grows to reach the horizon.
inline SamplingPlan default_sampling(const StateSpaceModel& model, double tol = 1e-4, long cap = 200,
                                     long max_steps = 10'000'000) {
    detail::require_stable(model, "default_sampling");
    const double target = tol * model.b().norm();
    Matrix x = model.b();
    long k = 0;
    while (x.norm() >= target && k < max_steps) {
        x = model.a() * x;
        ++k;
    }
    if (k <= cap) return {std::max(k, 1L), std::max(k, 1L), 1};
    const long P = (k + cap - 1) / cap;
    return {cap, cap, static_cast<int>(P)};
}

}  // namespace erapod
