#pragma once

#include <string>

#include "erapod/lti.hpp"
#include "erapod/sampling.hpp"

namespace erapod {

enum class HankelSource { bpod, era };

constexpr const char* to_string(HankelSource s) { return s == HankelSource::bpod ? "bpod" : "era"; }

/// Block inner products spent on each matrix; one count per (q~ x p) block.
struct HankelCounters {
    long long h_blocks = 0;
    long long hprime_blocks = 0;
};

/// Generalized Hankel matrix H and its one-step shift H', both
/// (block_rows * out_dim) x (block_cols * in_dim).
struct HankelPair {
    Matrix H;
    Matrix Hprime;
    Index block_rows = 0;  ///< m_o + 1
    Index block_cols = 0;  ///< m_c + 1
    Index out_dim = 0;     ///< q~
    Index in_dim = 0;      ///< p
    HankelSource source = HankelSource::era;
    HankelCounters counters;

    auto block(Index i, Index j) const { return H.block(i * out_dim, j * in_dim, out_dim, in_dim); }
    auto block_prime(Index i, Index j) const { return Hprime.block(i * out_dim, j * in_dim, out_dim, in_dim); }
};

/// H = Y*X and H' = Y*(AX), assembled block by block. AX costs one extra
/// time step per column of X.
inline HankelPair hankel_from_snapshots(const SnapshotMatrix& X, const SnapshotMatrix& Y,
                                        const StateSpaceModel& model) {
    using detail::require;
    require(X.kind == SnapshotKind::primal && Y.kind == SnapshotKind::adjoint, ErrorKind::InvalidArgument,
            "expected primal X and adjoint Y snapshots");
    require(X.period == Y.period, ErrorKind::PeriodMismatch,
            "X sampled with P=" + std::to_string(X.period) + ", Y with P=" + std::to_string(Y.period));
    require(X.state_dim() == model.n() && Y.state_dim() == model.n(), ErrorKind::DimensionMismatch,
            "snapshot state dimension does not match model n=" + std::to_string(model.n()));

    Matrix AX(X.data.rows(), X.data.cols());
    for (Index j = 0; j < X.data.cols(); ++j) AX.col(j).noalias() = model.a() * X.data.col(j);

    HankelPair pair;
    pair.block_rows = Y.block_count();
    pair.block_cols = X.block_count();
    pair.out_dim = Y.block_width;
    pair.in_dim = X.block_width;
    pair.source = HankelSource::bpod;
    pair.H.resize(pair.block_rows * pair.out_dim, pair.block_cols * pair.in_dim);
    pair.Hprime.resize(pair.H.rows(), pair.H.cols());
    for (Index i = 0; i < pair.block_rows; ++i) {
        const auto Yi = Y.block(i);
        for (Index j = 0; j < pair.block_cols; ++j) {
            pair.H.block(i * pair.out_dim, j * pair.in_dim, pair.out_dim, pair.in_dim).noalias() =
                Yi.transpose() * X.block(j);
            ++pair.counters.h_blocks;
            pair.Hprime.block(i * pair.out_dim, j * pair.in_dim, pair.out_dim, pair.in_dim).noalias() =
                Yi.transpose() * AX.middleCols(j * X.block_width, X.block_width);
            ++pair.counters.hprime_blocks;
        }
    }
    return pair;
}

/// H block (i,j) = Markov block at (i+j)P; H' block (i,j) = block at (i+j)P+1.
/// Only the m_c+m_o+1 distinct blocks of each are counted; the rest are copies.
inline HankelPair hankel_from_markov(const MarkovSequence& markov, long mc, long mo, int P) {
    detail::require(mc >= 0 && mo >= 0 && P >= 1, ErrorKind::InvalidArgument, "invalid Hankel block counts");
    detail::require(markov.size() > 0, ErrorKind::MissingExponent, "empty Markov sequence");
    HankelPair pair;
    pair.block_rows = mo + 1;
    pair.block_cols = mc + 1;
    pair.out_dim = markov.output_dim();
    pair.in_dim = markov.input_dim();
    pair.source = HankelSource::era;
    pair.H.resize(pair.block_rows * pair.out_dim, pair.block_cols * pair.in_dim);
    pair.Hprime.resize(pair.H.rows(), pair.H.cols());

    for (long s = 0; s <= mc + mo; ++s) {
        const Matrix& h = markov.at_exponent(s * P);
        const Matrix& hp = markov.at_exponent(s * P + 1);
        detail::require(h.rows() == pair.out_dim && h.cols() == pair.in_dim && hp.rows() == pair.out_dim &&
                            hp.cols() == pair.in_dim,
                        ErrorKind::DimensionMismatch, "Markov blocks have non-uniform shape");
        ++pair.counters.h_blocks;
        ++pair.counters.hprime_blocks;
        for (long i = std::max(0L, s - mc); i <= std::min(s, mo); ++i) {
            const long j = s - i;
            pair.H.block(i * pair.out_dim, j * pair.in_dim, pair.out_dim, pair.in_dim) = h;
            pair.Hprime.block(i * pair.out_dim, j * pair.in_dim, pair.out_dim, pair.in_dim) = hp;
        }
    }
    return pair;
}

}  // namespace erapod
