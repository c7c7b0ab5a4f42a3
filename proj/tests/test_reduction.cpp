#include "fixtures.hpp"

using namespace erapod;
using fixtures::kind_of;
using fixtures::mat;
using fixtures::rel;

namespace {

struct Data {
    SnapshotMatrix X, Y;
    HankelPair bpod, era;
    HankelSVD svd_bpod, svd_era;
};

Data collect(const StateSpaceModel& m, long mc, long mo, int P) {
    Data d;
    d.X = collect_primal(m, mc, P);
    d.Y = collect_adjoint(m, mo, P);
    d.bpod = hankel_from_snapshots(d.X, d.Y, m);
    d.era = hankel_from_markov(collect_markov_pairs(m, mc, mo, P), mc, mo, P);
    d.svd_bpod = svd_truncate(d.bpod.H);
    d.svd_era = svd_truncate(d.era.H);
    return d;
}

/// Largest order whose singular value stays above `floor` relative to the first.
Index order_above(const Vector& s, double floor) {
    Index r = 0;
    while (r < s.size() && s(r) > floor * s(0)) ++r;
    return r;
}

double model_rel_diff(const ReducedModel& a, const ReducedModel& b) {
    return std::max({rel(a.A, b.A), rel(a.B, b.B), rel(a.C, b.C)});
}

}  // namespace

TEST(SvdTruncate, RankOneOuterProduct) {
    const auto svd = svd_truncate(mat(2, 2, {1.0, 0.5, 0.5, 0.25}));
    ASSERT_EQ(svd.retained(), 1);
    EXPECT_NEAR(svd.sigma(0), 1.25, 1e-15);
    EXPECT_NEAR(svd.U(0, 0), 2.0 / std::sqrt(5.0), 1e-15);
    EXPECT_NEAR(svd.U(1, 0), 1.0 / std::sqrt(5.0), 1e-15);
    EXPECT_LT(max_abs_diff(svd.U, svd.V), 1e-15);
    EXPECT_EQ(svd.numerical_rank, 1);
}

TEST(SvdTruncate, Identity) {
    const auto svd = svd_truncate(Matrix::Identity(3, 3));
    EXPECT_LT(max_abs_diff(svd.sigma, Vector::Ones(3)), 1e-15);
}

TEST(SvdTruncate, Errors) {
    const Matrix rank2 = mat(3, 2, {1, 0, 0, 1, 1, 1}) * mat(2, 3, {1, 2, 3, 0, 1, 0});
    EXPECT_EQ(kind_of([&] { svd_truncate(rank2, 5); }), ErrorKind::RankExceeded);
    EXPECT_EQ(kind_of([] { svd_truncate(Matrix::Zero(3, 3)); }), ErrorKind::ZeroMatrix);
    EXPECT_EQ(svd_truncate(Matrix::Zero(3, 3), 0).retained(), 0);
}

TEST(SvdTruncate, SignConventionAndOrdering) {
    const auto m = random_stable_system(10, 2, 2, 0.9, 4);
    const auto svd = svd_truncate(collect(m, 10, 10, 1).bpod.H);
    for (Index j = 0; j < svd.retained(); ++j) {
        Index at = 0;
        svd.U.col(j).cwiseAbs().maxCoeff(&at);
        EXPECT_GT(svd.U(at, j), 0.0);
        if (j > 0) EXPECT_LE(svd.sigma(j), svd.sigma(j - 1));
    }
}

TEST(SelectOrder, TailCriterion) {
    Vector s(4);
    s << 10.0, 1.0, 0.005, 0.001;
    EXPECT_EQ(select_order(s), 2);
    EXPECT_EQ(select_order(s, 1e-5), 4);
}

TEST(SelectOrder, KeepsEqualGroupsTogether) {
    Vector s(4);
    s << 1.0, 0.5, 0.5, 1e-6;
    EXPECT_EQ(select_order(s, 0.3), 3);
}

TEST(BpodModes, ScalarModesAreOne) {
    const auto d = collect(fixtures::scalar(), 1, 1, 1);
    const auto modes = bpod_modes(d.X, d.Y, d.svd_bpod, 1);
    EXPECT_NEAR(modes.primal(0, 0), 1.0, 1e-15);
    EXPECT_NEAR(modes.adjoint(0, 0), 1.0, 1e-15);
}

TEST(BpodModes, BiorthogonalOnRandomFixtures) {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const auto m = random_stable_system(15, 2, 2, 0.8, seed);
        const auto d = collect(m, 40, 40, 1);
        const Index r = order_above(d.svd_bpod.sigma, 1e-6);
        const auto modes = bpod_modes(d.X, d.Y, d.svd_bpod, r);
        EXPECT_LT(max_abs_diff(modes.adjoint.transpose() * modes.primal, Matrix::Identity(r, r)), 1e-8);
    }
}

TEST(BpodModes, SelfAdjointOrthonormalSnapshots) {
    SnapshotMatrix X{mat(3, 2, {1, 0, 0, 1, 0, 0}), 1, 1, SnapshotKind::primal};
    SnapshotMatrix Y = X;
    Y.kind = SnapshotKind::adjoint;
    X.data.col(0) *= 2.0;  // distinct singular values so the order is fixed
    Y.data.col(0) *= 2.0;
    const auto svd = svd_truncate(Y.data.transpose() * X.data);
    const auto modes = bpod_modes(X, Y, svd, 2);
    EXPECT_LT(max_abs_diff(modes.primal, modes.adjoint), 1e-15);
    EXPECT_LT(max_abs_diff(modes.primal, mat(3, 2, {1, 0, 0, 1, 0, 0})), 1e-15);
}

TEST(BpodModes, InconsistentInputsAreDetected) {
    const auto m = random_stable_system(8, 1, 1, 0.7, 2);
    const auto d = collect(m, 10, 10, 1);
    const auto other = collect(random_stable_system(8, 1, 1, 0.7, 3), 10, 10, 1);
    EXPECT_EQ(kind_of([&] { bpod_modes(d.X, other.Y, d.svd_bpod, 2); }), ErrorKind::BiorthogonalityFailure);
}

TEST(BpodReduce, ScalarExact) {
    const auto m = fixtures::scalar();
    const auto d = collect(m, 1, 1, 1);
    const auto red = bpod_reduce(m, bpod_modes(d.X, d.Y, d.svd_bpod, 1));
    EXPECT_NEAR(red.A(0, 0), 0.5, 1e-15);
    EXPECT_NEAR(red.B(0, 0), 1.0, 1e-15);
    EXPECT_NEAR(red.C(0, 0), 1.0, 1e-15);
    EXPECT_EQ(red.method, Method::bpod);
}

TEST(BpodReduce, IdentityModesKeepTheModel) {
    const auto m = random_stable_system(4, 2, 3, 0.6, 8);
    const ModeSet id{Matrix::Identity(4, 4), Matrix::Identity(4, 4), Vector(), ModeFlavor::true_adjoint};
    const auto red = bpod_reduce(m, id);
    EXPECT_EQ(red.A, m.a());
    EXPECT_EQ(red.B, m.b());
    EXPECT_EQ(red.C, m.c());
}

TEST(BpodReduce, ZeroOutputMap) {
    const auto m = make_system(Matrix::Constant(2, 2, 0.1), Matrix::Ones(2, 1), Matrix::Zero(1, 2));
    const ModeSet id{Matrix::Identity(2, 2), Matrix::Identity(2, 2), Vector(), ModeFlavor::true_adjoint};
    EXPECT_EQ(bpod_reduce(m, id).C.norm(), 0.0);
}

TEST(EraReduce, ScalarRankOne) {
    const auto d = collect(fixtures::scalar(), 1, 1, 1);
    const auto red = era_reduce(d.era, d.svd_era, 1);
    EXPECT_NEAR(red.A(0, 0), 0.5, 1e-15);
    EXPECT_NEAR(red.B(0, 0), 1.0, 1e-15);
    EXPECT_NEAR(red.C(0, 0), 1.0, 1e-15);
    EXPECT_EQ(red.method, Method::era);
}

TEST(EraReduce, ZeroShiftIsDeadbeat) {
    HankelPair pair;
    pair.H = Matrix::Identity(2, 2);
    pair.Hprime = Matrix::Zero(2, 2);
    pair.block_rows = pair.block_cols = 2;
    pair.out_dim = pair.in_dim = 1;
    const auto red = era_reduce(pair, svd_truncate(pair.H), 2);
    EXPECT_EQ(red.A.norm(), 0.0);
}

TEST(EraReduce, S2MatchesSixMarkovParameters) {
    const auto m = fixtures::s2();
    const auto d = collect(m, 2, 2, 1);
    const auto red = era_reduce(d.era, d.svd_era, 2);
    const auto truth = markov_parameters(m, 6);
    Matrix x = red.B;
    for (std::size_t k = 0; k < 6; ++k) {
        EXPECT_NEAR((red.C * x)(0, 0), truth.blocks[k](0, 0), 1e-10);
        x = red.A * x;
    }
}

TEST(EraReduce, OrderAboveRankIsRejected) {
    const auto d = collect(fixtures::s2(), 3, 3, 1);
    EXPECT_EQ(kind_of([&] { era_reduce(d.era, d.svd_era, 3); }), ErrorKind::RankExceeded);
}

TEST(Equivalence, EraEqualsBpodOnRandomSystems) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const double rho = seed % 2 ? 0.5 : 0.9;
        const auto m = random_stable_system(seed % 3 ? 20 : 5, 1 + seed % 2 * 2, 1 + (seed / 2) % 2 * 2, rho, seed);
        const int P = seed % 4 == 0 ? 5 : 1;
        const long mc = fixtures::tail_horizon(rho, 1e-8) / P * 2;
        const auto d = collect(m, mc, mc, P);
        const Index r = order_above(d.svd_era.sigma, 1e-5);
        for (Index k : {Index(1), r}) {
            const auto era = era_reduce(d.era, d.svd_era, k);
            const auto bpod = bpod_reduce(m, bpod_modes(d.X, d.Y, d.svd_bpod, k));
            EXPECT_LT(model_rel_diff(era, bpod), 1e-8) << "seed " << seed << " r " << k;
        }
    }
}

TEST(Equivalence, IdentityChain) {
    const auto m = random_stable_system(12, 2, 2, 0.8, 31);
    const auto d = collect(m, 30, 30, 1);
    const Index r = order_above(d.svd_era.sigma, 1e-6);
    const auto& s = d.svd_era;
    const Vector sq = s.sigma.head(r).cwiseSqrt();
    const Matrix lhs1 = sq.cwiseInverse().asDiagonal() * s.U.leftCols(r).transpose() * d.era.H;
    const Matrix rhs1 = sq.asDiagonal() * s.V.leftCols(r).transpose();
    EXPECT_LT(max_abs_diff(lhs1, rhs1), 1e-10);
    const Matrix lhs2 = d.era.H * s.V.leftCols(r) * sq.cwiseInverse().asDiagonal();
    const Matrix rhs2 = s.U.leftCols(r) * sq.asDiagonal();
    EXPECT_LT(max_abs_diff(lhs2, rhs2), 1e-10);
}

TEST(Equivalence, ConvergedEraModelsAreStable) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto m = random_stable_system(10, 1, 1, 0.85, seed);
        const long mc = fixtures::tail_horizon(0.85, 1e-8);
        const auto d = collect(m, mc, mc, 1);
        for (Index r = 1; r <= d.svd_era.retained(); ++r) {
            const auto red = era_reduce(d.era, d.svd_era, r);
            EXPECT_LT(spectral_radius(red.A), 1.0 + 1e-6) << "seed " << seed << " r " << r;
        }
    }
}

TEST(Equivalence, FullOrderEraMatchesTheSampledMarkovBlocks) {
    const auto m = random_stable_system(6, 2, 2, 0.7, 14);
    const long mc = 12, mo = 12;
    const auto seq = collect_markov_pairs(m, mc, mo, 1);
    const auto pair = hankel_from_markov(seq, mc, mo, 1);
    const auto svd = svd_truncate(pair.H);
    const auto red = era_reduce(pair, svd, svd.numerical_rank);
    Matrix x = red.B;
    double peak = 0.0;
    for (const auto& b : seq.blocks) peak = std::max(peak, max_abs(b));
    for (long k = 0; k <= mc + mo + 1; ++k) {
        EXPECT_LT(max_abs_diff(red.C * x, seq.at_exponent(k)), 1e-8 * peak) << "k " << k;
        x = red.A * x;
    }
}

TEST(PseudoAdjoint, OrthonormalColumnsAreTheirOwnPseudoInverse) {
    const Matrix Phi = Eigen::HouseholderQR<Matrix>(Matrix::Random(6, 3)).householderQ() * Matrix::Identity(6, 3);
    const auto modes = pseudo_adjoint_modes(Phi);
    EXPECT_LT(max_abs_diff(modes.adjoint, Phi), 1e-14);
    EXPECT_EQ(modes.flavor, ModeFlavor::pseudo_adjoint);
}

TEST(PseudoAdjoint, Scalar) {
    EXPECT_NEAR(pseudo_adjoint_modes(mat(1, 1, {2.0})).adjoint(0, 0), 0.5, 1e-16);
}

TEST(PseudoAdjoint, HandInverse) {
    const auto modes = pseudo_adjoint_modes(mat(3, 2, {1, 0, 1, 1, 0, 1}));
    const Matrix expect = mat(3, 2, {2.0 / 3, -1.0 / 3, 1.0 / 3, 1.0 / 3, -1.0 / 3, 2.0 / 3});
    EXPECT_LT(max_abs_diff(modes.adjoint, expect), 1e-15);
    EXPECT_LT(max_abs_diff(modes.adjoint.transpose() * modes.primal, Matrix::Identity(2, 2)), 1e-15);
}

TEST(PseudoAdjoint, IllConditioned) {
    EXPECT_EQ(kind_of([] { pseudo_adjoint_modes(mat(3, 2, {1, 1, 1, 1, 1, 1 + 1e-9})); }), ErrorKind::IllConditioned);
}

TEST(PseudoReduce, SymmetricSystemMatchesBpod) {
    Matrix A = Matrix::Random(8, 8);
    A = 0.5 * (A + A.transpose()).eval();
    A *= 0.8 / spectral_radius(A);
    const Matrix B = Matrix::Random(8, 1);
    const auto m = make_system(A, B, B.transpose());
    const auto d = collect(m, 60, 60, 1);
    const Index r = order_above(d.svd_bpod.sigma, 1e-6);
    const auto truth = bpod_modes(d.X, d.Y, d.svd_bpod, r);
    const auto pseudo = pseudo_adjoint_modes(truth.primal);
    EXPECT_LT(model_rel_diff(bpod_reduce(m, truth), pseudo_reduce(m, pseudo.primal, pseudo.adjoint)), 1e-8);
}

TEST(PseudoReduce, ScalarAndIdentity) {
    const auto m = fixtures::scalar();
    const auto red = pseudo_reduce(m, Matrix::Ones(1, 1), Matrix::Ones(1, 1));
    EXPECT_DOUBLE_EQ(red.A(0, 0), 0.5);
    EXPECT_EQ(red.method, Method::pseudo);
    const auto r4 = random_stable_system(4, 1, 1, 0.5, 3);
    EXPECT_EQ(pseudo_reduce(r4, Matrix::Identity(4, 4), Matrix::Identity(4, 4)).A, r4.a());
}

TEST(PodReduce, ScalarIsExact) {
    const auto m = fixtures::scalar();
    const auto red = pod_reduce(collect_primal(m, 3, 1), m, 1);
    EXPECT_DOUBLE_EQ(red.A(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(red.B(0, 0) * red.C(0, 0), 1.0);
    EXPECT_EQ(red.method, Method::pod);
}

TEST(PodReduce, FullOrderPreservesTheTransferFunction) {
    const auto m = random_stable_system(5, 1, 2, 0.7, 6);
    const auto red = pod_reduce(collect_primal(m, 20, 1), m, 5);
    const auto w = log_frequencies(1e-2, 3.0, 15);
    const auto a = frequency_response(m, w);
    const auto b = frequency_response(red, w);
    for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(a.gains[i], b.gains[i], 1e-10 * a.gains[i]);
}

TEST(PodReduce, OrderAboveSnapshotRank) {
    const auto m = fixtures::s2();
    EXPECT_EQ(kind_of([&] { pod_reduce(collect_primal(m, 5, 1), m, 3); }), ErrorKind::RankExceeded);
}

TEST(PodReduce, WorseThanEraOnNonNormalS2) {
    const auto m = fixtures::s2();
    const auto d = collect(m, 60, 60, 1);
    const long K = 200;
    const auto full = impulse_trace(m, K);
    const double e_era = h2_error(full, impulse_trace(era_reduce(d.era, d.svd_era, 1), K)).value;
    const double e_pod = h2_error(full, impulse_trace(pod_reduce(d.X, m, 1), K)).value;
    EXPECT_GT(e_pod, e_era);
}
