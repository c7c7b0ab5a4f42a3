#include "fixtures.hpp"

using namespace erapod;
using fixtures::kind_of;
using fixtures::mat;

TEST(MakeSystem, ScalarRadiusIsTheEntry) {
    const auto m = fixtures::scalar();
    EXPECT_DOUBLE_EQ(m.spectral_radius(), 0.5);
    EXPECT_TRUE(m.is_stable());
    EXPECT_EQ(m.n(), 1);
}

TEST(MakeSystem, IdentityIsRejectedWhenStabilityRequired) {
    EXPECT_EQ(kind_of([] { make_system(Matrix::Identity(2, 2), Matrix::Ones(2, 1), Matrix::Ones(1, 2)); }),
              ErrorKind::UnstableSystem);
    const auto m = make_system(Matrix::Identity(2, 2), Matrix::Ones(2, 1), Matrix::Ones(1, 2), false);
    EXPECT_FALSE(m.is_stable());
}

TEST(MakeSystem, TriangularRadius) { EXPECT_NEAR(fixtures::s2().spectral_radius(), 0.6, 1e-14); }

TEST(MakeSystem, DimensionChecks) {
    EXPECT_EQ(kind_of([] { make_system(Matrix::Zero(2, 3), Matrix::Ones(2, 1), Matrix::Ones(1, 2)); }),
              ErrorKind::DimensionMismatch);
    EXPECT_EQ(kind_of([] { make_system(Matrix::Zero(2, 2), Matrix::Ones(3, 1), Matrix::Ones(1, 2)); }),
              ErrorKind::DimensionMismatch);
    EXPECT_EQ(kind_of([] { make_system(Matrix::Zero(2, 2), Matrix::Ones(2, 1), Matrix::Ones(1, 3)); }),
              ErrorKind::DimensionMismatch);
}

TEST(Adjoint, ScalarIsSelfAdjoint) {
    const auto m = fixtures::scalar();
    EXPECT_TRUE(adjoint_system(m) == m);
}

TEST(Adjoint, TransposesS2) {
    const auto a = adjoint_system(fixtures::s2());
    EXPECT_EQ(a.a(), mat(2, 2, {0.5, 0.0, 1.0, 0.6}));
    EXPECT_EQ(a.b(), mat(2, 1, {1.0, 0.0}));
    EXPECT_EQ(a.c(), mat(1, 2, {0.0, 1.0}));
    EXPECT_EQ(a.p(), 1);
    EXPECT_EQ(a.q(), 1);
}

TEST(Adjoint, InvolutionOnRandomSystems) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto m = random_stable_system(6, 2, 3, 0.8, seed);
        EXPECT_TRUE(adjoint_system(adjoint_system(m)) == m);
    }
}

TEST(ImpulseStates, ScalarGeometric) {
    const auto X = impulse_response_states(fixtures::scalar(), 2, 1);
    EXPECT_EQ(X.data, mat(1, 3, {1.0, 0.5, 0.25}));
    EXPECT_EQ(X.kind, SnapshotKind::primal);
}

TEST(ImpulseStates, ZeroSnapshotsIsB) {
    const auto m = random_stable_system(5, 2, 1, 0.7, 3);
    EXPECT_EQ(impulse_response_states(m, 0, 3).data, m.b());
}

TEST(ImpulseStates, S2WithPeriodTwo) {
    const auto X = impulse_response_states(fixtures::s2(), 1, 2);
    const Matrix A2B = fixtures::power(fixtures::s2().a(), 2) * fixtures::s2().b();
    EXPECT_LT(max_abs_diff(X.data, mat(2, 2, {0.0, 1.1, 1.0, 0.36})), 1e-15);
    EXPECT_LT(max_abs_diff(X.data.col(1), A2B), 1e-15);
}

TEST(ImpulseStates, ChannelMajorBlocksMatchPowers) {
    const auto m = random_stable_system(7, 3, 2, 0.9, 11);
    const auto X = impulse_response_states(m, 4, 3);
    ASSERT_EQ(X.block_count(), 5);
    for (Index k = 0; k <= 4; ++k)
        EXPECT_LT(max_abs_diff(X.block(k), fixtures::power(m.a(), 3 * k) * m.b()), 1e-13);
}

TEST(ImpulseStates, ConsecutiveColumnsAreOneStepApart) {
    const auto m = random_stable_system(6, 2, 2, 0.95, 5);
    const auto X = impulse_response_states(m, 10, 1);
    for (Index k = 1; k <= 10; ++k) EXPECT_LT(max_abs_diff(X.block(k), m.a() * X.block(k - 1)), 1e-13);
}

TEST(Markov, ScalarGeometric) {
    const auto seq = markov_parameters(fixtures::scalar(), 4);
    ASSERT_EQ(seq.size(), 4u);
    const double expect[] = {1.0, 0.5, 0.25, 0.125};
    for (int k = 0; k < 4; ++k) EXPECT_DOUBLE_EQ(seq.blocks[k](0, 0), expect[k]);
}

TEST(Markov, ZeroOutputMap) {
    const auto m = make_system(Matrix::Constant(2, 2, 0.1), Matrix::Ones(2, 1), Matrix::Zero(1, 2));
    for (const auto& b : markov_parameters(m, 5).blocks) EXPECT_EQ(b.norm(), 0.0);
}

TEST(Markov, S2Recursion) {
    const auto seq = markov_parameters(fixtures::s2(), 4);
    const double expect[] = {0.0, 1.0, 1.1, 0.91};  // C A^3 B = 0.5 * 1.1 + 0.36
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(seq.blocks[k](0, 0), expect[k], 1e-15);
}

TEST(Markov, AdjointDuality) {
    const auto m = random_stable_system(8, 2, 3, 0.9, 21);
    const auto fwd = markov_parameters(m, 12);
    const auto bwd = markov_parameters(adjoint_system(m), 12);
    for (std::size_t k = 0; k < 12; ++k)
        EXPECT_LT(max_abs_diff(bwd.blocks[k], fwd.blocks[k].transpose()), 1e-13);
}

TEST(Markov, MissingExponentNamesTheIndex) {
    const auto seq = markov_parameters(fixtures::scalar(), 3);
    try {
        seq.at_exponent(7);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::MissingExponent);
        EXPECT_NE(std::string(e.what()).find("k=7"), std::string::npos);
    }
}

TEST(RandomSystem, DeterministicPerSeed) {
    const auto a = random_stable_system(5, 1, 1, 0.9, 1);
    const auto b = random_stable_system(5, 1, 1, 0.9, 1);
    EXPECT_TRUE(a == b);
    EXPECT_FALSE(a == random_stable_system(5, 1, 1, 0.9, 2));
}

TEST(RandomSystem, RadiusIsRescaled) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto m = random_stable_system(5, 1, 1, 0.9, seed);
        const double rho = Eigen::EigenSolver<Matrix>(m.a()).eigenvalues().cwiseAbs().maxCoeff();
        EXPECT_NEAR(rho, 0.9, 1e-10);
    }
}

TEST(RandomSystem, ScalarIsPlusMinusRadius) {
    const auto m = random_stable_system(1, 1, 1, 0.7, 4);
    EXPECT_NEAR(std::abs(m.a()(0, 0)), 0.7, 1e-15);
}

TEST(RandomSystem, RejectsBadRadius) {
    EXPECT_EQ(kind_of([] { random_stable_system(3, 1, 1, 1.0, 1); }), ErrorKind::InvalidArgument);
}

TEST(RandomSystem, ImpulseDecaysPastTheTailHorizon) {
    for (double rho : {0.5, 0.9}) {
        const auto m = random_stable_system(20, 3, 3, rho, 9);
        // Transient growth of a random non-normal A is absorbed by a generous margin.
        const long k = fixtures::tail_horizon(rho, 1e-8) * 2;
        const Matrix x = fixtures::power(m.a(), k) * m.b();
        EXPECT_LT(x.norm(), 1e-8 * m.b().norm());
    }
}

TEST(Plant, SingleCell) {
    PlantConfig cfg;
    cfg.nx = cfg.ny = 1;
    const auto m = build_plant(cfg);
    ASSERT_EQ(m.n(), 1);
    EXPECT_DOUBLE_EQ(m.a()(0, 0), 1.0 - cfg.dt * (4.0 * cfg.nu + std::abs(cfg.cx) + std::abs(cfg.cy)));
    EXPECT_EQ(m.c(), Matrix::Identity(1, 1));
}

TEST(Plant, NoTransportIsIdentityAndRejected) {
    PlantConfig cfg;
    cfg.nu = 0.0;
    cfg.cx = cfg.cy = 0.0;
    EXPECT_EQ(kind_of([&] { build_plant(cfg); }), ErrorKind::UnstableSystem);
}

TEST(Plant, DefaultIsStableWithFullStateOutput) {
    const auto m = build_plant(PlantConfig{});
    EXPECT_EQ(m.n(), 256);
    EXPECT_EQ(m.p(), 1);
    EXPECT_EQ(m.q(), 256);
    const double rho = Eigen::EigenSolver<Matrix>(m.a(), false).eigenvalues().cwiseAbs().maxCoeff();
    EXPECT_LT(rho, 1.0);
    EXPECT_NEAR(m.spectral_radius(), rho, 1e-12);
}

TEST(Plant, StencilEntries) {
    PlantConfig cfg;
    cfg.nx = 4;
    cfg.ny = 3;
    cfg.cx = 0.4;
    cfg.cy = -0.2;
    const auto m = build_plant(cfg);
    const double dt = cfg.dt, nu = cfg.nu;
    const Index s = 1 + 4 * 1;  // cell (1, 1)
    EXPECT_DOUBLE_EQ(m.a()(s, s), 1.0 - dt * (4 * nu + 0.6));
    EXPECT_DOUBLE_EQ(m.a()(s, s - 1), dt * (nu + 0.4));  // upwind side in x
    EXPECT_DOUBLE_EQ(m.a()(s, s + 1), dt * nu);
    EXPECT_DOUBLE_EQ(m.a()(s, s - 4), dt * nu);
    EXPECT_DOUBLE_EQ(m.a()(s, s + 4), dt * (nu + 0.2));  // upwind side in y for cy < 0
    EXPECT_EQ((m.a().row(s).array() != 0.0).count(), 5);
}

TEST(Plant, ForcingPeaksAtTheCenter) {
    PlantConfig cfg;
    cfg.forcing_x = 5.0;
    cfg.forcing_y = 9.0;
    const auto m = build_plant(cfg);
    Index at = 0;
    m.b().col(0).maxCoeff(&at);
    EXPECT_EQ(at, 5 + 16 * 9);
    EXPECT_DOUBLE_EQ(m.b()(at, 0), 1.0);
}
