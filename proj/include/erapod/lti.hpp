#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "erapod/linalg.hpp"
#include "erapod/snapshots.hpp"

namespace erapod {

/// Margin below 1 required of the spectral radius for a model to count as stable.
inline constexpr double kStabilityMargin = 1e-12;

/// Anything exposing a discrete-time triple through a(), b(), c().
template <typename S>
concept LinearSystem = requires(const S& s) {
    { s.a() } -> std::convertible_to<const Matrix&>;
    { s.b() } -> std::convertible_to<const Matrix&>;
    { s.c() } -> std::convertible_to<const Matrix&>;
};

/// Dense discrete-time system x(k+1) = A x(k) + B u(k), y(k) = C x(k).
/// Immutable once built; construct through make_system().
class StateSpaceModel {
public:
    const Matrix& a() const { return a_; }
    const Matrix& b() const { return b_; }
    const Matrix& c() const { return c_; }
    Index n() const { return a_.rows(); }
    Index p() const { return b_.cols(); }
    Index q() const { return c_.rows(); }
    double spectral_radius() const { return rho_; }
    bool is_stable() const { return rho_ < 1.0 - kStabilityMargin; }

    friend bool operator==(const StateSpaceModel& l, const StateSpaceModel& r) {
        return l.a_ == r.a_ && l.b_ == r.b_ && l.c_ == r.c_;
    }

private:
    friend StateSpaceModel make_system(Matrix, Matrix, Matrix, bool);
    friend StateSpaceModel adjoint_system(const StateSpaceModel&);

    StateSpaceModel(Matrix a, Matrix b, Matrix c, double rho)
        : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), rho_(rho) {}

    Matrix a_;
    Matrix b_;
    Matrix c_;
    double rho_ = 0.0;
};

inline StateSpaceModel make_system(Matrix A, Matrix B, Matrix C, bool require_stable = true) {
    using detail::require;
    require(A.rows() > 0 && A.rows() == A.cols(), ErrorKind::DimensionMismatch,
            "A must be square and nonempty, got " + std::to_string(A.rows()) + "x" + std::to_string(A.cols()));
    require(B.rows() == A.rows() && B.cols() > 0, ErrorKind::DimensionMismatch,
            "B must have n=" + std::to_string(A.rows()) + " rows and at least one column");
    require(C.cols() == A.rows() && C.rows() > 0, ErrorKind::DimensionMismatch,
            "C must have n=" + std::to_string(A.rows()) + " columns and at least one row");
    const double rho = spectral_radius(A);
    if (require_stable && !(rho < 1.0 - kStabilityMargin))
        detail::fail(ErrorKind::UnstableSystem, "spectral radius " + std::to_string(rho) + " >= 1 - 1e-12");
    return StateSpaceModel(std::move(A), std::move(B), std::move(C), rho);
}

/// (A*, C*, B*): dimensions (n, q, p). Eigenvalues are shared, so rho is reused.
inline StateSpaceModel adjoint_system(const StateSpaceModel& m) {
    return StateSpaceModel(m.a().transpose(), m.c().transpose(), m.b().transpose(), m.spectral_radius());
}

namespace detail {

/// Steps every input channel independently and records state snapshots at
/// exponents 0, P, 2P, ..., mP. A^P is never formed.
inline Matrix channel_snapshots(const Matrix& A, const Matrix& B, long m, long P) {
    const Index n = A.rows();
    const Index p = B.cols();
    Matrix X(n, p * (m + 1));
    Vector x(n), next(n);
    for (Index j = 0; j < p; ++j) {
        x = B.col(j);
        X.col(j) = x;
        for (long k = 1; k <= m; ++k) {
            for (long s = 0; s < P; ++s) {
                next.noalias() = A * x;
                x.swap(next);
            }
            X.col(k * p + j) = x;
        }
    }
    return X;
}

/// Output blocks Cout A^k B at the requested (sorted, unique) exponents.
inline std::vector<Matrix> channel_outputs(const Matrix& A, const Matrix& B, const Matrix& Cout,
                                           const std::vector<long>& exponents) {
    std::vector<Matrix> out(exponents.size(), Matrix(Cout.rows(), B.cols()));
    Vector x(A.rows()), next(A.rows());
    for (Index j = 0; j < B.cols(); ++j) {
        x = B.col(j);
        long at = 0;
        for (std::size_t e = 0; e < exponents.size(); ++e) {
            for (; at < exponents[e]; ++at) {
                next.noalias() = A * x;
                x.swap(next);
            }
            out[e].col(j).noalias() = Cout * x;
        }
    }
    return out;
}

}  // namespace detail

/// X = [B, A^P B, ..., A^{mP} B] by per-channel time stepping.
inline SnapshotMatrix impulse_response_states(const StateSpaceModel& model, long m, int P) {
    detail::require(m >= 0, ErrorKind::InvalidArgument, "snapshot count must be >= 0");
    detail::require(P >= 1, ErrorKind::InvalidArgument, "sampling period must be >= 1");
    return SnapshotMatrix{detail::channel_snapshots(model.a(), model.b(), m, P), model.p(), P, SnapshotKind::primal};
}

/// (CB, CAB, ..., CA^{count-1}B).
inline MarkovSequence markov_parameters(const StateSpaceModel& model, long count) {
    detail::require(count >= 1, ErrorKind::InvalidArgument, "Markov parameter count must be >= 1");
    std::vector<long> exps(static_cast<std::size_t>(count));
    for (long k = 0; k < count; ++k) exps[static_cast<std::size_t>(k)] = k;
    MarkovSequence seq;
    seq.blocks = detail::channel_outputs(model.a(), model.b(), model.c(), exps);
    seq.indices = exps;
    seq.pattern = exps;
    return seq;
}

/// Seeded Gaussian (A, B, C) with A rescaled to the requested spectral radius.
inline StateSpaceModel random_stable_system(Index n, Index p, Index q, double target_radius, std::uint64_t seed) {
    using detail::require;
    require(n >= 1 && p >= 1 && q >= 1, ErrorKind::InvalidArgument, "dimensions must be positive");
    require(target_radius > 0.0 && target_radius < 1.0, ErrorKind::InvalidArgument, "target radius must lie in (0,1)");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    auto draw = [&](Index r, Index c) {
        Matrix M(r, c);
        for (Index j = 0; j < c; ++j)
            for (Index i = 0; i < r; ++i) M(i, j) = normal(rng);
        return M;
    };
    for (int attempt = 0; attempt < 10; ++attempt) {
        Matrix A = draw(n, n);
        const double rho = spectral_radius(A);
        if (!(rho > 1e-12 * A.norm())) continue;
        A *= target_radius / rho;
        Matrix B = draw(n, p);
        Matrix C = draw(q, n);
        return make_system(std::move(A), std::move(B), std::move(C), true);
    }
    detail::fail(ErrorKind::DegenerateDraw, "random state matrix was nilpotent in 10 consecutive draws");
}

/// 2-D convection-diffusion on an nx x ny grid (unit spacing), Dirichlet walls.
struct PlantConfig {
    int nx = 16;
    int ny = 16;
    double nu = 0.2;         ///< diffusion, grid units^2 per unit time
    double cx = 0.3;         ///< convection velocity, grid units per unit time
    double cy = 0.0;
    double forcing_x = 3.0;  ///< Gaussian body-force center, grid coordinates
    double forcing_y = 7.5;
    double forcing_width = 1.5;
    double dt = 0.5;
};

/// Convection-dominated variant: Courant number cx*dt above one with weak
/// diffusion, so A is strongly non-normal (large transient growth) while
/// still stable. This is the regime where POD and pseudo-adjoint models fall
/// visibly behind ERA.
inline PlantConfig convective_plant_config() {
    PlantConfig cfg;
    cfg.nu = 0.0105;
    cfg.cx = 2.78;
    cfg.cy = 0.046;
    cfg.forcing_x = 5.2;
    cfg.forcing_y = 4.96;
    cfg.forcing_width = 1.85;
    return cfg;
}

/// Explicit Euler, first-order upwind convection, central diffusion.
/// B is the Gaussian forcing column; C = I so every state is an output.
inline StateSpaceModel build_plant(const PlantConfig& cfg) {
    using detail::require;
    require(cfg.nx >= 1 && cfg.ny >= 1, ErrorKind::InvalidArgument, "grid dimensions must be positive");
    require(cfg.nu >= 0.0, ErrorKind::InvalidArgument, "diffusion coefficient must be nonnegative");
    require(cfg.dt > 0.0, ErrorKind::InvalidArgument, "time step must be positive");
    require(cfg.forcing_width > 0.0, ErrorKind::InvalidArgument, "forcing width must be positive");

    const Index nx = cfg.nx;
    const Index ny = cfg.ny;
    const Index n = nx * ny;
    auto idx = [nx](Index i, Index j) { return i + nx * j; };

    Matrix A = Matrix::Zero(n, n);
    Matrix B(n, 1);
    const double dt = cfg.dt;
    const double w2 = 2.0 * cfg.forcing_width * cfg.forcing_width;
    for (Index j = 0; j < ny; ++j) {
        for (Index i = 0; i < nx; ++i) {
            const Index s = idx(i, j);
            A(s, s) = 1.0 - dt * (4.0 * cfg.nu + std::abs(cfg.cx) + std::abs(cfg.cy));
            auto couple = [&](Index ii, Index jj, double w) {
                if (ii >= 0 && ii < nx && jj >= 0 && jj < ny) A(s, idx(ii, jj)) += dt * w;
            };
            couple(i - 1, j, cfg.nu + std::max(cfg.cx, 0.0));
            couple(i + 1, j, cfg.nu + std::max(-cfg.cx, 0.0));
            couple(i, j - 1, cfg.nu + std::max(cfg.cy, 0.0));
            couple(i, j + 1, cfg.nu + std::max(-cfg.cy, 0.0));
            const double dx = static_cast<double>(i) - cfg.forcing_x;
            const double dy = static_cast<double>(j) - cfg.forcing_y;
            B(s, 0) = std::exp(-(dx * dx + dy * dy) / w2);
        }
    }
    return make_system(std::move(A), std::move(B), Matrix::Identity(n, n), true);
}

}  // namespace erapod
