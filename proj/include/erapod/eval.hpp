#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <unsupported/Eigen/FFT>

#include "erapod/gramians.hpp"
#include "erapod/lti.hpp"
#include "erapod/reduction.hpp"
#include "erapod/sampling.hpp"

namespace erapod {

/// Impulse-response output blocks G(0), ..., G(K-1).
struct ImpulseTrace {
    std::vector<Matrix> outputs;
    double dt = 1.0;  ///< reporting only

    std::size_t size() const { return outputs.size(); }
};

struct FrequencySweep {
    std::vector<double> frequencies;  ///< radians per step, strictly increasing
    std::vector<double> gains;        ///< sigma_max of the transfer matrix
    std::vector<double> coherence;    ///< spectral estimates only: mean magnitude-squared coherence
};

struct ErrorNorm {
    double value = 0.0;
    bool truncation_warning = false;  ///< the reference trace had not decayed to the tail tolerance
};

inline constexpr double kTailTolerance = 1e-8;

/// G(k) = C A^k B for k < K, outputs projected by Theta* when a projector is given.
template <LinearSystem S>
ImpulseTrace impulse_trace(const S& sys, long K, const OutputProjector* projector = nullptr) {
    detail::require(K >= 1, ErrorKind::InvalidArgument, "trace length must be >= 1");
    Matrix Cout = sys.c();
    if (projector != nullptr) {
        detail::require(projector->output_dim() == Cout.rows(), ErrorKind::ProjectorDimensionMismatch,
                        "projector rows do not match system outputs");
        Cout = projector->basis.transpose() * Cout;
    }
    ImpulseTrace tr;
    tr.outputs.reserve(static_cast<std::size_t>(K));
    Matrix x = sys.b();
    for (long k = 0; k < K; ++k) {
        tr.outputs.emplace_back(Cout * x);
        x = sys.a() * x;
    }
    return tr;
}

/// Theta G(k): a projected trace mapped back to the full output space.
inline ImpulseTrace lift(const ImpulseTrace& trace, const OutputProjector& projector) {
    ImpulseTrace out;
    out.dt = trace.dt;
    for (const Matrix& g : trace.outputs) {
        detail::require(g.rows() == projector.modes(), ErrorKind::ShapeMismatch, "trace is not in projected coordinates");
        out.outputs.emplace_back(projector.basis * g);
    }
    return out;
}

/// Smallest K with ||A^{K-1} B||_F <= tol * max_k ||A^k B||_F, capped at max_steps.
template <LinearSystem S>
long impulse_horizon(const S& sys, double tol = kTailTolerance, long max_steps = 1'000'000) {
    Matrix x = sys.b();
    double peak = x.norm();
    long k = 1;
    while (k < max_steps && x.norm() > tol * peak) {
        x = sys.a() * x;
        peak = std::max(peak, x.norm());
        ++k;
    }
    return k;
}

/// sqrt(sum_k ||G(k) - G_r(k)||_F^2) over the shared horizon.
inline ErrorNorm h2_error(const ImpulseTrace& full, const ImpulseTrace& reduced) {
    detail::require(full.size() == reduced.size(), ErrorKind::ShapeMismatch, "traces have different lengths");
    ErrorNorm out;
    double sum = 0.0;
    double peak = 0.0;
    for (std::size_t k = 0; k < full.size(); ++k) {
        const Matrix& g = full.outputs[k];
        const Matrix& gr = reduced.outputs[k];
        detail::require(g.rows() == gr.rows() && g.cols() == gr.cols(), ErrorKind::ShapeMismatch,
                        "trace blocks differ in shape at k=" + std::to_string(k));
        sum += (g - gr).squaredNorm();
        peak = std::max(peak, g.norm());
    }
    out.value = std::sqrt(sum);
    if (!full.outputs.empty() && full.outputs.back().norm() >= kTailTolerance * peak && peak > 0.0)
        out.truncation_warning = true;
    return out;
}

/// Error of the output projection itself: sqrt(sum_k ||(I - Theta Theta*) C A^k B||_F^2).
inline double lower_bound_error(const StateSpaceModel& full_model, const OutputProjector& projector, long K) {
    detail::require(projector.output_dim() == full_model.q(), ErrorKind::ProjectorDimensionMismatch,
                    "projector rows do not match model outputs");
    const ImpulseTrace tr = impulse_trace(full_model, K);
    double sum = 0.0;
    for (const Matrix& g : tr.outputs) {
        const Matrix resid = g - projector.basis * (projector.basis.transpose() * g);
        sum += resid.squaredNorm();
    }
    return std::sqrt(sum);
}

/// `count` log-spaced frequencies in [lo, hi].
inline std::vector<double> log_frequencies(double lo, double hi, int count) {
    std::vector<double> w(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 1.0 : static_cast<double>(i) / (count - 1);
        w[static_cast<std::size_t>(i)] = std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
    }
    w.back() = hi;
    return w;
}

/// sigma_max(C (e^{iw} I - A)^{-1} B) by a complex LU solve per frequency.
template <LinearSystem S>
FrequencySweep frequency_response(const S& sys, const std::vector<double>& frequencies,
                                  const OutputProjector* projector = nullptr) {
    using Complex = std::complex<double>;
    using CMatrix = Eigen::MatrixXcd;
    for (std::size_t i = 0; i < frequencies.size(); ++i) {
        const double w = frequencies[i];
        detail::require(w > 0.0 && w <= std::numbers::pi, ErrorKind::InvalidArgument,
                        "frequencies must lie in (0, pi]");
        detail::require(i == 0 || w > frequencies[i - 1], ErrorKind::InvalidArgument,
                        "frequencies must be strictly increasing");
    }
    Matrix Cout = sys.c();
    if (projector != nullptr) {
        detail::require(projector->output_dim() == Cout.rows(), ErrorKind::ProjectorDimensionMismatch,
                        "projector rows do not match system outputs");
        Cout = projector->basis.transpose() * Cout;
    }
    const Index n = sys.a().rows();
    const Eigen::VectorXcd eig = Eigen::EigenSolver<Matrix>(sys.a(), false).eigenvalues();
    const CMatrix Ac = sys.a().template cast<Complex>();
    const CMatrix Bc = sys.b().template cast<Complex>();
    const CMatrix Cc = Cout.template cast<Complex>();

    FrequencySweep sweep;
    sweep.frequencies = frequencies;
    for (const double w : frequencies) {
        const Complex z = std::polar(1.0, w);
        if ((eig.array() - z).abs().minCoeff() < 1e-12)
            detail::fail(ErrorKind::SingularResolvent, "e^{iw} is an eigenvalue of A at w=" + std::to_string(w));
        const CMatrix M = z * CMatrix::Identity(n, n) - Ac;
        const CMatrix G = Cc * Eigen::PartialPivLU<CMatrix>(M).solve(Bc);
        sweep.gains.push_back(Eigen::JacobiSVD<CMatrix>(G).singularValues()(0));
    }
    return sweep;
}

/// Welch segment length, fixed; overlap is half a segment.
inline constexpr Index kWelchSegment = 1024;

/// Transfer-magnitude estimate from a uniform(-0.5, 0.5) random-input run of K
/// steps: Welch cross/auto spectra (Hann window, 50% overlap), H = S_yu S_uu^{-1}
/// per bin, reported as sigma_max at bins w = 2 pi k / 1024, k = 1..512.
inline FrequencySweep spectral_estimate(const StateSpaceModel& model, long K, std::uint64_t seed,
                                        const OutputProjector* projector = nullptr) {
    using Complex = std::complex<double>;
    detail::require(K >= (1L << 14), ErrorKind::InvalidArgument, "run length must be at least 2^14 samples");
    const Index L = kWelchSegment;
    const Index half = L / 2;
    const Index n = model.n();
    const Index p = model.p();
    Matrix Cout = model.c();
    if (projector != nullptr) {
        detail::require(projector->output_dim() == model.q(), ErrorKind::ProjectorDimensionMismatch,
                        "projector rows do not match model outputs");
        Cout = projector->basis.transpose() * model.c();
    }
    const Index q = Cout.rows();

    // Stencil plants are sparse; stepping them densely would dominate the run.
    const bool sparse = static_cast<double>((model.a().array() != 0.0).count()) < 0.25 * static_cast<double>(n * n);
    Eigen::SparseMatrix<double> As;
    if (sparse) As = model.a().sparseView();

    std::vector<double> window(static_cast<std::size_t>(L));
    for (Index i = 0; i < L; ++i)
        window[static_cast<std::size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (L - 1));

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(-0.5, 0.5);

    // Ring buffers of the latest L samples, one row per channel.
    Matrix ubuf = Matrix::Zero(p, L);
    Matrix ybuf = Matrix::Zero(q, L);
    std::vector<Eigen::MatrixXcd> Suu(static_cast<std::size_t>(half), Eigen::MatrixXcd::Zero(p, p));
    std::vector<Eigen::MatrixXcd> Syu(static_cast<std::size_t>(half), Eigen::MatrixXcd::Zero(q, p));
    std::vector<Vector> Syy(static_cast<std::size_t>(half), Vector::Zero(q));

    Eigen::FFT<double> fft;
    std::vector<double> seg(static_cast<std::size_t>(L));
    std::vector<Complex> spec;
    Eigen::MatrixXcd U(p, half), Y(q, half);
    auto transform_row = [&](const Matrix& buf, Index row, Index start, Eigen::MatrixXcd& dst) {
        for (Index i = 0; i < L; ++i)
            seg[static_cast<std::size_t>(i)] = window[static_cast<std::size_t>(i)] * buf(row, (start + i) % L);
        fft.fwd(spec, seg);
        for (Index k = 0; k < half; ++k) dst(row, k) = spec[static_cast<std::size_t>(k + 1)];
    };

    Vector x = Vector::Zero(n), next(n), u(p);
    for (long t = 0; t < K; ++t) {
        for (Index j = 0; j < p; ++j) u(j) = uniform(rng);
        const Index slot = static_cast<Index>(t % L);
        ubuf.col(slot) = u;
        ybuf.col(slot).noalias() = Cout * x;
        if (sparse)
            next.noalias() = As * x;
        else
            next.noalias() = model.a() * x;
        next.noalias() += model.b() * u;
        x.swap(next);

        if (t + 1 >= L && (t + 1 - L) % half == 0) {
            const Index start = static_cast<Index>((t + 1) % L);
            for (Index j = 0; j < p; ++j) transform_row(ubuf, j, start, U);
            for (Index i = 0; i < q; ++i) transform_row(ybuf, i, start, Y);
            for (Index k = 0; k < half; ++k) {
                const std::size_t kk = static_cast<std::size_t>(k);
                Suu[kk] += U.col(k) * U.col(k).adjoint();
                Syu[kk] += Y.col(k) * U.col(k).adjoint();
                Syy[kk] += Y.col(k).cwiseAbs2();
            }
        }
    }

    FrequencySweep sweep;
    for (Index k = 0; k < half; ++k) {
        const std::size_t kk = static_cast<std::size_t>(k);
        sweep.frequencies.push_back(2.0 * std::numbers::pi * static_cast<double>(k + 1) / static_cast<double>(L));
        const Eigen::MatrixXcd H = Suu[kk].transpose().fullPivLu().solve(Syu[kk].transpose()).transpose();
        sweep.gains.push_back(Eigen::JacobiSVD<Eigen::MatrixXcd>(H).singularValues()(0));
        double coh = 0.0;
        if (p == 1) {
            const double suu = Suu[kk](0, 0).real();
            int counted = 0;
            for (Index i = 0; i < q; ++i) {
                if (Syy[kk](i) <= 0.0) continue;
                coh += std::norm(Syu[kk](i, 0)) / (suu * Syy[kk](i));
                ++counted;
            }
            coh = counted > 0 ? coh / counted : 0.0;
        } else {
            coh = std::numeric_limits<double>::quiet_NaN();
        }
        sweep.coherence.push_back(coh);
    }
    return sweep;
}

// Comparison tables (CSV rows) across methods and orders.

struct ErrorRow {
    std::string method;
    Index order = 0;
    double h2 = 0.0;
    double lower_bound = 0.0;
    bool truncation_warning = false;
};

struct GramianTableRow {
    std::string method;
    Index order = 0;
    GramianDiagonalRow row;
};

struct TraceRow {
    std::string method;
    Index order = 0;
    long k = 0;
    double a1 = 0.0;
};

struct SigmaRow {
    std::string method;
    Index order = 0;
    double omega = 0.0;
    double gain = 0.0;
};

struct ComparisonReport {
    std::vector<ErrorRow> errors;
    std::vector<GramianTableRow> gramians;
    std::vector<TraceRow> traces;
    std::vector<SigmaRow> sigma;
};

struct CompareOptions {
    long horizon = 0;     ///< impulse horizon; 0 picks one from the tail criterion
    long trace_len = 0;   ///< samples of a1 to emit; 0 emits the whole horizon
    std::vector<double> frequencies = log_frequencies(1e-3, std::numbers::pi, 100);
    std::vector<Index> orders;  ///< empty keeps every model
};

/// Error-vs-order, Gramian diagonals, a1 traces and sigma sweeps for a set of
/// reduced models sharing one output projector. Reduced outputs are lifted
/// by Theta before comparison with the full output.
inline ComparisonReport compare_models(const StateSpaceModel& full_model, const std::vector<ReducedModel>& reduced,
                                       const OutputProjector* projector, const CompareOptions& opts = {}) {
    ComparisonReport rep;
    const long K = opts.horizon > 0 ? opts.horizon : impulse_horizon(full_model);
    const long trace_len = opts.trace_len > 0 ? std::min(opts.trace_len, K) : K;
    const ImpulseTrace full = impulse_trace(full_model, K);
    const ImpulseTrace full_projected = projector ? impulse_trace(full_model, K, projector) : full;
    const double lower = projector ? lower_bound_error(full_model, *projector, K) : 0.0;

    for (long k = 0; k < trace_len; ++k)
        rep.traces.push_back({"full", 0, k, full_projected.outputs[static_cast<std::size_t>(k)](0, 0)});
    const FrequencySweep full_sweep = frequency_response(full_model, opts.frequencies, projector);
    for (std::size_t i = 0; i < full_sweep.gains.size(); ++i)
        rep.sigma.push_back({"full", 0, full_sweep.frequencies[i], full_sweep.gains[i]});

    for (const ReducedModel& red : reduced) {
        if (!opts.orders.empty() &&
            std::find(opts.orders.begin(), opts.orders.end(), red.r()) == opts.orders.end())
            continue;
        const std::string method = to_string(red.method);
        ImpulseTrace tr = impulse_trace(red, K);
        const ImpulseTrace lifted = projector ? lift(tr, *projector) : tr;
        const ErrorNorm err = h2_error(full, lifted);
        rep.errors.push_back({method, red.r(), err.value, lower, err.truncation_warning});
        for (long k = 0; k < trace_len; ++k)
            rep.traces.push_back({method, red.r(), k, tr.outputs[static_cast<std::size_t>(k)](0, 0)});

        // Galerkin models need not be stable; report their diagonals as NaN.
        try {
            for (const GramianDiagonalRow& row : gramian_diagonals_report(red))
                rep.gramians.push_back({method, red.r(), row});
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::UnstableSystem) throw;
            const double nan = std::numeric_limits<double>::quiet_NaN();
            for (Index i = 0; i < red.r(); ++i)
                rep.gramians.push_back({method, red.r(), {i + 1, i < red.hsv.size() ? red.hsv(i) : nan, nan, nan}});
        }
        try {
            const FrequencySweep sw = frequency_response(red, opts.frequencies);
            for (std::size_t i = 0; i < sw.gains.size(); ++i)
                rep.sigma.push_back({method, red.r(), sw.frequencies[i], sw.gains[i]});
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::SingularResolvent) throw;
        }
    }
    return rep;
}

}  // namespace erapod
