#pragma once

// Independent numerical cross-checks for the analytic pipeline:
//
//  * a Monte Carlo integrator for the linear fluctuation SDE in the doubled
//    phase space, with Welch (Hann, 50% overlap) spectral estimation, and
//  * a companion-matrix root finder for the steady-state cubic that shares no
//    code with model.hpp.
//
// The SDE oracle validates F(w) only; it never touches the nonlinear dynamics.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/random/normal_distribution.hpp>

#include "kerrshg/errors.hpp"
#include "kerrshg/model.hpp"
#include "kerrshg/parallel.hpp"
#include "kerrshg/spectra.hpp"

namespace kerrshg {

struct OracleConfig {
    /// Per-photon nonlinearity kappa^2/(2 gamma_a gamma_b). Scales the physical
    /// noise; estimates are reported divided by it.
    double g0_sq = 1.0;
    double dt = 1e-3;
    /// Sampled horizon of each trajectory (after any burn-in).
    double t_total = 1000.0;
    /// Welch segment duration.
    double segment_length = 100.0;
    int n_traj = 64;
    std::uint64_t seed = 42;
    std::vector<double> omega_grid;
    /// Draw the initial state from the exact stationary distribution. When off,
    /// trajectories start at the fixed point and need burn_in >= 50 / |max Re k|.
    bool stationary_start = true;
    double burn_in = 0.0;
    /// Integrator steps per spectral sample; 0 picks the largest stride with
    /// stride * dt * max|w| <= 0.1.
    int sample_stride = 0;
};

/// Ensemble estimate of F(w). Per-trajectory Welch averages are kept so the
/// standard error of any linear functional of F comes out right.
struct OuSpectrumEstimate {
    std::vector<double> omegas;
    std::vector<std::vector<Matrix4c>> per_trajectory;  ///< [trajectory][omega index]
    std::size_t segments_per_trajectory = 0;

    [[nodiscard]] std::size_t trajectories() const { return per_trajectory.size(); }
    [[nodiscard]] std::size_t total_segments() const {
        return segments_per_trajectory * per_trajectory.size();
    }

    struct Stat {
        double mean = 0.0;
        double std_error = 0.0;
    };

    /// Mean and standard error over trajectories of fn(F_hat) at omega index w.
    template <typename Fn>
    [[nodiscard]] Stat statistic(std::size_t w, Fn&& fn) const {
        const auto count = static_cast<double>(per_trajectory.size());
        double sum = 0.0;
        for (const auto& traj : per_trajectory) sum += fn(traj[w]);
        const double mean = sum / count;
        double ss = 0.0;
        for (const auto& traj : per_trajectory) {
            const double d = fn(traj[w]) - mean;
            ss += d * d;
        }
        const double var = count > 1.0 ? ss / (count - 1.0) : 0.0;
        return {mean, std::sqrt(var / count)};
    }

    [[nodiscard]] Matrix4c mean(std::size_t w) const {
        Matrix4c m = Matrix4c::Zero();
        for (const auto& traj : per_trajectory) m += traj[w];
        return m / static_cast<double>(per_trajectory.size());
    }
};

namespace detail {

using Matrix8d = Eigen::Matrix<double, 8, 8>;
using Vector8d = Eigen::Matrix<double, 8, 1>;

inline Matrix8d realify(const Matrix4c& A) {
    Matrix8d out;
    out.topLeftCorner<4, 4>() = A.real();
    out.topRightCorner<4, 4>() = -A.imag();
    out.bottomLeftCorner<4, 4>() = A.imag();
    out.bottomRightCorner<4, 4>() = A.real();
    return out;
}

/// Solves A S + S A^T + Q = 0 through the Kronecker form.
inline Matrix8d lyapunov(const Matrix8d& A, const Matrix8d& Q) {
    using Big = Eigen::Matrix<double, 64, 64>;
    const Matrix8d I = Matrix8d::Identity();
    Big K;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) K.block<8, 8>(8 * i, 8 * j) = A(i, j) * I + (i == j ? A : Matrix8d::Zero());
    // vec is column-major: vec(A S + S A^T) = (I (x) A + A (x) I) vec(S)
    Eigen::Matrix<double, 64, 1> q = -Eigen::Map<const Eigen::Matrix<double, 64, 1>>(Q.data());
    Eigen::Matrix<double, 64, 1> s = K.partialPivLu().solve(q);
    Matrix8d S = Eigen::Map<Matrix8d>(s.data());
    return 0.5 * (S + S.transpose());
}

inline double oracle_noise_tolerance(double scale) { return 1e-12 * std::max(1.0, scale); }

}  // namespace detail

/// Euler-Maruyama step for dv = A v dt + B dW with two real Wiener channels:
/// sqrt(g0^2 D_aa) on the alpha channel and its conjugate on alpha+.
/// alpha+ evolves independently, it is not slaved to conj(alpha).
class EulerMaruyama {
public:
    EulerMaruyama(const LinearizedSystem& sys, double dt, double g0_sq = 1.0)
        : propagator_(Matrix4c::Identity() + dt * sys.drift),
          amplitude_(std::sqrt(g0_sq * sys.diffusion(kAlpha, kAlpha))), dt_(dt) {}

    /// dw1, dw2 are Wiener increments with variance dt.
    void step(Vector4c& v, double dw1, double dw2) const {
        v = (propagator_ * v).eval();
        v(kAlpha) += amplitude_ * dw1;
        v(kAlphaPlus) += std::conj(amplitude_) * dw2;
    }

    [[nodiscard]] cplx noise_amplitude() const { return amplitude_; }
    [[nodiscard]] double dt() const { return dt_; }

    /// Real 8x2 noise matrix in the (Re v, Im v) representation.
    [[nodiscard]] Eigen::Matrix<double, 8, 2> real_noise_matrix() const {
        Eigen::Matrix<double, 8, 2> B = Eigen::Matrix<double, 8, 2>::Zero();
        B(kAlpha, 0) = amplitude_.real();
        B(4 + kAlpha, 0) = amplitude_.imag();
        B(kAlphaPlus, 1) = amplitude_.real();
        B(4 + kAlphaPlus, 1) = -amplitude_.imag();
        return B;
    }

private:
    Matrix4c propagator_;
    cplx amplitude_;
    double dt_;
};

/// Samples the stationary law of the linear SDE (exact continuous-time covariance).
class StationarySampler {
public:
    StationarySampler(const LinearizedSystem& sys, double g0_sq) {
        const EulerMaruyama em(sys, 1.0, g0_sq);
        const auto B = em.real_noise_matrix();
        const detail::Matrix8d S =
            detail::lyapunov(detail::realify(sys.drift), B * B.transpose());
        const Eigen::SelfAdjointEigenSolver<detail::Matrix8d> eig(S);
        const detail::Vector8d root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        factor_ = eig.eigenvectors() * root.asDiagonal();
        covariance_ = S;
    }

    template <typename Rng>
    [[nodiscard]] Vector4c sample(Rng& rng) const {
        boost::random::normal_distribution<double> normal;
        detail::Vector8d z;
        for (int i = 0; i < 8; ++i) z(i) = normal(rng);
        const detail::Vector8d y = factor_ * z;
        Vector4c v;
        for (int i = 0; i < 4; ++i) v(i) = cplx(y(i), y(4 + i));
        return v;
    }

    [[nodiscard]] const detail::Matrix8d& covariance() const { return covariance_; }

private:
    detail::Matrix8d factor_;
    detail::Matrix8d covariance_;
};

/// Welch estimator of F(w) = lim E[X(w) X(-w)^T] / T at a few frequencies,
/// Hann window, 50% overlap, direct (non-FFT) transforms.
class WelchPeriodogram {
public:
    WelchPeriodogram(std::vector<double> omegas, double sample_interval, std::size_t segment_samples)
        : omegas_(std::move(omegas)), segment_(std::max<std::size_t>(segment_samples, 2) & ~std::size_t{1}),
          hop_(segment_ / 2) {
        const std::size_t nw = omegas_.size();
        twiddle_.resize(nw * segment_);
        w0_.assign(nw, cplx{});
        w1_.assign(nw, cplx{});
        detrend_.assign(nw, false);
        const double duration = static_cast<double>(segment_) * sample_interval;
        for (std::size_t f = 0; f < nw; ++f)
            detrend_[f] = std::abs(omegas_[f]) * duration >= 8.0 * std::numbers::pi;
        double window_energy = 0.0;
        for (std::size_t j = 0; j < segment_; ++j) {
            // periodic Hann
            const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(j) /
                                                  static_cast<double>(segment_));
            window_energy += w * w * sample_interval;
            const double t = static_cast<double>(j) * sample_interval;
            for (std::size_t f = 0; f < nw; ++f) {
                const cplx tw = std::polar(w * sample_interval, -omegas_[f] * t);
                twiddle_[f * segment_ + j] = tw;
                w0_[f] += tw;
                w1_[f] += static_cast<double>(j) * tw;
            }
        }
        norm_ = 1.0 / window_energy;
        sums_.assign(nw, Matrix4c::Zero());
    }

    void push(const Vector4c& v) {
        if (count_ % hop_ == 0) open_.push_back({count_, Accumulators(omegas_.size())});
        for (auto& seg : open_) {
            const std::size_t j = count_ - seg.start;
            seg.acc.s0 += v;
            seg.acc.s1 += static_cast<double>(j) * v;
            for (std::size_t f = 0; f < omegas_.size(); ++f) {
                const cplx tw = twiddle_[f * segment_ + j];
                for (int c = 0; c < 4; ++c) {
                    seg.acc.re[f](c) += v(c).real() * tw;
                    seg.acc.im[f](c) += v(c).imag() * tw;
                }
            }
        }
        ++count_;
        if (!open_.empty() && count_ - open_.front().start == segment_) {
            close(open_.front().acc);
            open_.erase(open_.begin());
        }
    }

    [[nodiscard]] std::size_t segments() const { return closed_; }

    /// Average periodogram per frequency over the completed segments.
    [[nodiscard]] std::vector<Matrix4c> average() const {
        std::vector<Matrix4c> out(sums_.size(), Matrix4c::Zero());
        if (closed_ == 0) return out;
        for (std::size_t f = 0; f < sums_.size(); ++f) out[f] = sums_[f] / static_cast<double>(closed_);
        return out;
    }

private:
    struct Accumulators {
        explicit Accumulators(std::size_t nw) : re(nw, Vector4c::Zero()), im(nw, Vector4c::Zero()) {}
        std::vector<Vector4c> re;  ///< sum of w Re(v) e^{-i w t}
        std::vector<Vector4c> im;  ///< sum of w Im(v) e^{-i w t}
        Vector4c s0 = Vector4c::Zero();  ///< sum of v
        Vector4c s1 = Vector4c::Zero();  ///< sum of j v
    };
    struct Open {
        std::size_t start;
        Accumulators acc;
    };

    // Probes clear of the window main lobe see each segment with its
    // least-squares line v ~ a + b j removed. Without it the barely damped modes
    // (rates far below the probe frequencies) leak through the window sidelobes
    // and swamp small spectra. Probes near w = 0 keep the raw transform.
    void close(const Accumulators& acc) {
        const cplx i(0.0, 1.0);
        const double N = static_cast<double>(segment_);
        const double sj = N * (N - 1.0) / 2.0;
        const double sjj = (N - 1.0) * N * (2.0 * N - 1.0) / 6.0;
        const Vector4c b = (N * acc.s1 - sj * acc.s0) / (N * sjj - sj * sj);
        const Vector4c a = (acc.s0 - sj * b) / N;
        for (std::size_t f = 0; f < sums_.size(); ++f) {
            Vector4c re = acc.re[f];
            Vector4c im = acc.im[f];
            if (detrend_[f]) {
                re -= a.real().cast<cplx>() * w0_[f] + b.real().cast<cplx>() * w1_[f];
                im -= a.imag().cast<cplx>() * w0_[f] + b.imag().cast<cplx>() * w1_[f];
            }
            const Vector4c plus = re + i * im;                        // X(w)
            const Vector4c minus = re.conjugate() + i * im.conjugate();  // X(-w)
            sums_[f] += norm_ * plus * minus.transpose();
        }
        ++closed_;
    }

    std::vector<double> omegas_;
    std::size_t segment_;
    std::size_t hop_;
    std::vector<cplx> twiddle_;
    std::vector<cplx> w0_;  ///< window transform of 1
    std::vector<cplx> w1_;  ///< window transform of j
    std::vector<bool> detrend_;
    double norm_ = 1.0;
    std::vector<Matrix4c> sums_;
    std::vector<Open> open_;
    std::size_t count_ = 0;
    std::size_t closed_ = 0;
};

/// Resolved sampling plan for one oracle run (after validation).
struct OraclePlan {
    std::size_t burn_steps = 0;
    std::size_t steps = 0;
    std::size_t stride = 1;
    std::size_t segment_samples = 0;
    double correlation_time = 0.0;
};

/// Longest relaxation time that matters at the probe frequencies. Modes relaxing
/// slower than a tenth of the lowest positive probe frequency are quasi-static
/// at every probe, so they only count when w = 0 is probed.
inline double oracle_correlation_time(const Matrix4c& drift, const std::vector<double>& omegas) {
    const Eigen::ComplexEigenSolver<Matrix4c> solver(drift, false);
    double w_lo = std::numeric_limits<double>::infinity();
    for (double w : omegas) w_lo = std::min(w_lo, std::abs(w));
    double slowest = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 4; ++i) {
        const double rate = std::abs(solver.eigenvalues()(i).real());
        if (w_lo > 0.0 && rate < 0.1 * w_lo) continue;
        slowest = std::min(slowest, rate);
    }
    return std::isfinite(slowest) ? 1.0 / slowest : 0.0;
}

/// Default Welch segment length: 24 correlation times, and at least 32 periods of
/// the lowest positive probe so the window's smoothing bias stays small.
inline double suggested_segment_length(const Matrix4c& drift, const std::vector<double>& omegas) {
    double length = std::max(24.0 * oracle_correlation_time(drift, omegas), 10.0);
    double w_lo = std::numeric_limits<double>::infinity();
    for (double w : omegas)
        if (w != 0.0) w_lo = std::min(w_lo, std::abs(w));
    if (std::isfinite(w_lo)) length = std::max(length, 64.0 * std::numbers::pi / w_lo);
    return length;
}

/// Checks the Monte Carlo controls against the drift spectrum and returns the plan.
inline OraclePlan plan_oracle(const LinearizedSystem& sys, const OracleConfig& cfg) {
    detail::require(cfg.g0_sq > 0.0, "g0_sq must be positive");
    detail::require(cfg.dt > 0.0 && std::isfinite(cfg.dt), "dt must be positive");
    detail::require(cfg.t_total > 0.0 && std::isfinite(cfg.t_total), "t_total must be positive");
    detail::require(cfg.segment_length > 0.0 && std::isfinite(cfg.segment_length),
                    "segment_length must be positive");
    detail::require(cfg.n_traj >= 2, "need at least two trajectories for a standard error");
    detail::require(!cfg.omega_grid.empty(), "omega grid must not be empty");
    detail::require(cfg.burn_in >= 0.0, "burn_in must be non-negative");
    detail::require(cfg.sample_stride >= 0, "sample_stride must be non-negative");
    for (double w : cfg.omega_grid) detail::require(std::isfinite(w), "omega grid must be finite");

    const Eigen::ComplexEigenSolver<Matrix4c> solver(sys.drift, false);
    const auto& k = solver.eigenvalues();
    const double max_re = k.real().maxCoeff();
    if (!(max_re < 0.0))
        throw UnstableSystem("oracle needs a stable fixed point (max Re eigenvalue " +
                             std::to_string(max_re) + ")");
    const double fastest = k.cwiseAbs().maxCoeff();
    if (cfg.dt > 0.01 / std::max(1.0, fastest))
        throw ConfigTooCoarse("dt must be <= 0.01 / max(1, |k|max) = " +
                              std::to_string(0.01 / std::max(1.0, fastest)));
    if (!cfg.stationary_start && cfg.burn_in < 50.0 / std::abs(max_re))
        throw ConfigTooCoarse("burn_in must be >= 50 / |max Re k| = " + std::to_string(50.0 / std::abs(max_re)));

    OraclePlan plan;
    plan.correlation_time = oracle_correlation_time(sys.drift, cfg.omega_grid);
    if (cfg.segment_length < 20.0 * plan.correlation_time)
        throw ConfigTooCoarse("segment_length must cover 20 correlation times (" +
                              std::to_string(20.0 * plan.correlation_time) + ")");
    if (cfg.t_total < cfg.segment_length)
        throw ConfigTooCoarse("t_total must hold at least one segment");

    double w_hi = 0.0;
    for (double w : cfg.omega_grid) w_hi = std::max(w_hi, std::abs(w));
    if (cfg.sample_stride > 0) {
        plan.stride = static_cast<std::size_t>(cfg.sample_stride);
        if (static_cast<double>(plan.stride) * cfg.dt * w_hi > 0.25)
            throw ConfigTooCoarse("spectral sampling interval aliases the highest probe frequency");
    } else if (w_hi > 0.0) {
        plan.stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(0.1 / (cfg.dt * w_hi))));
    } else {
        plan.stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(0.01 / cfg.dt)));
    }
    plan.burn_steps = cfg.stationary_start ? 0 : static_cast<std::size_t>(std::ceil(cfg.burn_in / cfg.dt));
    plan.steps = static_cast<std::size_t>(std::llround(cfg.t_total / cfg.dt));
    plan.segment_samples = static_cast<std::size_t>(
        std::llround(cfg.segment_length / (cfg.dt * static_cast<double>(plan.stride))));
    return plan;
}

/// Independent random stream for trajectory `index`; identical across schedulings.
inline std::mt19937_64 trajectory_stream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

/// Monte Carlo estimate of the stationary spectrum matrix F(w) on cfg.omega_grid,
/// normalized by g0^2 so it is directly comparable with spectrum_matrix().
inline OuSpectrumEstimate simulate_linear_ou(const LinearizedSystem& sys, const OracleConfig& cfg) {
    const OraclePlan plan = plan_oracle(sys, cfg);
    const EulerMaruyama stepper(sys, cfg.dt, cfg.g0_sq);
    const StationarySampler sampler(sys, cfg.g0_sq);
    const double sample_interval = cfg.dt * static_cast<double>(plan.stride);
    const double sqrt_dt = std::sqrt(cfg.dt);

    OuSpectrumEstimate out;
    out.omegas = cfg.omega_grid;
    std::vector<std::size_t> segments(static_cast<std::size_t>(cfg.n_traj));
    out.per_trajectory = parallel_map(static_cast<std::size_t>(cfg.n_traj), [&](std::size_t t) {
        auto rng = trajectory_stream(cfg.seed, t);
        boost::random::normal_distribution<double> normal;
        Vector4c v = cfg.stationary_start ? sampler.sample(rng) : Vector4c::Zero();
        for (std::size_t s = 0; s < plan.burn_steps; ++s) {
            const double w1 = normal(rng);
            const double w2 = normal(rng);
            stepper.step(v, sqrt_dt * w1, sqrt_dt * w2);
        }
        WelchPeriodogram welch(cfg.omega_grid, sample_interval, plan.segment_samples);
        for (std::size_t s = 1; s <= plan.steps; ++s) {
            const double w1 = normal(rng);
            const double w2 = normal(rng);
            stepper.step(v, sqrt_dt * w1, sqrt_dt * w2);
            if (s % plan.stride == 0) welch.push(v);
        }
        segments[t] = welch.segments();
        auto avg = welch.average();
        for (auto& m : avg) m /= cfg.g0_sq;
        return avg;
    });
    out.segments_per_trajectory = segments.empty() ? 0 : *std::min_element(segments.begin(), segments.end());
    return out;
}

/// One analytic-vs-Monte-Carlo comparison.
struct OracleComparison {
    double omega = 0.0;
    std::string quantity;
    double analytic = 0.0;
    double estimate = 0.0;
    double std_error = 0.0;
    double z = 0.0;
};

/// z-scores of the quantities the squeezing spectra are built from, per mode:
/// Re U (symmetrized self spectrum), Re V and Im V (anomalous spectrum).
inline std::vector<OracleComparison> compare_with_analytic(const LinearizedSystem& sys,
                                                           const OuSpectrumEstimate& est) {
    const SpectrumMatrix analytic(sys);
    std::vector<OracleComparison> out;
    for (std::size_t w = 0; w < est.omegas.size(); ++w) {
        const Matrix4c F = analytic(est.omegas[w]);
        for (Mode mode : {Mode::Fundamental, Mode::Harmonic}) {
            const std::string tag = mode == Mode::Fundamental ? "a" : "b";
            const ModeSpectra exact = mode_spectra(F, mode);
            struct Item {
                std::string name;
                double value;
                double (*pick)(const ModeSpectra&);
            };
            const Item items[] = {
                {"ReU_" + tag, exact.self.real(), [](const ModeSpectra& s) { return s.self.real(); }},
                {"ReV_" + tag, exact.anomalous.real(), [](const ModeSpectra& s) { return s.anomalous.real(); }},
                {"ImV_" + tag, exact.anomalous.imag(), [](const ModeSpectra& s) { return s.anomalous.imag(); }},
            };
            for (const auto& item : items) {
                const auto stat = est.statistic(w, [&](const Matrix4c& m) { return item.pick(mode_spectra(m, mode)); });
                OracleComparison c;
                c.omega = est.omegas[w];
                c.quantity = item.name;
                c.analytic = item.value;
                c.estimate = stat.mean;
                c.std_error = stat.std_error;
                const double diff = stat.mean - item.value;
                if (stat.std_error > 0.0) {
                    c.z = diff / stat.std_error;
                } else {
                    const double scale = std::max(std::abs(item.value), std::abs(stat.mean));
                    c.z = std::abs(diff) <= detail::oracle_noise_tolerance(scale)
                              ? 0.0
                              : std::copysign(std::numeric_limits<double>::infinity(), diff);
                }
                out.push_back(c);
            }
        }
    }
    return out;
}

/// All real non-negative photon numbers solving (1 + L^2) n^3 + 2 n^2 + n = |lambda|^2,
/// from the complex eigenvalues of the top-row companion matrix of the monic cubic.
inline std::vector<double> steady_state_oracle(cplx drive, double r, double lambda_kerr) {
    detail::require(std::isfinite(drive.real()) && std::isfinite(drive.imag()), "drive must be finite");
    detail::require(r > 0.0, "loss ratio r must be positive");
    detail::require(lambda_kerr >= 0.0, "Kerr strength must be non-negative");
    const double lead = 1.0 + lambda_kerr * lambda_kerr;
    Eigen::Matrix3cd C = Eigen::Matrix3cd::Zero();
    C(0, 0) = -2.0 / lead;
    C(0, 1) = -1.0 / lead;
    C(0, 2) = std::norm(drive) / lead;
    C(1, 0) = 1.0;
    C(2, 1) = 1.0;
    const Eigen::ComplexEigenSolver<Eigen::Matrix3cd> solver(C, false);
    std::vector<double> roots;
    for (int i = 0; i < 3; ++i) {
        const cplx z = solver.eigenvalues()(i);
        const double scale = std::max(1.0, std::abs(z));
        if (std::abs(z.imag()) < 1e-9 * scale && z.real() >= -1e-9 * scale)
            roots.push_back(std::max(0.0, z.real()));
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

}  // namespace kerrshg
