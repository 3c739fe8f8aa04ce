#pragma once

// Linearized quantum-noise spectra of the output fields.
//
// The fluctuations obey d(dv) = A dv dtau + B dW with B B^T = D in the doubled
// (positive-P) phase space. The stationary spectrum matrix is
//
//   F(w) = (i w - A)^-1 D (-i w - A^T)^-1,
//
// and for a mode with self block (i, j) the normally ordered self spectrum is
// U = (F_ij + F_ji)/2 and the anomalous spectrum is V = F_ii. The output
// quadrature X = a e^{-i theta} + a^+ e^{i theta} then has
//
//   S_theta(w) = 1 + c_mode (Re U + Re(e^{-2 i theta} V)),
//
// in vacuum units, extremal at S_-/S_+ = 1 + c_mode (Re U -/+ |V|).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "kerrshg/errors.hpp"
#include "kerrshg/model.hpp"
#include "kerrshg/parallel.hpp"

namespace kerrshg {

enum class Mode { Fundamental, Harmonic };

inline const char* to_string(Mode m) {
    return m == Mode::Fundamental ? "fundamental" : "harmonic";
}

/// Output coupling in scaled variables (cavity loss times the alpha/beta
/// rescaling, with D normalized to unit g0^2). Pinned by the vacuum limit and
/// the pure-SHG perfect-squeezing limits of both modes.
inline constexpr double kFundamentalNoiseScale = 4.0;
inline constexpr double kHarmonicNoiseScale = 2.0;

inline double noise_scale(Mode m) {
    return m == Mode::Fundamental ? kFundamentalNoiseScale : kHarmonicNoiseScale;
}

struct LinearizedSystem {
    Matrix4c drift;      ///< A
    Matrix4c diffusion;  ///< D
};

struct SqueezePoint {
    double omega = 0.0;
    double s_minus = 1.0;
    double s_plus = 1.0;
    double theta_opt = 0.0;  ///< in [0, pi)
    Mode mode = Mode::Fundamental;
    /// Imaginary part dropped from the symmetrized self spectrum (should be rounding only).
    double imag_residual = 0.0;

    [[nodiscard]] double s_minus_db() const { return 10.0 * std::log10(s_minus); }
    [[nodiscard]] double s_plus_db() const { return 10.0 * std::log10(s_plus); }
};

struct OptimalSqueezing {
    double omega_m = 0.0;
    SqueezePoint point;
};

/// Generalized-P diffusion of the linearized fluctuations: only the alpha-alpha
/// and alpha+-alpha+ entries survive.
inline Matrix4c diffusion_matrix(const FixedPoint& fp, double lambda_kerr) {
    const cplx i(0.0, 1.0);
    const cplx d = fp.beta - i * lambda_kerr * fp.alpha * fp.alpha;
    Matrix4c D = Matrix4c::Zero();
    D(kAlpha, kAlpha) = d;
    D(kAlphaPlus, kAlphaPlus) = std::conj(d);
    return D;
}

inline LinearizedSystem linearize(const FixedPoint& fp, double r, double lambda_kerr) {
    return {jacobian(fp, r, lambda_kerr), diffusion_matrix(fp, lambda_kerr)};
}

inline double max_real_eigenvalue(const Matrix4c& A) {
    const Eigen::ComplexEigenSolver<Matrix4c> solver(A, false);
    return solver.eigenvalues().real().maxCoeff();
}

/// Evaluates F(w) repeatedly for one system; the Hurwitz check runs once.
class SpectrumMatrix {
public:
    explicit SpectrumMatrix(LinearizedSystem sys) : sys_(std::move(sys)) {
        const double m = max_real_eigenvalue(sys_.drift);
        if (!(m < 0.0))
            throw UnstableSystem("drift matrix is not Hurwitz (max Re eigenvalue " +
                                 std::to_string(m) + "); spectrum requested at or above the Hopf point");
    }

    [[nodiscard]] Matrix4c operator()(double omega) const {
        const cplx iw(0.0, omega);
        const Matrix4c I = Matrix4c::Identity();
        const Eigen::FullPivLU<Matrix4c> left(iw * I - sys_.drift);
        const Eigen::FullPivLU<Matrix4c> right(-iw * I - sys_.drift);
        if (!left.isInvertible() || !right.isInvertible())
            throw SingularMatrix("resolvent is singular at omega = " + std::to_string(omega));
        // X = L (-iw - A^T)^-1 with L = (iw - A)^-1 D, i.e. (-iw - A) X^T = L^T
        const Matrix4c left_part = left.solve(sys_.diffusion);
        return right.solve(left_part.transpose()).transpose();
    }

    [[nodiscard]] const LinearizedSystem& system() const { return sys_; }

private:
    LinearizedSystem sys_;
};

inline Matrix4c spectrum_matrix(const LinearizedSystem& sys, double omega) {
    return SpectrumMatrix(sys)(omega);
}

/// Normally ordered self (U, Hermitian-symmetrized) and anomalous (V) spectra of a mode.
struct ModeSpectra {
    cplx self;
    cplx anomalous;
};

inline ModeSpectra mode_spectra(const Matrix4c& F, Mode mode) {
    const int a = mode == Mode::Fundamental ? kAlpha : kBeta;
    const int ap = a + 1;
    return {0.5 * (F(ap, a) + F(a, ap)), F(a, a)};
}

/// Noise of the quadrature at angle theta, X = a e^{-i theta} + a^+ e^{i theta}.
inline double quadrature_noise(const ModeSpectra& s, Mode mode, double theta) {
    const cplx rot = std::polar(1.0, -2.0 * theta);
    return 1.0 + noise_scale(mode) * (s.self.real() + (rot * s.anomalous).real());
}

inline SqueezePoint squeeze_point(const ModeSpectra& s, Mode mode, double omega) {
    SqueezePoint p;
    p.omega = omega;
    p.mode = mode;
    const double c = noise_scale(mode);
    const double v = std::abs(s.anomalous);
    p.s_minus = 1.0 + c * (s.self.real() - v);
    p.s_plus = 1.0 + c * (s.self.real() + v);
    // e^{-2 i theta} V = -|V|
    double theta = 0.5 * (std::arg(s.anomalous) + std::numbers::pi);
    theta = std::fmod(theta, std::numbers::pi);
    if (theta < 0.0) theta += std::numbers::pi;
    p.theta_opt = theta;
    p.imag_residual = std::abs(s.self.imag());
    return p;
}

/// Phase-optimized squeezing spectrum of one mode at one fixed point.
class SqueezingSpectrum {
public:
    SqueezingSpectrum(const FixedPoint& fp, double r, double lambda_kerr, Mode mode)
        : spectrum_(linearize(fp, r, lambda_kerr)), mode_(mode), n_(fp.n),
          r_(r), lambda_kerr_(lambda_kerr) {}

    [[nodiscard]] SqueezePoint at(double omega) const {
        return squeeze_point(mode_spectra(spectrum_(omega), mode_), mode_, omega);
    }

    /// Minimizes S_-(w) over w >= 0: grid scan with step 0.05 on
    /// [0, max(10, 3 Lambda n, 3 (1 + r))], then golden-section to |dw| < 1e-6.
    [[nodiscard]] OptimalSqueezing optimize(double step = 0.05, double tol = 1e-6) const {
        const double upper = std::max({10.0, 3.0 * lambda_kerr_ * n_, 3.0 * (1.0 + r_)});
        const auto count = static_cast<std::size_t>(std::ceil(upper / step));
        std::size_t best = 0;
        double best_val = at(0.0).s_minus;
        for (std::size_t k = 1; k <= count; ++k) {
            const double v = at(static_cast<double>(k) * step).s_minus;
            if (v < best_val) {
                best_val = v;
                best = k;
            }
        }
        double lo = best == 0 ? 0.0 : static_cast<double>(best - 1) * step;
        double hi = static_cast<double>(best + 1) * step;

        const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double x1 = hi - inv_phi * (hi - lo);
        double x2 = lo + inv_phi * (hi - lo);
        double f1 = at(x1).s_minus;
        double f2 = at(x2).s_minus;
        while (hi - lo > tol) {
            if (f1 < f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = at(x1).s_minus;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = at(x2).s_minus;
            }
        }
        double omega = 0.5 * (lo + hi);
        SqueezePoint p = at(omega);
        // the scan point itself can beat the refined interior (e.g. a minimum at w = 0)
        const double grid_omega = static_cast<double>(best) * step;
        if (best_val <= p.s_minus) {
            omega = grid_omega;
            p = at(omega);
        }
        return {omega, p};
    }

    [[nodiscard]] Mode mode() const { return mode_; }

private:
    SpectrumMatrix spectrum_;
    Mode mode_;
    double n_;
    double r_;
    double lambda_kerr_;
};

inline SqueezePoint quadrature_spectra(const FixedPoint& fp, double r, double lambda_kerr,
                                       double omega, Mode mode) {
    return SqueezingSpectrum(fp, r, lambda_kerr, mode).at(omega);
}

inline OptimalSqueezing optimal_frequency(const FixedPoint& fp, double r, double lambda_kerr,
                                          Mode mode) {
    return SqueezingSpectrum(fp, r, lambda_kerr, mode).optimize();
}

struct SweepRow {
    double n = 0.0;
    Stability stability = Stability::Stable;
    Efficiencies eta;
    std::optional<OptimalSqueezing> squeezing;  ///< empty unless the point is stable
};

/// One row per photon number; spectra only where the fixed point is stable.
inline std::vector<SweepRow> sweep(const std::vector<double>& n_grid, double r,
                                   double lambda_kerr, Mode mode,
                                   double tolerance = kDefaultStabilityTolerance) {
    detail::require(!n_grid.empty(), "photon-number grid must not be empty");
    for (double n : n_grid)
        detail::require(std::isfinite(n) && n >= 0.0, "photon numbers must be finite and non-negative");
    detail::require(r > 0.0, "loss ratio r must be positive");
    detail::require(lambda_kerr >= 0.0, "Kerr strength must be non-negative");

    return parallel_map(n_grid.size(), [&](std::size_t i) {
        SweepRow row;
        row.n = n_grid[i];
        const FixedPoint fp = fixed_point_for_photon_number(row.n, r, lambda_kerr, tolerance);
        row.stability = fp.stability;
        row.eta = efficiencies(row.n, lambda_kerr);
        if (fp.stability == Stability::Stable) {
            try {
                row.squeezing = optimal_frequency(fp, r, lambda_kerr, mode);
            } catch (const UnstableSystem&) {
                row.stability = Stability::Marginal;
            } catch (const SingularMatrix&) {
                row.stability = Stability::Marginal;
            }
        }
        return row;
    });
}

}  // namespace kerrshg
