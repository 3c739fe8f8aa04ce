#pragma once

// Scaled deterministic dynamics of the doubly resonant second-harmonic cavity
// with an added Kerr term:
//
//   d(alpha)/dtau     = -alpha + beta alpha* - i Lambda alpha* alpha^2 + lambda
//   (1/r) d(beta)/dtau = -beta - alpha^2
//
// Time is measured in units of 1/gamma_a, r = gamma_b/gamma_a and Lambda is the
// scaled Kerr strength. Everything here is a pure function of its arguments.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "kerrshg/errors.hpp"

namespace kerrshg {

using cplx = std::complex<double>;
using Matrix4c = Eigen::Matrix<cplx, 4, 4>;
using Vector4c = Eigen::Matrix<cplx, 4, 1>;

/// Fluctuation basis order used by every 4x4 matrix in the library.
enum Basis : int { kAlpha = 0, kAlphaPlus = 1, kBeta = 2, kBetaPlus = 3 };

inline constexpr double kDefaultStabilityTolerance = 1e-9;

struct CavityParams {
    double r = 1.0;            ///< gamma_b / gamma_a
    double lambda_kerr = 0.0;  ///< scaled Kerr strength Lambda
    cplx drive{0.0, 0.0};      ///< scaled pump amplitude lambda

    void validate() const {
        detail::require(std::isfinite(r) && r > 0.0, "loss ratio r must be positive");
        detail::require(std::isfinite(lambda_kerr) && lambda_kerr >= 0.0,
                        "Kerr strength must be non-negative");
        detail::require(std::isfinite(drive.real()) && std::isfinite(drive.imag()),
                        "drive amplitude must be finite");
    }
};

enum class Stability { Stable, Marginal, Unstable };

inline const char* to_string(Stability s) {
    switch (s) {
        case Stability::Stable: return "stable";
        case Stability::Marginal: return "marginal";
        case Stability::Unstable: return "unstable";
    }
    return "?";
}

/// Closed-form spectrum of the linearized drift. g is complex once 3 Lambda^2 > 1.
struct EigenSet {
    std::array<cplx, 4> k{};
    cplx g{};

    [[nodiscard]] double max_real() const {
        double m = -std::numeric_limits<double>::infinity();
        for (const auto& v : k) m = std::max(m, v.real());
        return m;
    }
};

struct FixedPoint {
    cplx alpha{};
    cplx beta{};  ///< always -alpha^2
    double n = 0.0;
    std::array<cplx, 4> eigenvalues{};
    Stability stability = Stability::Stable;

    [[nodiscard]] double max_real_eigenvalue() const {
        double m = -std::numeric_limits<double>::infinity();
        for (const auto& v : eigenvalues) m = std::max(m, v.real());
        return m;
    }
};

struct Efficiencies {
    double eta_a = 1.0;  ///< fundamental output / input power
    double eta_b = 0.0;  ///< harmonic output / input power
};

/// Intracavity photon number at the Hopf bifurcation; +infinity once the Kerr
/// term fully stabilizes the cavity (3 Lambda^2 >= 1).
inline double critical_photon_number(double r, double lambda_kerr) {
    detail::require(r > 0.0, "loss ratio r must be positive");
    detail::require(lambda_kerr >= 0.0, "Kerr strength must be non-negative");
    const double s = 1.0 - 3.0 * lambda_kerr * lambda_kerr;
    if (s <= 0.0) return std::numeric_limits<double>::infinity();
    return (r + 1.0) / std::sqrt(s);
}

/// |lambda| that produces photon number n. From beta = -alpha^2 the steady state
/// reads lambda = alpha (1 + n + i Lambda n).
inline double drive_for_photon_number(double n, double lambda_kerr) {
    detail::require(n >= 0.0, "photon number must be non-negative");
    const double a = 1.0 + n;
    const double b = lambda_kerr * n;
    return std::sqrt(n * (a * a + b * b));
}

inline EigenSet eigenvalues_closed_form(double n, double r, double lambda_kerr) {
    detail::require(n >= 0.0, "photon number must be non-negative");
    EigenSet out;
    out.g = n * std::sqrt(cplx(1.0 - 3.0 * lambda_kerr * lambda_kerr, 0.0));
    const cplx g = out.g;
    const cplx s1 = std::sqrt((-r + 1.0 - g) * (-r + 1.0 - g) - 8.0 * r * n);
    const cplx s2 = std::sqrt((-r + 1.0 + g) * (-r + 1.0 + g) - 8.0 * r * n);
    out.k[0] = (-r - 1.0 + g - s1) / 2.0;
    out.k[1] = (-r - 1.0 + g + s1) / 2.0;
    out.k[2] = (-r - 1.0 - g - s2) / 2.0;
    out.k[3] = (-r - 1.0 - g + s2) / 2.0;
    return out;
}

inline Stability classify_stability(double max_real_eigenvalue,
                                    double tolerance = kDefaultStabilityTolerance) {
    detail::require(tolerance > 0.0, "stability tolerance must be positive");
    if (max_real_eigenvalue < -tolerance) return Stability::Stable;
    if (max_real_eigenvalue > tolerance) return Stability::Unstable;
    return Stability::Marginal;
}

inline Stability classify_stability(const FixedPoint& fp, double r, double lambda_kerr,
                                    double tolerance = kDefaultStabilityTolerance) {
    return classify_stability(eigenvalues_closed_form(fp.n, r, lambda_kerr).max_real(),
                              tolerance);
}

namespace detail {

inline FixedPoint assemble_fixed_point(cplx alpha, double n, double r, double lambda_kerr,
                                       double tolerance) {
    FixedPoint fp;
    fp.alpha = alpha;
    fp.beta = -alpha * alpha;
    fp.n = n;
    const EigenSet eig = eigenvalues_closed_form(n, r, lambda_kerr);
    fp.eigenvalues = eig.k;
    fp.stability = classify_stability(eig.max_real(), tolerance);
    return fp;
}

}  // namespace detail

/// Full fixed point for a complex drive and the photon number it produces.
/// n is recomputed as |alpha|^2 so the invariant holds exactly.
inline FixedPoint make_fixed_point(cplx drive, double n, double r, double lambda_kerr,
                                   double tolerance = kDefaultStabilityTolerance) {
    const cplx alpha = drive / cplx(1.0 + n, lambda_kerr * n);
    return detail::assemble_fixed_point(alpha, std::norm(alpha), r, lambda_kerr, tolerance);
}

/// Fixed point on the real-drive gauge (lambda >= 0) with prescribed photon number.
inline FixedPoint fixed_point_for_photon_number(double n, double r, double lambda_kerr,
                                                double tolerance = kDefaultStabilityTolerance) {
    const double drive = drive_for_photon_number(n, lambda_kerr);
    const cplx alpha = drive / cplx(1.0 + n, lambda_kerr * n);
    return detail::assemble_fixed_point(alpha, n, r, lambda_kerr, tolerance);
}

namespace detail {

// Real roots of (1 + L^2) n^3 + 2 n^2 + n - |lambda|^2 from the eigenvalues of
// its Frobenius companion matrix, each polished by Newton on the cubic.
inline std::vector<double> photon_number_roots(double drive_sq, double lambda_kerr) {
    const double lead = 1.0 + lambda_kerr * lambda_kerr;
    const std::array<double, 3> c{-drive_sq / lead, 1.0 / lead, 2.0 / lead};  // c0, c1, c2

    Eigen::Matrix3d companion = Eigen::Matrix3d::Zero();
    companion(1, 0) = 1.0;
    companion(2, 1) = 1.0;
    companion(0, 2) = -c[0];
    companion(1, 2) = -c[1];
    companion(2, 2) = -c[2];
    const Eigen::EigenSolver<Eigen::Matrix3d> solver(companion, false);
    const auto roots = solver.eigenvalues();

    const auto p = [&](double n) { return ((n + c[2]) * n + c[1]) * n + c[0]; };
    const auto dp = [&](double n) { return (3.0 * n + 2.0 * c[2]) * n + c[1]; };

    std::vector<double> out;
    for (int i = 0; i < 3; ++i) {
        const cplx z = roots(i);
        const double scale = std::max(1.0, std::abs(z));
        if (std::abs(z.imag()) > 1e-6 * scale) continue;
        double n = z.real();
        for (int it = 0; it < 50; ++it) {
            const double d = dp(n);
            if (d == 0.0) break;
            const double step = p(n) / d;
            n -= step;
            if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(n)))
                break;
        }
        if (n < 0.0 && n > -1e-9 * scale) n = 0.0;
        if (n >= 0.0) out.push_back(n);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, b); }),
              out.end());
    return out;
}

}  // namespace detail

inline std::vector<FixedPoint> steady_states(const CavityParams& p,
                                             double tolerance = kDefaultStabilityTolerance) {
    p.validate();
    const double drive_sq = std::norm(p.drive);
    if (drive_sq == 0.0) return {make_fixed_point(p.drive, 0.0, p.r, p.lambda_kerr, tolerance)};
    std::vector<FixedPoint> out;
    for (double n : detail::photon_number_roots(drive_sq, p.lambda_kerr))
        out.push_back(make_fixed_point(p.drive, n, p.r, p.lambda_kerr, tolerance));
    return out;
}

/// Right-hand side of the deterministic equations at (alpha, beta); zero at a fixed point.
inline std::array<cplx, 2> deterministic_rhs(cplx alpha, cplx beta, cplx drive, double r,
                                             double lambda_kerr) {
    const cplx i(0.0, 1.0);
    const cplx ac = std::conj(alpha);
    return {-alpha + beta * ac - i * lambda_kerr * ac * alpha * alpha + drive,
            r * (-beta - alpha * alpha)};
}

/// Drift matrix of the linearized fluctuations in the (da, da+, db, db+) basis.
inline Matrix4c jacobian(const FixedPoint& fp, double r, double lambda_kerr) {
    const cplx i(0.0, 1.0);
    const cplx a = fp.alpha;
    const cplx ac = std::conj(a);
    const double n = std::norm(a);
    Matrix4c A = Matrix4c::Zero();
    A(kAlpha, kAlpha) = -1.0 - 2.0 * i * lambda_kerr * n;
    A(kAlpha, kAlphaPlus) = fp.beta - i * lambda_kerr * a * a;
    A(kAlpha, kBeta) = ac;
    A(kAlphaPlus, kAlpha) = std::conj(fp.beta) + i * lambda_kerr * ac * ac;
    A(kAlphaPlus, kAlphaPlus) = -1.0 + 2.0 * i * lambda_kerr * n;
    A(kAlphaPlus, kBetaPlus) = a;
    A(kBeta, kAlpha) = -2.0 * r * a;
    A(kBeta, kBeta) = -r;
    A(kBetaPlus, kAlphaPlus) = -2.0 * r * ac;
    A(kBetaPlus, kBetaPlus) = -r;
    return A;
}

inline Efficiencies efficiencies(double n, double lambda_kerr) {
    detail::require(n >= 0.0, "photon number must be non-negative");
    const double kerr = n * n * lambda_kerr * lambda_kerr;
    const double den = (1.0 + n) * (1.0 + n) + kerr;
    const double eta_b = 4.0 * n / den;
    return {((1.0 - n) * (1.0 - n) + kerr) / den, eta_b};
}

}  // namespace kerrshg
