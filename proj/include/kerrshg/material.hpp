#pragma once

#include <cmath>
#include <numbers>

#include "kerrshg/errors.hpp"

namespace kerrshg {

/// Plane-wave material and cavity data for a single crystal providing both
/// nonlinearities. Units follow the usual SI susceptibility conventions
/// (chi2 in m/V, chi3 in m^2/V^2).
struct MaterialParams {
    double t_b = 0.2;          ///< output mirror transmission for the harmonic
    double lambda_b = 1.06e-6; ///< harmonic wavelength [m]
    double length = 1e-2;      ///< crystal length [m]
    double chi2 = 1e-12;
    double chi3 = 1e-18;

    void validate() const {
        detail::require(t_b > 0.0 && t_b <= 1.0, "mirror transmission must lie in (0, 1]");
        detail::require(lambda_b > 0.0, "wavelength must be positive");
        detail::require(length > 0.0, "crystal length must be positive");
        detail::require(chi2 > 0.0, "chi2 must be positive");
        detail::require(chi3 > 0.0, "chi3 must be positive");
    }
};

/// Scaled Kerr strength Lambda = (T_b / 4 pi) (lambda_b / l) chi3 / chi2^2.
inline double estimate_lambda(const MaterialParams& m) {
    m.validate();
    return (m.t_b / (4.0 * std::numbers::pi)) * (m.lambda_b / m.length) * (m.chi3 / (m.chi2 * m.chi2));
}

}  // namespace kerrshg
