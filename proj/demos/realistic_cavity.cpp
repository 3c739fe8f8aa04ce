// Optimized fundamental-mode squeezing at r = 0.15 for pure SHG and for three
// Kerr strengths, printed as a small table.

#include <cstdio>

#include "kerrshg/kerrshg.hpp"

int main() {
    using namespace kerrshg;
    const double r = 0.15;
    for (double lambda_kerr : {0.0, 0.562, 0.578, 0.75}) {
        std::printf("Lambda = %.3f  (n_c = %g)\n", lambda_kerr, critical_photon_number(r, lambda_kerr));
        for (double n : {0.5, 1.0, 2.0, 5.0, 10.0, 20.0}) {
            const FixedPoint fp = fixed_point_for_photon_number(n, r, lambda_kerr);
            const Efficiencies eta = efficiencies(n, lambda_kerr);
            if (fp.stability != Stability::Stable) {
                std::printf("  n = %5.1f  %-8s eta_a = %.3f\n", n, to_string(fp.stability), eta.eta_a);
                continue;
            }
            const OptimalSqueezing best = optimal_frequency(fp, r, lambda_kerr, Mode::Fundamental);
            std::printf("  n = %5.1f  omega_m = %6.3f  S- = %7.2f dB  S+ = %6.2f dB  eta_a = %.3f\n", n,
                        best.omega_m, best.point.s_minus_db(), best.point.s_plus_db(), eta.eta_a);
        }
    }
}
