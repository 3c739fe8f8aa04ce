// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Each criterion also has a wall-clock budget; overrunning it counts as a failure.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "kerrshg/kerrshg.hpp"

using namespace kerrshg;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::vector<SqueezePoint> g_heisenberg_points;

SqueezePoint record(const SqueezePoint& p) {
    g_heisenberg_points.push_back(p);
    return p;
}

Outcome critical_numbers() {
    const double a = critical_photon_number(0.15, 0.562);
    const double b = critical_photon_number(1e-6, 0.566);
    const double c = critical_photon_number(0.15, 0.578);
    const bool ok = std::abs(a - 5.0) <= 0.1 && std::abs(b - 5.0) <= 0.1 && std::isinf(c);
    return {ok, fmt("n_c = %.4f, ", a) + fmt("%.4f, ", b) + (std::isinf(c) ? "inf" : fmt("%.4f", c))};
}

Outcome stabilization_threshold() {
    int count = 0;
    for (int i = 0; i <= 20000; ++i) {
        const double n = 0.5 * i;
        const FixedPoint fp = fixed_point_for_photon_number(n, 0.15, 0.75);
        if (classify_stability(fp, 0.15, 0.75) != Stability::Stable)
            return {false, fmt("not stable at n = %g", n)};
        ++count;
    }
    return {true, std::to_string(count) + " points on n in [0, 1e4] all stable"};
}

Outcome eigenvalue_closed_form() {
    double worst = 0.0;
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j)
            for (int l = 0; l < 10; ++l) {
                const double n = 20.0 * i / 9.0;
                const double r = std::pow(10.0, -2.0 + 4.0 * j / 9.0);
                const double lk = l / 9.0;
                const auto closed = eigenvalues_closed_form(n, r, lk).k;
                const Eigen::ComplexEigenSolver<Matrix4c> solver(
                    jacobian(fixed_point_for_photon_number(n, r, lk), r, lk), false);
                std::array<int, 4> perm{0, 1, 2, 3};
                double best = std::numeric_limits<double>::infinity();
                double scale = 1.0;
                for (const auto& k : closed) scale = std::max(scale, std::abs(k));
                do {
                    double d = 0.0;
                    for (int q = 0; q < 4; ++q)
                        d = std::max(d, std::abs(solver.eigenvalues()(q) - closed[static_cast<std::size_t>(perm[q])]));
                    best = std::min(best, d);
                } while (std::next_permutation(perm.begin(), perm.end()));
                worst = std::max(worst, best / scale);
            }
    return {worst < 1e-10, fmt("1000 grid points, max relative deviation %.2e", worst)};
}

Outcome efficiency() {
    const double eta = efficiencies(10.0, 0.75).eta_a;
    double worst = 0.0;
    for (double lk = 0.0; lk <= 3.0; lk += 0.05)
        for (double n = 0.0; n <= 1e4; n = n * 1.1 + 0.01) {
            const auto e = efficiencies(n, lk);
            worst = std::max(worst, std::abs(e.eta_a + e.eta_b - 1.0));
        }
    return {std::abs(eta - 0.774) <= 0.001 && worst <= 1e-12,
            fmt("eta_a(10, 0.75) = %.5f, ", eta) + fmt("max |eta_a + eta_b - 1| = %.1e", worst)};
}

Outcome pure_shg_deep_squeezing() {
    const FixedPoint fp = fixed_point_for_photon_number(0.999, 1e-6, 0.0);
    const OptimalSqueezing opt = optimal_frequency(fp, 1e-6, 0.0, Mode::Fundamental);
    record(opt.point);
    return {opt.point.s_minus < 0.01,
            fmt("min S_- = %.3e", opt.point.s_minus) + fmt(" (%.1f dB)", opt.point.s_minus_db()) +
                fmt(" at Omega = %.4g", opt.omega_m)};
}

Outcome realistic_benchmark() {
    const double r = 0.15;
    const double nc = critical_photon_number(r, 0.0);
    double best_db = 0.0, best_n = 0.0;
    for (double n = 0.005; n < nc; n += 0.005) {
        const SqueezePoint p = record(optimal_frequency(fixed_point_for_photon_number(n, r, 0.0), r, 0.0,
                                                        Mode::Fundamental).point);
        if (p.s_minus_db() < best_db) {
            best_db = p.s_minus_db();
            best_n = n;
        }
    }
    const SqueezePoint kerr = record(
        optimal_frequency(fixed_point_for_photon_number(10.0, r, 0.75), r, 0.75, Mode::Fundamental).point);
    const bool ok = std::abs(best_db + 10.0) <= 1.5 && std::abs(kerr.s_minus_db() + 10.0) <= 1.5;
    return {ok, fmt("Lambda=0 best %.2f dB", best_db) + fmt(" at n = %.3f; ", best_n) +
                    fmt("Lambda=0.75, n=10: %.2f dB", kerr.s_minus_db())};
}

Outcome detuning_law() {
    std::vector<double> xs, ys;
    for (double n = 10.0; n <= 50.0 + 1e-9; n += 1.0) {
        const OptimalSqueezing opt =
            optimal_frequency(fixed_point_for_photon_number(n, 0.15, 0.75), 0.15, 0.75, Mode::Fundamental);
        record(opt.point);
        xs.push_back(n);
        ys.push_back(opt.omega_m);
    }
    const double k = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i] / k, my += ys[i] / k;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    const double corr = sxy / std::sqrt(sxx * syy);
    const double slope = sxy / sxx;
    return {corr > 0.99 && std::abs(slope - 0.75) <= 0.15 * 0.75,
            fmt("correlation %.5f, ", corr) + fmt("slope %.4f (Lambda = 0.75)", slope)};
}

Outcome heisenberg() {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& p : g_heisenberg_points) worst = std::min(worst, p.s_minus * p.s_plus);
    return {!g_heisenberg_points.empty() && worst >= 1.0 - 1e-9,
            std::to_string(g_heisenberg_points.size()) + fmt(" points, min S_- S_+ = %.9f", worst)};
}

Outcome oracle_equivalence() {
    struct Point {
        double r, lk, n;
    };
    std::string detail;
    bool ok = true;
    for (const Point& pt : {Point{0.15, 0.75, 10.0}, Point{1e-6, 0.566, 3.0}}) {
        const LinearizedSystem sys = linearize(fixed_point_for_photon_number(pt.n, pt.r, pt.lk), pt.r, pt.lk);
        const Eigen::ComplexEigenSolver<Matrix4c> solver(sys.drift, false);
        OracleConfig cfg;
        const double hi = std::max(3.0, pt.lk * pt.n);
        for (int i = 1; i <= 5; ++i) cfg.omega_grid.push_back(hi * i / 5.0);
        cfg.dt = 0.01 / std::max(1.0, solver.eigenvalues().cwiseAbs().maxCoeff());
        cfg.segment_length = suggested_segment_length(sys.drift, cfg.omega_grid);
        cfg.t_total = cfg.segment_length * 0.5 * 201;
        cfg.n_traj = 50;
        cfg.seed = 42;
        const OuSpectrumEstimate est = simulate_linear_ou(sys, cfg);
        double worst = 0.0;
        for (const auto& c : compare_with_analytic(sys, est)) worst = std::max(worst, std::abs(c.z));
        const bool here = worst < 3.0 && est.total_segments() >= 10000 && cfg.omega_grid.size() >= 5;
        ok = ok && here;
        if (!detail.empty()) detail += "; ";
        detail += fmt("(r=%g, ", pt.r) + fmt("Lambda=%g, ", pt.lk) + fmt("n=%g) ", pt.n) +
                  std::to_string(est.total_segments()) + " segments, 5 freqs, max|z| = " + fmt("%.2f", worst);
    }
    return {ok, detail};
}

Outcome material_estimator() {
    MaterialParams m;
    m.chi3 = 1.5e-19;
    const double lo = estimate_lambda(m);
    m.chi3 = 1e-18;
    const double hi = estimate_lambda(m);
    const bool ok = lo >= 0.23 / 1.5 && hi <= 2.3 * 1.5 && lo <= 2.3 * 1.5 && hi >= 0.23 / 1.5;
    return {ok, fmt("Lambda(chi3=1.5e-19) = %.6f, ", lo) + fmt("Lambda(chi3=1e-18) = %.6f", hi)};
}

Outcome vacuum_limit() {
    double worst = 0.0;
    int count = 0;
    for (Mode mode : {Mode::Fundamental, Mode::Harmonic})
        for (const auto& [r, lk] : {std::pair{0.15, 0.75}, std::pair{1e-6, 0.0}, std::pair{100.0, 0.566}}) {
            const SqueezingSpectrum s(fixed_point_for_photon_number(1e-6, r, lk), r, lk, mode);
            for (double w = 0.0; w <= 50.0; w += 0.25) {
                const SqueezePoint p = s.at(w);
                worst = std::max({worst, std::abs(p.s_minus - 1.0), std::abs(p.s_plus - 1.0)});
                ++count;
            }
        }
    return {worst < 1e-4, std::to_string(count) + fmt(" points, max |S - 1| = %.2e", worst)};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "critical photon numbers", 1.0, critical_numbers},
        {2, "stabilization threshold", 1.0, stabilization_threshold},
        {3, "eigenvalue closed form", 1.0, eigenvalue_closed_form},
        {4, "efficiency", 1.0, efficiency},
        {5, "pure-SHG deep squeezing", 1.0, pure_shg_deep_squeezing},
        {6, "realistic benchmark", 10.0, realistic_benchmark},
        {7, "detuning law", 30.0, detuning_law},
        {8, "Heisenberg product", 1.0, heisenberg},
        {9, "oracle equivalence", 300.0, oracle_equivalence},
        {10, "material estimator", 1.0, material_estimator},
        {11, "vacuum limit", 1.0, vacuum_limit},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs <= c.budget_s;
        const bool pass = o.pass && in_time;
        failures += pass ? 0 : 1;
        std::printf("%s %2d %-26s %s [%.2f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                    in_time ? "" : ", over budget");
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
