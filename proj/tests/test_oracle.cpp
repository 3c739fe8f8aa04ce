#include <cmath>
#include <random>
#include <vector>

#include <boost/random/normal_distribution.hpp>
#include <gtest/gtest.h>

#include "kerrshg/oracle.hpp"

using namespace kerrshg;

namespace {

LinearizedSystem point(double n, double r, double lk) {
    return linearize(fixed_point_for_photon_number(n, r, lk), r, lk);
}

LinearizedSystem lorentzian() {
    Matrix4c D = Matrix4c::Zero();
    D(kAlpha, kAlpha) = 2.0;
    D(kAlphaPlus, kAlphaPlus) = 2.0;
    return {-Matrix4c::Identity(), D};
}

OracleConfig small_config(std::vector<double> omegas) {
    OracleConfig cfg;
    cfg.dt = 0.01;
    cfg.segment_length = 24.0;
    cfg.t_total = 24.0 * 40;
    cfg.n_traj = 16;
    cfg.omega_grid = std::move(omegas);
    return cfg;
}

double max_abs_z(const std::vector<OracleComparison>& cmp) {
    double m = 0.0;
    for (const auto& c : cmp) m = std::max(m, std::abs(c.z));
    return m;
}

}  // namespace

TEST(SteadyStateOracle, Examples) {
    const auto empty = steady_state_oracle({0.0, 0.0}, 0.15, 0.3);
    ASSERT_EQ(empty.size(), 1u);
    EXPECT_EQ(empty[0], 0.0);
    const auto one = steady_state_oracle({2.0, 0.0}, 0.15, 0.0);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_NEAR(one[0], 1.0, 1e-12);
}

TEST(SteadyStateOracle, AgreesWithModelOnRandomInputs) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double mag = std::pow(10.0, -3.0 + 6.0 * u(rng));
        const cplx drive = std::polar(mag, 6.283 * u(rng));
        const double r = std::pow(10.0, -6.0 + 8.0 * u(rng));
        const double lk = 3.0 * u(rng);
        const auto oracle = steady_state_oracle(drive, r, lk);
        const auto model = steady_states({r, lk, drive});
        ASSERT_EQ(oracle.size(), 1u) << mag << " " << lk;
        ASSERT_EQ(model.size(), 1u);
        EXPECT_NEAR(oracle[0], model[0].n, 1e-8 * std::max(1.0, model[0].n)) << mag << " " << lk;
    }
}

TEST(Lyapunov, SmallResidual) {
    const LinearizedSystem sys = point(10.0, 0.15, 0.75);
    const StationarySampler sampler(sys, 1.0);
    const detail::Matrix8d A = detail::realify(sys.drift);
    const auto B = EulerMaruyama(sys, 1.0).real_noise_matrix();
    const detail::Matrix8d Q = B * B.transpose();
    const detail::Matrix8d& S = sampler.covariance();
    EXPECT_LT((A * S + S * A.transpose() + Q).norm(), 1e-10 * std::max(1.0, Q.norm()));
}

TEST(NoiseMatrix, BranchInvariantAndReproducesDiffusion) {
    const LinearizedSystem sys = point(3.0, 0.15, 0.75);
    const auto B = EulerMaruyama(sys, 1.0).real_noise_matrix();
    const auto flipped = (-B).eval();
    EXPECT_EQ(B * B.transpose(), flipped * flipped.transpose());
    // complex E[xi xi]/dt from the real covariance: ReRe - ImIm + 2i ReIm
    const detail::Matrix8d Q = B * B.transpose();
    for (int c : {static_cast<int>(kAlpha), static_cast<int>(kAlphaPlus)}) {
        const cplx d(Q(c, c) - Q(4 + c, 4 + c), 2.0 * Q(c, 4 + c));
        EXPECT_LT(std::abs(d - sys.diffusion(c, c)), 1e-12 * std::abs(sys.diffusion(c, c)));
    }
}

TEST(SimulateLinearOu, ZeroDiffusionIsExactlyZero) {
    const LinearizedSystem sys = point(0.0, 0.15, 0.75);
    ASSERT_EQ(sys.diffusion, Matrix4c::Zero());
    OracleConfig cfg = small_config({0.0, 1.0, 2.0});
    cfg.segment_length = suggested_segment_length(sys.drift, cfg.omega_grid);
    cfg.t_total = 3.0 * cfg.segment_length;
    const auto est = simulate_linear_ou(sys, cfg);
    for (const auto& traj : est.per_trajectory)
        for (const auto& F : traj) EXPECT_EQ(F, Matrix4c::Zero());
    for (const auto& c : compare_with_analytic(sys, est)) EXPECT_EQ(c.z, 0.0);
}

TEST(SimulateLinearOu, LorentzianPeak) {
    const LinearizedSystem sys = lorentzian();
    const auto est = simulate_linear_ou(sys, small_config({0.0, 1.0}));
    const auto peak = est.statistic(0, [](const Matrix4c& F) { return F(kAlpha, kAlpha).real(); });
    EXPECT_LT(std::abs(peak.mean - 2.0), 3.0 * peak.std_error);
    EXPECT_GT(peak.std_error, 0.0);
    const auto half = est.statistic(1, [](const Matrix4c& F) { return F(kAlphaPlus, kAlphaPlus).real(); });
    EXPECT_LT(std::abs(half.mean - 1.0), 3.0 * half.std_error);
    EXPECT_LT(max_abs_z(compare_with_analytic(sys, est)), 3.0);
}

TEST(SimulateLinearOu, SegmentAccounting) {
    const auto cfg = small_config({1.0});
    const auto est = simulate_linear_ou(lorentzian(), cfg);
    EXPECT_EQ(est.trajectories(), 16u);
    EXPECT_EQ(est.segments_per_trajectory, 79u);  // 50% overlap over 40 segment lengths
    EXPECT_EQ(est.total_segments(), 16u * 79u);
}

TEST(SimulateLinearOu, RealisticKerrPointAtSpecProbes) {
    const LinearizedSystem sys = point(10.0, 0.15, 0.75);
    OracleConfig cfg;
    cfg.omega_grid = {0.0, 3.75, 7.5};
    cfg.dt = 0.01 / 8.7;
    cfg.segment_length = suggested_segment_length(sys.drift, cfg.omega_grid);
    cfg.t_total = cfg.segment_length * 15.5;
    cfg.n_traj = 12;
    const auto cmp = compare_with_analytic(sys, simulate_linear_ou(sys, cfg));
    EXPECT_LT(max_abs_z(cmp), 3.0);
}

TEST(SimulateLinearOu, ConfigurationErrors) {
    const LinearizedSystem sys = point(10.0, 0.15, 0.75);
    OracleConfig ok;
    ok.omega_grid = {1.0};
    ok.dt = 1e-3;
    ok.segment_length = 200.0;
    ok.t_total = 400.0;
    ok.n_traj = 2;
    EXPECT_NO_THROW(plan_oracle(sys, ok));

    auto bad = ok;
    bad.dt = 0.01;
    EXPECT_THROW(plan_oracle(sys, bad), ConfigTooCoarse);
    bad = ok;
    bad.segment_length = 10.0;
    EXPECT_THROW(plan_oracle(sys, bad), ConfigTooCoarse);
    bad = ok;
    bad.t_total = 100.0;
    EXPECT_THROW(plan_oracle(sys, bad), ConfigTooCoarse);
    bad = ok;
    bad.stationary_start = false;
    bad.burn_in = 10.0;
    EXPECT_THROW(plan_oracle(sys, bad), ConfigTooCoarse);
    bad.burn_in = 300.0;
    EXPECT_NO_THROW(plan_oracle(sys, bad));
    bad = ok;
    bad.sample_stride = 1000;
    EXPECT_THROW(plan_oracle(sys, bad), ConfigTooCoarse);
    bad = ok;
    bad.n_traj = 1;
    EXPECT_THROW(plan_oracle(sys, bad), DomainError);
    bad = ok;
    bad.omega_grid.clear();
    EXPECT_THROW(plan_oracle(sys, bad), DomainError);
    bad = ok;
    bad.g0_sq = 0.0;
    EXPECT_THROW(plan_oracle(sys, bad), DomainError);

    const LinearizedSystem unstable = point(3.0, 0.15, 0.0);
    EXPECT_THROW(simulate_linear_ou(unstable, ok), UnstableSystem);
}

TEST(SimulateLinearOu, Reproducible) {
    const LinearizedSystem sys = point(2.0, 0.15, 0.75);
    OracleConfig cfg = small_config({0.5, 2.0});
    cfg.dt = 0.002;
    cfg.segment_length = suggested_segment_length(sys.drift, cfg.omega_grid);
    cfg.t_total = 2.0 * cfg.segment_length;
    cfg.n_traj = 6;
    worker_count() = 1;
    const auto serial = simulate_linear_ou(sys, cfg);
    worker_count() = 3;
    const auto parallel = simulate_linear_ou(sys, cfg);
    const auto again = simulate_linear_ou(sys, cfg);
    worker_count() = 0;
    ASSERT_EQ(serial.per_trajectory.size(), parallel.per_trajectory.size());
    for (std::size_t t = 0; t < serial.per_trajectory.size(); ++t)
        for (std::size_t w = 0; w < 2; ++w) {
            EXPECT_EQ(serial.per_trajectory[t][w], parallel.per_trajectory[t][w]);
            EXPECT_EQ(again.per_trajectory[t][w], parallel.per_trajectory[t][w]);
        }
    cfg.seed = 43;
    EXPECT_NE(simulate_linear_ou(sys, cfg).per_trajectory[0][0], serial.per_trajectory[0][0]);
}

TEST(SimulateLinearOu, G0ScalesOutOfEstimate) {
    const LinearizedSystem sys = lorentzian();
    OracleConfig cfg = small_config({0.5});
    cfg.t_total = 24.0 * 4;
    cfg.n_traj = 3;
    const auto unit = simulate_linear_ou(sys, cfg);
    cfg.g0_sq = 4.0;
    const auto scaled = simulate_linear_ou(sys, cfg);
    for (std::size_t t = 0; t < 3; ++t)
        EXPECT_LT((unit.per_trajectory[t][0] - scaled.per_trajectory[t][0]).norm(),
                  1e-12 * unit.per_trajectory[t][0].norm());
}

// The doubled phase space keeps alpha+ independent, yet its ensemble mean must
// track conj(<alpha>) from a conjugate-consistent start.
TEST(EnsembleMean, ConjugationSymmetry) {
    const LinearizedSystem sys = point(4.0, 0.15, 0.75);
    const double dt = 1e-3;
    const EulerMaruyama em(sys, dt);
    const cplx a0(0.8, -0.3), b0(0.2, 0.5);
    const Vector4c x0(a0, std::conj(a0), b0, std::conj(b0));
    const int n_traj = 400;
    const std::vector<int> checkpoints{200, 1000, 3000};
    std::vector<std::vector<cplx>> alpha(checkpoints.size()), alpha_plus(checkpoints.size());
    for (int t = 0; t < n_traj; ++t) {
        auto rng = trajectory_stream(5, static_cast<std::uint64_t>(t));
        boost::random::normal_distribution<double> normal;
        Vector4c v = x0;
        std::size_t next = 0;
        for (int s = 1; s <= checkpoints.back(); ++s) {
            const double w1 = normal(rng), w2 = normal(rng);
            em.step(v, std::sqrt(dt) * w1, std::sqrt(dt) * w2);
            if (s == checkpoints[next]) {
                alpha[next].push_back(v(kAlpha));
                alpha_plus[next].push_back(v(kAlphaPlus));
                ++next;
            }
        }
    }
    for (std::size_t k = 0; k < checkpoints.size(); ++k) {
        // paired difference d = alpha+ - conj(alpha), zero mean by symmetry
        for (int part = 0; part < 2; ++part) {
            double sum = 0.0, ss = 0.0;
            for (int t = 0; t < n_traj; ++t) {
                const cplx d = alpha_plus[k][static_cast<std::size_t>(t)] - std::conj(alpha[k][static_cast<std::size_t>(t)]);
                sum += part == 0 ? d.real() : d.imag();
            }
            const double mean = sum / n_traj;
            for (int t = 0; t < n_traj; ++t) {
                const cplx d = alpha_plus[k][static_cast<std::size_t>(t)] - std::conj(alpha[k][static_cast<std::size_t>(t)]);
                const double x = (part == 0 ? d.real() : d.imag()) - mean;
                ss += x * x;
            }
            const double se = std::sqrt(ss / (n_traj - 1) / n_traj);
            EXPECT_LT(std::abs(mean), 3.0 * se) << checkpoints[k] << " " << part;
        }
    }
}

// Same Brownian paths at dt and dt/2 (coarse increments are sums of two fine ones).
TEST(WeakConvergence, HalvingTimeStepStaysWithinOneStandardError) {
    const LinearizedSystem sys = point(10.0, 0.15, 0.75);
    const std::vector<double> omegas{1.5, 4.5, 7.5};
    const double fastest = Eigen::ComplexEigenSolver<Matrix4c>(sys.drift, false).eigenvalues().cwiseAbs().maxCoeff();
    const double dt = 0.01 / fastest;
    const std::size_t stride = 8;  // coarse steps per sample; 16 fine steps
    const double segment = suggested_segment_length(sys.drift, omegas);
    const auto segment_samples = static_cast<std::size_t>(std::llround(segment / (dt * stride)));
    const std::size_t samples = segment_samples * 10;
    const EulerMaruyama coarse(sys, dt);
    const EulerMaruyama fine(sys, 0.5 * dt);
    const StationarySampler sampler(sys, 1.0);
    const int n_traj = 8;

    std::vector<std::vector<Matrix4c>> est_coarse, est_fine;
    for (int t = 0; t < n_traj; ++t) {
        auto rng = trajectory_stream(99, static_cast<std::uint64_t>(t));
        boost::random::normal_distribution<double> normal;
        Vector4c vc = sampler.sample(rng);
        Vector4c vf = vc;
        WelchPeriodogram wc(omegas, dt * stride, segment_samples);
        WelchPeriodogram wf(omegas, dt * stride, segment_samples);
        const double h = std::sqrt(0.5 * dt);
        for (std::size_t s = 0; s < samples; ++s) {
            for (std::size_t k = 0; k < stride; ++k) {
                const double a1 = h * normal(rng), a2 = h * normal(rng);
                const double b1 = h * normal(rng), b2 = h * normal(rng);
                fine.step(vf, a1, a2);
                fine.step(vf, b1, b2);
                coarse.step(vc, a1 + b1, a2 + b2);
            }
            wc.push(vc);
            wf.push(vf);
        }
        est_coarse.push_back(wc.average());
        est_fine.push_back(wf.average());
    }

    for (std::size_t w = 0; w < omegas.size(); ++w)
        for (Mode mode : {Mode::Fundamental, Mode::Harmonic}) {
            const auto stat = [&](const std::vector<std::vector<Matrix4c>>& est, auto pick) {
                double sum = 0.0, ss = 0.0;
                for (const auto& e : est) sum += pick(mode_spectra(e[w], mode));
                const double mean = sum / n_traj;
                for (const auto& e : est) {
                    const double d = pick(mode_spectra(e[w], mode)) - mean;
                    ss += d * d;
                }
                return std::pair{mean, std::sqrt(ss / (n_traj - 1) / n_traj)};
            };
            const auto re_u = [](const ModeSpectra& s) { return s.self.real(); };
            const auto abs_v = [](const ModeSpectra& s) { return std::abs(s.anomalous); };
            for (int q = 0; q < 2; ++q) {
                const auto [mc, sc] = q == 0 ? stat(est_coarse, re_u) : stat(est_coarse, abs_v);
                const auto [mf, sf] = q == 0 ? stat(est_fine, re_u) : stat(est_fine, abs_v);
                EXPECT_LT(std::abs(mc - mf), std::min(sc, sf)) << omegas[w] << " " << to_string(mode) << " " << q;
            }
        }
}
