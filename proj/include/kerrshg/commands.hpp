#pragma once

// Command implementations behind the kerrshg CLI. Each writer emits a
// '#'-comment line echoing the resolved configuration, a CSV header, and one
// row per grid point in grid order.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "kerrshg/csv.hpp"
#include "kerrshg/errors.hpp"
#include "kerrshg/material.hpp"
#include "kerrshg/model.hpp"
#include "kerrshg/oracle.hpp"
#include "kerrshg/parallel.hpp"
#include "kerrshg/spectra.hpp"

namespace kerrshg::cli {

enum ExitCode : int { kSuccess = 0, kOracleDisagreement = 1, kInvalidConfig = 2, kIoError = 3 };

struct Grid {
    double min = 0.0;
    double max = 1.0;
    int steps = 2;

    [[nodiscard]] std::vector<double> values() const {
        std::vector<double> out;
        out.reserve(static_cast<std::size_t>(std::max(steps, 0)));
        for (int i = 0; i < steps; ++i)
            out.push_back(steps == 1 ? min : min + (max - min) * static_cast<double>(i) / (steps - 1));
        return out;
    }

    void validate(const char* name) const {
        detail::require(steps >= 1, std::string(name) + " grid needs at least one step");
        detail::require(std::isfinite(min) && std::isfinite(max), std::string(name) + " grid must be finite");
        detail::require(max >= min, std::string(name) + " grid max must be >= min");
    }
};

struct RunConfig {
    std::string command;
    double r = 0.15;
    double lambda_kerr = 0.0;
    Mode mode = Mode::Fundamental;
    Grid n{0.0, 10.0, 101};
    Grid omega{0.0, 10.0, 101};
    Grid lambda_grid{0.0, 1.0, 101};
    bool db = true;
    double kappa_scale = 1.0;  ///< reported n = kappa_scale * model n
    std::string out;           ///< empty means stdout
    bool emit_plot_script = false;
    double stability_tolerance = kDefaultStabilityTolerance;

    // oracle-check
    double photon_number = 10.0;
    std::uint64_t seed = 42;
    double dt = 0.0;              ///< 0: the largest admissible step
    double segment_length = 0.0;  ///< 0: suggested_segment_length()
    int segments_per_trajectory = 200;
    int trajectories = 64;
    bool omega_given = false;

    // material
    MaterialParams material;
    std::vector<double> chi3_values;
};

inline void validate(const RunConfig& cfg) {
    detail::require(std::isfinite(cfg.r) && cfg.r > 0.0, "--r must be positive");
    detail::require(std::isfinite(cfg.lambda_kerr) && cfg.lambda_kerr >= 0.0,
                    "--lambda-kerr must be non-negative");
    detail::require(std::isfinite(cfg.kappa_scale) && cfg.kappa_scale > 0.0, "--kappa-scale must be positive");
    detail::require(cfg.stability_tolerance > 0.0, "stability tolerance must be positive");
    if (cfg.command == "sweep" || cfg.command == "surface" || cfg.command == "stability-map") {
        cfg.n.validate("n");
        detail::require(cfg.n.min >= 0.0, "photon numbers must be non-negative");
    }
    if (cfg.command == "surface") cfg.omega.validate("omega");
    if (cfg.command == "stability-map") {
        cfg.lambda_grid.validate("lambda");
        detail::require(cfg.lambda_grid.min >= 0.0, "Kerr strengths must be non-negative");
    }
    if (cfg.command == "oracle-check") {
        detail::require(std::isfinite(cfg.photon_number) && cfg.photon_number >= 0.0,
                        "--n must be non-negative");
        detail::require(cfg.trajectories >= 2, "--trajectories must be >= 2");
        detail::require(cfg.segments_per_trajectory >= 1, "--segments must be >= 1");
        detail::require(cfg.dt >= 0.0 && cfg.segment_length >= 0.0, "--dt and --segment-length must be >= 0");
        if (cfg.omega_given) cfg.omega.validate("omega");
    }
    if (cfg.command == "material") {
        cfg.material.validate();
        for (double c : cfg.chi3_values) detail::require(c > 0.0, "chi3 must be positive");
    }
    detail::require(!(cfg.emit_plot_script && cfg.out.empty()), "--emit-plot-script needs --out");
}

/// '# key=value ...' line echoing every resolved setting that affects the output.
inline std::string config_comment(const RunConfig& cfg) {
    std::ostringstream os;
    os << "# command=" << cfg.command;
    const auto kv = [&](const char* k, const std::string& v) { os << ' ' << k << '=' << v; };
    const auto grid = [&](const char* name, const Grid& g) {
        kv((std::string(name) + "_min").c_str(), csv::number(g.min));
        kv((std::string(name) + "_max").c_str(), csv::number(g.max));
        kv((std::string(name) + "_steps").c_str(), std::to_string(g.steps));
    };
    if (cfg.command == "material") {
        kv("t_b", csv::number(cfg.material.t_b));
        kv("lambda_b", csv::number(cfg.material.lambda_b));
        kv("length", csv::number(cfg.material.length));
        kv("chi2", csv::number(cfg.material.chi2));
        return os.str();
    }
    kv("r", csv::number(cfg.r));
    if (cfg.command != "stability-map") kv("lambda_kerr", csv::number(cfg.lambda_kerr));
    kv("stability_tolerance", csv::number(cfg.stability_tolerance));
    if (cfg.command == "sweep" || cfg.command == "surface") {
        kv("mode", to_string(cfg.mode));
        kv("kappa_scale", csv::number(cfg.kappa_scale));
        grid("n", cfg.n);
    }
    if (cfg.command == "surface") {
        grid("omega", cfg.omega);
        kv("units", cfg.db ? "db" : "linear");
    }
    if (cfg.command == "stability-map") {
        grid("n", cfg.n);
        grid("lambda", cfg.lambda_grid);
    }
    if (cfg.command == "oracle-check") {
        kv("n", csv::number(cfg.photon_number));
        kv("seed", std::to_string(cfg.seed));
        kv("trajectories", std::to_string(cfg.trajectories));
        kv("segments", std::to_string(cfg.segments_per_trajectory));
    }
    return os.str();
}

inline void write_sweep(const RunConfig& cfg, std::ostream& os) {
    std::vector<double> reported = cfg.n.values();
    std::vector<double> model_n(reported.size());
    std::transform(reported.begin(), reported.end(), model_n.begin(),
                   [&](double n) { return n / cfg.kappa_scale; });
    const auto rows = sweep(model_n, cfg.r, cfg.lambda_kerr, cfg.mode, cfg.stability_tolerance);

    os << config_comment(cfg) << '\n';
    os << "n,omega_m,s_minus,s_plus,s_minus_db,s_plus_db,eta_a,eta_b,stable\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        std::vector<std::string> cells{csv::number(reported[i])};
        if (row.squeezing) {
            const auto& p = row.squeezing->point;
            cells.push_back(csv::number(row.squeezing->omega_m));
            cells.push_back(csv::number(p.s_minus));
            cells.push_back(csv::number(p.s_plus));
            cells.push_back(csv::number(p.s_minus_db()));
            cells.push_back(csv::number(p.s_plus_db()));
        } else {
            cells.insert(cells.end(), 5, "");
        }
        cells.push_back(csv::number(row.eta.eta_a));
        cells.push_back(csv::number(row.eta.eta_b));
        cells.push_back(csv::boolean(row.squeezing.has_value()));
        csv::row(os, cells);
    }
}

/// Long-format (n, omega, S_-) table; unstable photon numbers are skipped.
inline void write_surface(const RunConfig& cfg, std::ostream& os) {
    const std::vector<double> ns = cfg.n.values();
    const std::vector<double> ws = cfg.omega.values();
    const auto blocks = parallel_map(ns.size(), [&](std::size_t i) {
        std::vector<double> values;
        const double n_model = ns[i] / cfg.kappa_scale;
        const FixedPoint fp = fixed_point_for_photon_number(n_model, cfg.r, cfg.lambda_kerr, cfg.stability_tolerance);
        if (fp.stability != Stability::Stable) return values;
        const SqueezingSpectrum spec(fp, cfg.r, cfg.lambda_kerr, cfg.mode);
        values.reserve(ws.size());
        for (double w : ws) values.push_back(spec.at(w).s_minus);
        return values;
    });

    os << config_comment(cfg) << '\n';
    os << (cfg.db ? "n,omega,s_minus_db\n" : "n,omega,s_minus\n");
    for (std::size_t i = 0; i < ns.size(); ++i) {
        for (std::size_t j = 0; j < blocks[i].size(); ++j) {
            const double s = blocks[i][j];
            csv::row(os, {csv::number(ns[i]), csv::number(ws[j]), csv::number(cfg.db ? 10.0 * std::log10(s) : s)});
        }
    }
}

inline void write_stability_map(const RunConfig& cfg, std::ostream& os) {
    const std::vector<double> lambdas = cfg.lambda_grid.values();
    const std::vector<double> ns = cfg.n.values();
    os << config_comment(cfg) << '\n';
    os << "lambda_kerr,n,max_re_eigenvalue,stable\n";
    for (double L : lambdas) {
        for (double n : ns) {
            const double m = eigenvalues_closed_form(n, cfg.r, L).max_real();
            const bool stable = classify_stability(m, cfg.stability_tolerance) == Stability::Stable;
            csv::row(os, {csv::number(L), csv::number(n), csv::number(m), csv::boolean(stable)});
        }
    }
}

inline void write_material(const RunConfig& cfg, std::ostream& os) {
    std::vector<double> chi3 = cfg.chi3_values;
    if (chi3.empty()) chi3.push_back(cfg.material.chi3);
    os << config_comment(cfg) << '\n';
    os << "chi3,lambda_kerr\n";
    for (double c : chi3) {
        MaterialParams m = cfg.material;
        m.chi3 = c;
        csv::row(os, {csv::number(c), csv::number(estimate_lambda(m))});
    }
}

/// Resolves oracle controls for a stable point from the CLI settings.
inline OracleConfig oracle_config_for(const RunConfig& cfg, const LinearizedSystem& sys) {
    const Eigen::ComplexEigenSolver<Matrix4c> solver(sys.drift, false);
    const auto& k = solver.eigenvalues();
    if (!(k.real().maxCoeff() < 0.0))
        throw UnstableSystem("UnstableSystem: the requested point is at or above the Hopf bifurcation");

    OracleConfig oc;
    oc.seed = cfg.seed;
    oc.n_traj = cfg.trajectories;
    if (cfg.omega_given) {
        oc.omega_grid = cfg.omega.values();
    } else {
        const double hi = std::max(3.0, cfg.lambda_kerr * cfg.photon_number);
        for (int i = 1; i <= 5; ++i) oc.omega_grid.push_back(hi * i / 5.0);
    }
    oc.dt = cfg.dt > 0.0 ? cfg.dt : 0.01 / std::max(1.0, k.cwiseAbs().maxCoeff());
    if (cfg.segment_length > 0.0) {
        oc.segment_length = cfg.segment_length;
    } else {
        oc.segment_length = suggested_segment_length(sys.drift, oc.omega_grid);
    }
    oc.t_total = oc.segment_length * 0.5 * (cfg.segments_per_trajectory + 1);
    return oc;
}

/// Runs the Monte Carlo oracle against the analytic spectrum; writes a report.
inline int run_oracle_check(const RunConfig& cfg, std::ostream& os) {
    const FixedPoint fp = fixed_point_for_photon_number(cfg.photon_number, cfg.r, cfg.lambda_kerr,
                                                        cfg.stability_tolerance);
    if (fp.stability != Stability::Stable)
        throw UnstableSystem(std::string("UnstableSystem: fixed point is ") + to_string(fp.stability) +
                             " (n = " + csv::number(cfg.photon_number) +
                             ", n_c = " + csv::number(critical_photon_number(cfg.r, cfg.lambda_kerr)) + ")");
    const LinearizedSystem sys = linearize(fp, cfg.r, cfg.lambda_kerr);
    const OracleConfig oc = oracle_config_for(cfg, sys);
    const OuSpectrumEstimate est = simulate_linear_ou(sys, oc);
    const auto cmp = compare_with_analytic(sys, est);

    os << config_comment(cfg) << " dt=" << csv::number(oc.dt)
       << " segment_length=" << csv::number(oc.segment_length) << " t_total=" << csv::number(oc.t_total) << '\n';
    os << "# trajectory_segments=" << est.total_segments() << '\n';
    os << "omega,quantity,analytic,estimate,std_error,z\n";
    double worst = 0.0;
    for (const auto& c : cmp) {
        worst = std::max(worst, std::abs(c.z));
        csv::row(os, {csv::number(c.omega), c.quantity, csv::number(c.analytic), csv::number(c.estimate),
                      csv::number(c.std_error), csv::number(c.z)});
    }
    const bool ok = worst < 3.0;
    os << "# max|z|=" << csv::number(worst) << (ok ? " PASS" : " FAIL") << '\n';
    return ok ? kSuccess : kOracleDisagreement;
}

/// Companion matplotlib script for a CSV written by this tool.
inline std::string plot_script(const RunConfig& cfg, const std::string& csv_path) {
    std::ostringstream py;
    py << "import pandas as pd\nimport matplotlib.pyplot as plt\n\n"
       << "df = pd.read_csv(" << std::quoted(csv_path) << ", comment='#')\n";
    if (cfg.command == "sweep") {
        py << "fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True)\n"
           << "ax1.plot(df.n, df.s_minus_db, label='S-')\n"
           << "ax1.plot(df.n, df.s_plus_db, label='S+')\n"
           << "ax1.set_ylabel('noise [dB]')\nax1.legend()\n"
           << "ax2.plot(df.n, df.eta_a)\nax2.set_xlabel('n')\nax2.set_ylabel('eta_a')\n";
    } else if (cfg.command == "surface") {
        const char* col = cfg.db ? "s_minus_db" : "s_minus";
        py << "grid = df.pivot(index='omega', columns='n', values='" << col << "')\n"
           << "plt.pcolormesh(grid.columns, grid.index, grid.values, shading='auto')\n"
           << "plt.colorbar(label='" << col << "')\nplt.xlabel('n')\nplt.ylabel('omega')\n";
    } else if (cfg.command == "stability-map") {
        py << "grid = df.pivot(index='n', columns='lambda_kerr', values='max_re_eigenvalue')\n"
           << "plt.contourf(grid.columns, grid.index, grid.values, levels=[-1e9, 0, 1e9])\n"
           << "plt.xlabel('Lambda')\nplt.ylabel('n')\n";
    } else {
        py << "df.plot(x=df.columns[0], y=df.columns[1])\n";
    }
    py << "plt.savefig(" << std::quoted(csv_path + ".png") << ", dpi=150)\n";
    return py.str();
}

/// Dispatches one command; diagnostics go to `err`, data to cfg.out or `out`.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        validate(cfg);
    } catch (const DomainError& e) {
        err << "invalid configuration: " << e.what() << '\n';
        return kInvalidConfig;
    }

    std::ostringstream buffer;
    int code = kSuccess;
    try {
        if (cfg.command == "sweep") {
            write_sweep(cfg, buffer);
        } else if (cfg.command == "surface") {
            write_surface(cfg, buffer);
        } else if (cfg.command == "stability-map") {
            write_stability_map(cfg, buffer);
        } else if (cfg.command == "material") {
            write_material(cfg, buffer);
        } else if (cfg.command == "oracle-check") {
            code = run_oracle_check(cfg, buffer);
        } else {
            err << "invalid configuration: unknown command '" << cfg.command << "'\n";
            return kInvalidConfig;
        }
    } catch (const UnstableSystem& e) {
        const std::string what = e.what();
        err << (what.rfind("UnstableSystem", 0) == 0 ? "" : "UnstableSystem: ") << what << '\n';
        return kInvalidConfig;
    } catch (const ConfigTooCoarse& e) {
        err << "invalid configuration: ConfigTooCoarse: " << e.what() << '\n';
        return kInvalidConfig;
    } catch (const DomainError& e) {
        err << "invalid configuration: " << e.what() << '\n';
        return kInvalidConfig;
    }

    if (cfg.out.empty()) {
        out << buffer.str();
        return code;
    }
    std::ofstream file(cfg.out, std::ios::binary | std::ios::trunc);
    file << buffer.str();
    if (!file) {
        err << "cannot write " << cfg.out << '\n';
        return kIoError;
    }
    if (cfg.emit_plot_script) {
        std::ofstream script(cfg.out + ".plot.py", std::ios::trunc);
        script << plot_script(cfg, cfg.out);
        if (!script) {
            err << "cannot write " << cfg.out << ".plot.py\n";
            return kIoError;
        }
    }
    return code;
}

}  // namespace kerrshg::cli
