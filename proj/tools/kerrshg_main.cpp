#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kerrshg/commands.hpp"

namespace {

using kerrshg::cli::RunConfig;

void add_model_flags(CLI::App& cmd, RunConfig& cfg) {
    cmd.add_option("--r", cfg.r, "loss-rate ratio gamma_b/gamma_a");
    cmd.add_option("--lambda-kerr", cfg.lambda_kerr, "scaled Kerr strength");
    cmd.add_option("--stability-tolerance", cfg.stability_tolerance, "marginality tolerance on max Re k");
}

void add_output_flags(CLI::App& cmd, RunConfig& cfg) {
    cmd.add_option("--out", cfg.out, "output CSV path (default: stdout)");
    cmd.add_flag("--emit-plot-script", cfg.emit_plot_script, "also write <out>.plot.py");
}

void add_n_grid(CLI::App& cmd, RunConfig& cfg) {
    cmd.add_option("--n-min", cfg.n.min, "first photon number");
    cmd.add_option("--n-max", cfg.n.max, "last photon number");
    cmd.add_option("--n-steps", cfg.n.steps, "number of photon-number points");
}

CLI::Option* add_omega_grid(CLI::App& cmd, RunConfig& cfg) {
    auto* a = cmd.add_option("--omega-min", cfg.omega.min, "first frequency (units of gamma_a)");
    auto* b = cmd.add_option("--omega-max", cfg.omega.max, "last frequency");
    auto* c = cmd.add_option("--omega-steps", cfg.omega.steps, "number of frequencies");
    (void)a;
    (void)b;
    return c;
}

void add_mode(CLI::App& cmd, RunConfig& cfg) {
    const std::map<std::string, kerrshg::Mode> modes{{"fundamental", kerrshg::Mode::Fundamental},
                                                     {"harmonic", kerrshg::Mode::Harmonic}};
    cmd.add_option("--mode", cfg.mode, "fundamental | harmonic")
        ->transform(CLI::CheckedTransformer(modes, CLI::ignore_case));
}

void add_units(CLI::App& cmd, RunConfig& cfg) {
    auto* db = cmd.add_flag("--db", cfg.db, "report squeezing in dB (default)");
    cmd.add_flag("--linear{false}", cfg.db, "report squeezing in linear vacuum units")->excludes(db);
}

// `--config FILE` after a subcommand reads `key = value` lines (keys are flag names without
// dashes, `#` starts a comment). The pairs are spliced in right after the subcommand, ahead of
// the user's own flags, so anything given on the command line wins. Returns args in the reverse
// order CLI11 expects.
std::vector<std::string> expand_config(int argc, char** argv, const std::vector<std::string>& commands) {
    std::vector<std::string> in(argv + 1, argv + argc);
    std::vector<std::string> from_file;
    std::size_t sub = in.size();
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (sub == in.size() && std::find(commands.begin(), commands.end(), in[i]) != commands.end()) sub = i;
        std::string path;
        if (in[i] == "--config") {
            if (i + 1 >= in.size()) throw std::runtime_error("--config needs a file");
            path = in[i + 1];
            in.erase(in.begin() + static_cast<std::ptrdiff_t>(i), in.begin() + static_cast<std::ptrdiff_t>(i) + 2);
        } else if (in[i].rfind("--config=", 0) == 0) {
            path = in[i].substr(9);
            in.erase(in.begin() + static_cast<std::ptrdiff_t>(i));
        } else {
            continue;
        }
        --i;
        std::ifstream file(path);
        if (!file) throw std::runtime_error("cannot read config file " + path);
        std::string line;
        for (int lineno = 1; std::getline(file, line); ++lineno) {
            line = line.substr(0, line.find('#'));
            const auto eq = line.find('=');
            const auto trim = [](std::string t) {
                const auto b = t.find_first_not_of(" \t\r");
                return b == std::string::npos ? std::string{} : t.substr(b, t.find_last_not_of(" \t\r") - b + 1);
            };
            const std::string key = trim(line.substr(0, eq));
            if (key.empty() && eq == std::string::npos) continue;
            if (key.empty() || eq == std::string::npos)
                throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
            from_file.push_back("--" + key + "=" + trim(line.substr(eq + 1)));
        }
    }
    if (!from_file.empty() && sub == in.size()) throw std::runtime_error("--config must follow a subcommand");
    if (sub < in.size()) in.insert(in.begin() + static_cast<std::ptrdiff_t>(sub) + 1, from_file.begin(), from_file.end());
    std::reverse(in.begin(), in.end());
    return in;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    CLI::App app{"Squeezing, stability and efficiency analysis of an SHG cavity with a Kerr term"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");
    app.footer("Any subcommand also takes --config FILE: key = value lines named after its flags.\n"
               "Flags given on the command line override the file.");

    auto* sweep = app.add_subcommand("sweep", "optimized squeezing and efficiencies along a photon-number grid");
    add_model_flags(*sweep, cfg);
    add_mode(*sweep, cfg);
    add_n_grid(*sweep, cfg);
    add_output_flags(*sweep, cfg);
    add_units(*sweep, cfg);
    sweep->add_option("--kappa-scale", cfg.kappa_scale,
                      "photon-number axis factor: reported n = X * model n");

    auto* surface = app.add_subcommand("surface", "S_-(n, omega) in long format");
    add_model_flags(*surface, cfg);
    add_mode(*surface, cfg);
    add_n_grid(*surface, cfg);
    add_omega_grid(*surface, cfg);
    add_output_flags(*surface, cfg);
    add_units(*surface, cfg);
    surface->add_option("--kappa-scale", cfg.kappa_scale,
                        "photon-number axis factor: reported n = X * model n");

    auto* stability = app.add_subcommand("stability-map", "max Re eigenvalue over a (Lambda, n) grid");
    stability->add_option("--r", cfg.r, "loss-rate ratio gamma_b/gamma_a");
    stability->add_option("--stability-tolerance", cfg.stability_tolerance, "marginality tolerance");
    add_n_grid(*stability, cfg);
    stability->add_option("--lambda-min", cfg.lambda_grid.min, "first Kerr strength");
    stability->add_option("--lambda-max", cfg.lambda_grid.max, "last Kerr strength");
    stability->add_option("--lambda-steps", cfg.lambda_grid.steps, "number of Kerr strengths");
    add_output_flags(*stability, cfg);

    auto* material = app.add_subcommand("material", "Kerr strength from crystal and cavity data");
    material->add_option("--t-b", cfg.material.t_b, "harmonic mirror transmission");
    material->add_option("--lambda-b", cfg.material.lambda_b, "harmonic wavelength [m]");
    material->add_option("--length", cfg.material.length, "crystal length [m]");
    material->add_option("--chi2", cfg.material.chi2, "second-order susceptibility");
    material->add_option("--chi3", cfg.chi3_values, "third-order susceptibility (repeatable)");
    add_output_flags(*material, cfg);

    auto* oracle = app.add_subcommand("oracle-check", "Monte Carlo check of the analytic spectrum matrix");
    add_model_flags(*oracle, cfg);
    oracle->add_option("--n", cfg.photon_number, "photon number of the fixed point");
    oracle->add_option("--seed", cfg.seed, "random seed");
    oracle->add_option("--trajectories", cfg.trajectories, "independent trajectories");
    oracle->add_option("--segments", cfg.segments_per_trajectory, "Welch segments per trajectory");
    oracle->add_option("--dt", cfg.dt, "integrator step (default: automatic)");
    oracle->add_option("--segment-length", cfg.segment_length, "Welch segment duration (default: automatic)");
    auto* omega_steps = add_omega_grid(*oracle, cfg);
    add_output_flags(*oracle, cfg);

    // a flag repeated from a --config file must not clash with the command-line copy
    for (auto* sub : {sweep, surface, stability, material, oracle})
        for (auto* opt : sub->get_options())
            if (opt->get_type_size_max() == 1 && opt->get_items_expected_max() == 1)
                opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    std::vector<std::string> args;
    try {
        args = expand_config(argc, argv, {"sweep", "surface", "stability-map", "material", "oracle-check"});
    } catch (const std::runtime_error& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return kerrshg::cli::kInvalidConfig;
    }

    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return kerrshg::cli::kInvalidConfig;
    }

    for (auto* sub : app.get_subcommands()) cfg.command = sub->get_name();
    cfg.omega_given = oracle->parsed() && (omega_steps->count() > 0 || oracle->count("--omega-min") > 0 ||
                                           oracle->count("--omega-max") > 0);
    return kerrshg::cli::run(cfg, std::cout, std::cerr);
}
