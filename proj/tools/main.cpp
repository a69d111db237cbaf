// wernersim: collective-decay simulator for driven two-level atoms.
// Times are in units of 1/Gamma and rates in units of Gamma throughout.

#include <cmath>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "wernersim/scenario.hpp"
#include "wernersim/version.hpp"

namespace {

struct OutputOptions {
    bool json = false;
    bool tol_report = false;
    std::string out_path;  // empty -> stdout
};

void add_output_flags(CLI::App* cmd, OutputOptions& opts) {
    cmd->add_flag("--json", opts.json, "Emit JSON instead of CSV");
    cmd->add_option("--out", opts.out_path, "Write to a file instead of stdout");
    cmd->add_flag("--tol-report", opts.tol_report,
                  "Include the engine tolerance constants in the metadata");
}

int emit(wernersim::ResultTable table, const OutputOptions& opts) {
    if (opts.tol_report)
        for (const auto& [k, v] : wernersim::tolerance_report()) table.add_metadata(k, v);
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!opts.out_path.empty()) {
        file.open(opts.out_path);
        if (!file) {
            std::cerr << "error: cannot open output file '" << opts.out_path << "'\n";
            return 3;
        }
        out = &file;
    }
    if (opts.json)
        table.to_json(*out);
    else
        table.to_csv(*out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Collective-decay dynamics of driven two-level atoms: steady-state "
                 "Werner-state generation and its multiparticle generalization.\n"
                 "Times are in units of 1/Gamma; rates in units of Gamma."};
    app.set_version_flag("--version", std::string("wernersim ") + wernersim::kVersion);
    app.require_subcommand(1);

    // run <config>
    std::string run_config;
    OutputOptions run_opts;
    auto* cmd_run = app.add_subcommand("run", "Run a scenario from a config file");
    cmd_run->add_option("config", run_config, "Scenario config file")->required();
    add_output_flags(cmd_run, run_opts);

    // validate <config>
    std::string validate_config_path;
    auto* cmd_validate =
        app.add_subcommand("validate", "Parse and validate a config file, run nothing");
    cmd_validate->add_option("config", validate_config_path, "Scenario config file")
        ->required();

    // fig1a
    double f1a_theta = 0.0, f1a_drive = 5.0, f1a_tfinal = 20.0;
    OutputOptions f1a_opts;
    auto* cmd_f1a = app.add_subcommand(
        "fig1a", "Relaxation of the normalized triplet component of a driven atom pair");
    cmd_f1a->add_option("--theta", f1a_theta, "Initial superposition angle (rad)")
        ->capture_default_str();
    cmd_f1a->add_option("--drive", f1a_drive, "Drive strength Omega/Gamma")
        ->capture_default_str();
    cmd_f1a->add_option("--tfinal", f1a_tfinal, "Final time (1/Gamma)")
        ->capture_default_str();
    add_output_flags(cmd_f1a, f1a_opts);

    // fig1b
    double f1b_min = 0.05, f1b_max = 100.0;
    int f1b_points = 60;
    OutputOptions f1b_opts;
    auto* cmd_f1b = app.add_subcommand(
        "fig1b", "Steady-state entropy term beta(Omega/Gamma) over a drive grid");
    cmd_f1b->add_option("--grid-min", f1b_min, "Smallest drive value")
        ->capture_default_str();
    cmd_f1b->add_option("--grid-max", f1b_max, "Largest drive value")
        ->capture_default_str();
    cmd_f1b->add_option("--points", f1b_points, "Number of log-spaced grid points")
        ->capture_default_str();
    add_output_flags(cmd_f1b, f1b_opts);

    // four-particle
    double fp_theta = M_PI / 4.0, fp_drive = 1000.0, fp_tfinal = 50.0;
    OutputOptions fp_opts;
    auto* cmd_fp = app.add_subcommand(
        "four-particle",
        "Driven 4-particle run against the generalized Werner-state prediction");
    cmd_fp->add_option("--theta", fp_theta, "Initial superposition angle (rad)")
        ->capture_default_str();
    cmd_fp->add_option("--drive", fp_drive, "Drive strength Omega/Gamma")
        ->capture_default_str();
    cmd_fp->add_option("--tfinal", fp_tfinal, "Final time (1/Gamma)")
        ->capture_default_str();
    add_output_flags(cmd_fp, fp_opts);

    // cavity-compare
    double cc_g = 0.1, cc_kappa = 1.0, cc_xi = M_PI / 4.0;
    int cc_nmax = 4;
    bool cc_check = false;
    OutputOptions cc_opts;
    auto* cmd_cc = app.add_subcommand(
        "cavity-compare",
        "Full atom-cavity model vs the reduced collective-decay model at "
        "Gamma = g^2/kappa, from |e,g,0>");
    cmd_cc->add_option("--g", cc_g, "Atom-cavity coupling")->capture_default_str();
    cmd_cc->add_option("--kappa", cc_kappa, "Cavity decay rate")->capture_default_str();
    cmd_cc->add_option("--xi", cc_xi, "Positional angle (rad)")->capture_default_str();
    cmd_cc->add_option("--nmax", cc_nmax,
                       "Fock truncation (the fixed initial state carries one "
                       "excitation, so small values are exact)")
        ->capture_default_str();
    cmd_cc->add_flag("--check-truncation", cc_check,
                     "Also rerun at nmax+5 and report the trace distance (slow for "
                     "large nmax)");
    add_output_flags(cmd_cc, cc_opts);

    // werner
    double w_fidelity = 0.0;
    OutputOptions w_opts;
    auto* cmd_w = app.add_subcommand(
        "werner", "Print the Werner state, its classification and entropy");
    cmd_w->add_option("--fidelity", w_fidelity, "Singlet fidelity F in [0,1]")
        ->required();
    add_output_flags(cmd_w, w_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (cmd_run->parsed()) {
            auto cfg = wernersim::parse_scenario_file(run_config);
            return emit(wernersim::run_scenario(cfg), run_opts);
        }
        if (cmd_validate->parsed()) {
            auto cfg = wernersim::parse_scenario_file(validate_config_path);
            wernersim::validate_config(cfg);
            std::cout << "ok\n";
            return 0;
        }
        if (cmd_f1a->parsed())
            return emit(wernersim::figure_1a(f1a_theta, f1a_drive, f1a_tfinal), f1a_opts);
        if (cmd_f1b->parsed())
            return emit(wernersim::figure_1b(
                            wernersim::default_fig1b_grid(f1b_min, f1b_max, f1b_points)),
                        f1b_opts);
        if (cmd_fp->parsed())
            return emit(wernersim::four_particle_scenario(fp_theta, fp_drive, fp_tfinal),
                        fp_opts);
        if (cmd_cc->parsed())
            return emit(wernersim::cavity_compare(cc_g, cc_kappa, cc_xi, cc_nmax, cc_check),
                        cc_opts);
        if (cmd_w->parsed()) return emit(wernersim::werner_report(w_fidelity), w_opts);
    } catch (const wernersim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const wernersim::Error& e) {
        std::cerr << "engine error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
