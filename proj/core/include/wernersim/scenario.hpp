#ifndef WERNERSIM_SCENARIO_HPP
#define WERNERSIM_SCENARIO_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wernersim/lindblad.hpp"
#include "wernersim/werner.hpp"

namespace wernersim {

enum class InitialStatePreset {
    eg,                   // |e1, g2>
    ge,                   // |g1, e2>
    theta_superposition,  // sin(theta)|e,g> + cos(theta)|g,e>
    four_particle_theta,  // sin(theta)|eegg> + cos(theta)|ggee>
    custom_amplitudes,    // product-basis amplitudes from the config
};

enum class EvolveMethod { automatic, adaptive, expm };

/// One named experiment: model, parameters, initial state, horizon, outputs.
/// Parsed from a flat "key = value" file with a [scenario] section header
/// and '#' comments. Times are in units of 1/Gamma, rates in Gamma.
struct ScenarioConfig {
    ModelTag model = ModelTag::two_atom_reduced;

    std::optional<double> omega_over_gamma;
    std::optional<double> phi;
    std::optional<double> xi;
    std::optional<double> g;
    std::optional<double> kappa;
    std::optional<int> n_max;
    std::optional<double> theta;
    std::optional<int> n_particles;

    InitialStatePreset initial_state = InitialStatePreset::eg;
    std::vector<Complex> custom_amplitudes;

    double t_final = 0.0;
    double dt_out = 0.0;
    std::vector<std::string> outputs;  // empty -> model defaults
    EvolveMethod method = EvolveMethod::automatic;

    /// Canonical one-line-per-key echo used in result metadata.
    std::vector<std::pair<std::string, std::string>> echo() const;
};

ScenarioConfig parse_scenario_config(std::istream& in);
ScenarioConfig parse_scenario_file(const std::string& path);
/// Full validation (required-parameter presence, ranges); throws ConfigError.
void validate_config(const ScenarioConfig& cfg);

/// Rectangular numeric table with ordered metadata. CSV output uses
/// '#'-prefixed metadata lines, then the column header, then rows with 17
/// significant digits; identical inputs give byte-identical output.
struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::pair<std::string, std::string>> metadata;

    void add_metadata(const std::string& key, const std::string& value);
    void add_metadata(const std::string& key, double value);
    void add_row(std::vector<double> row);

    void to_csv(std::ostream& out) const;
    void to_json(std::ostream& out) const;
    std::string csv_string() const;
};

std::string format_double17(double v);

/// Tolerances baked into the engine, for --tol-report.
std::vector<std::pair<std::string, std::string>> tolerance_report();

ResultTable run_scenario(const ScenarioConfig& cfg);

/// Driven two-atom relaxation of the normalized triplet component:
/// columns (t, psi_plus_normalized, phi_plus, phi_minus, singlet, ...).
ResultTable figure_1a(double theta, double omega_over_gamma, double t_final);

/// beta(Omega/Gamma) over a drive grid, cross-checked per row against the
/// engine steady state (flag column set when they disagree by > 1e-6).
ResultTable figure_1b(const std::vector<double>& grid);

std::vector<double> default_fig1b_grid(double lo = 0.05, double hi = 100.0,
                                       int points = 60);

/// Driven 4-particle run: per-(S,copy) sector weights over time plus the
/// comparison against the generalized-Werner prediction.
ResultTable four_particle_scenario(double theta, double omega_over_gamma,
                                   double t_final);

/// Full atom-cavity model vs the reduced collective-decay model at
/// Gamma = g^2/kappa, from |e,g,0>, compared over t in [0, 5/Gamma].
ResultTable cavity_compare(double g, double kappa, double xi, int n_max,
                           bool check_truncation = false);

/// Werner state matrix, classification and entropies for a given fidelity.
ResultTable werner_report(double fidelity);

}  // namespace wernersim

#endif
