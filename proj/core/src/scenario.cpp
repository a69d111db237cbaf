#include "wernersim/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "wernersim/version.hpp"

namespace wernersim {

// ---------------------------------------------------------------------------
// Formatting and tables

std::string format_double17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void ResultTable::add_metadata(const std::string& key, const std::string& value) {
    metadata.emplace_back(key, value);
}

void ResultTable::add_metadata(const std::string& key, double value) {
    metadata.emplace_back(key, format_double17(value));
}

void ResultTable::add_row(std::vector<double> row) {
    if (row.size() != columns.size())
        throw DimensionError("ResultTable: row width does not match column count");
    rows.push_back(std::move(row));
}

void ResultTable::to_csv(std::ostream& out) const {
    for (const auto& [k, v] : metadata) out << "# " << k << " = " << v << "\n";
    for (size_t c = 0; c < columns.size(); ++c)
        out << columns[c] << (c + 1 < columns.size() ? "," : "");
    out << "\n";
    for (const auto& row : rows) {
        for (size_t c = 0; c < row.size(); ++c)
            out << format_double17(row[c]) << (c + 1 < row.size() ? "," : "");
        out << "\n";
    }
}

void ResultTable::to_json(std::ostream& out) const {
    nlohmann::ordered_json j;
    auto& meta = j["metadata"];
    for (const auto& [k, v] : metadata) meta[k] = v;
    j["columns"] = columns;
    j["rows"] = rows;
    out << j.dump(2) << "\n";
}

std::string ResultTable::csv_string() const {
    std::ostringstream ss;
    to_csv(ss);
    return ss.str();
}

std::vector<std::pair<std::string, std::string>> tolerance_report() {
    return {
        {"tol.hermiticity", format_double17(tol::hermiticity)},
        {"tol.trace_unit", format_double17(tol::trace_unit)},
        {"tol.min_eigenvalue", format_double17(tol::min_eigenvalue)},
        {"tol.ket_norm", format_double17(tol::ket_norm)},
        {"tol.kernel_default", format_double17(tol::kernel_default)},
        {"tol.ode_rel", format_double17(tol::ode_rel)},
        {"tol.ode_abs", format_double17(tol::ode_abs)},
        {"tol.renorm_threshold", format_double17(tol::renorm_threshold)},
        {"tol.steady_residual", format_double17(tol::steady_residual)},
        {"tol.fock_truncation", format_double17(tol::fock_truncation)},
    };
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    const char* c = v.c_str();
    char* end = nullptr;
    double x = std::strtod(c, &end);
    if (end == c || *end != '\0')
        throw ConfigError("config field '" + key + "': '" + v + "' is not a number");
    return x;
}

int parse_int(const std::string& key, const std::string& v) {
    double x = parse_double(key, v);
    int i = static_cast<int>(std::lround(x));
    if (std::abs(x - i) > 0.0)
        throw ConfigError("config field '" + key + "': '" + v + "' is not an integer");
    return i;
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(v);
    while (std::getline(ss, cur, ',')) {
        cur = trim(cur);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

ModelTag parse_model(const std::string& v) {
    if (v == "cavity_full") return ModelTag::cavity_full;
    if (v == "two_atom_reduced") return ModelTag::two_atom_reduced;
    if (v == "driven_collective") return ModelTag::driven_collective;
    throw ConfigError("config field 'model': unknown model '" + v +
                      "' (expected cavity_full, two_atom_reduced or driven_collective)");
}

InitialStatePreset parse_preset(const std::string& v) {
    if (v == "eg") return InitialStatePreset::eg;
    if (v == "ge") return InitialStatePreset::ge;
    if (v == "theta_superposition") return InitialStatePreset::theta_superposition;
    if (v == "four_particle_theta") return InitialStatePreset::four_particle_theta;
    if (v == "custom_amplitudes") return InitialStatePreset::custom_amplitudes;
    throw ConfigError("config field 'initial_state': unknown preset '" + v + "'");
}

std::string preset_name(InitialStatePreset p) {
    switch (p) {
        case InitialStatePreset::eg: return "eg";
        case InitialStatePreset::ge: return "ge";
        case InitialStatePreset::theta_superposition: return "theta_superposition";
        case InitialStatePreset::four_particle_theta: return "four_particle_theta";
        case InitialStatePreset::custom_amplitudes: return "custom_amplitudes";
    }
    return "?";
}

std::string method_name(EvolveMethod m) {
    switch (m) {
        case EvolveMethod::automatic: return "auto";
        case EvolveMethod::adaptive: return "adaptive";
        case EvolveMethod::expm: return "expm";
    }
    return "?";
}

}  // namespace

ScenarioConfig parse_scenario_config(std::istream& in) {
    ScenarioConfig cfg;
    std::map<std::string, std::string> seen;
    bool have_section = false, have_model = false, have_tf = false, have_dt = false;

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (!have_section) {
            if (line != "[scenario]")
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": expected [scenario] section header");
            have_section = true;
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": empty key or value");
        if (seen.count(key))
            throw ConfigError("config field '" + key + "': duplicated");
        seen[key] = val;

        if (key == "model") {
            cfg.model = parse_model(val);
            have_model = true;
        } else if (key == "omega_over_gamma") {
            cfg.omega_over_gamma = parse_double(key, val);
        } else if (key == "phi") {
            cfg.phi = parse_double(key, val);
        } else if (key == "xi") {
            cfg.xi = parse_double(key, val);
        } else if (key == "g") {
            cfg.g = parse_double(key, val);
        } else if (key == "kappa") {
            cfg.kappa = parse_double(key, val);
        } else if (key == "n_max") {
            cfg.n_max = parse_int(key, val);
        } else if (key == "theta") {
            cfg.theta = parse_double(key, val);
        } else if (key == "n_particles") {
            cfg.n_particles = parse_int(key, val);
        } else if (key == "initial_state") {
            cfg.initial_state = parse_preset(val);
        } else if (key == "initial_amplitudes") {
            std::istringstream ss(val);
            std::vector<double> nums;
            std::string tok;
            while (ss >> tok) nums.push_back(parse_double(key, tok));
            if (nums.empty() || nums.size() % 2 != 0)
                throw ConfigError(
                    "config field 'initial_amplitudes': expected an even count of "
                    "re im values");
            for (size_t i = 0; i < nums.size(); i += 2)
                cfg.custom_amplitudes.emplace_back(nums[i], nums[i + 1]);
        } else if (key == "t_final") {
            cfg.t_final = parse_double(key, val);
            have_tf = true;
        } else if (key == "dt_out") {
            cfg.dt_out = parse_double(key, val);
            have_dt = true;
        } else if (key == "outputs") {
            cfg.outputs = split_list(val);
        } else if (key == "method") {
            if (val == "auto") cfg.method = EvolveMethod::automatic;
            else if (val == "adaptive") cfg.method = EvolveMethod::adaptive;
            else if (val == "expm") cfg.method = EvolveMethod::expm;
            else throw ConfigError("config field 'method': expected auto, adaptive or expm");
        } else {
            throw ConfigError("config field '" + key + "': unknown key");
        }
    }
    if (!have_section) throw ConfigError("config: missing [scenario] section header");
    if (!have_model) throw ConfigError("config field 'model': required");
    if (!have_tf) throw ConfigError("config field 't_final': required");
    if (!have_dt) throw ConfigError("config field 'dt_out': required");
    return cfg;
}

ScenarioConfig parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    return parse_scenario_config(in);
}

std::vector<std::pair<std::string, std::string>> ScenarioConfig::echo() const {
    std::vector<std::pair<std::string, std::string>> out;
    out.emplace_back("model", to_string(model));
    auto put = [&](const char* k, const std::optional<double>& v) {
        if (v) out.emplace_back(k, format_double17(*v));
    };
    put("omega_over_gamma", omega_over_gamma);
    put("phi", phi);
    put("xi", xi);
    put("g", g);
    put("kappa", kappa);
    if (n_max) out.emplace_back("n_max", std::to_string(*n_max));
    put("theta", theta);
    if (n_particles) out.emplace_back("n_particles", std::to_string(*n_particles));
    out.emplace_back("initial_state", preset_name(initial_state));
    if (!custom_amplitudes.empty()) {
        std::string s;
        for (const auto& a : custom_amplitudes) {
            if (!s.empty()) s += " ";
            s += format_double17(a.real()) + " " + format_double17(a.imag());
        }
        out.emplace_back("initial_amplitudes", s);
    }
    out.emplace_back("t_final", format_double17(t_final));
    out.emplace_back("dt_out", format_double17(dt_out));
    if (!outputs.empty()) {
        std::string s;
        for (const auto& o : outputs) {
            if (!s.empty()) s += ",";
            s += o;
        }
        out.emplace_back("outputs", s);
    }
    out.emplace_back("method", method_name(method));
    return out;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw ConfigError(msg);
}

void forbid(const bool present, const char* key, const char* model) {
    if (present)
        throw ConfigError(std::string("config field '") + key +
                          "': not a parameter of model " + model);
}

int atomic_dim(const ScenarioConfig& cfg) {
    if (cfg.model == ModelTag::driven_collective)
        return 1 << cfg.n_particles.value_or(2);
    return 4;
}

}  // namespace

void validate_config(const ScenarioConfig& cfg) {
    require(cfg.t_final > 0.0, "config field 't_final': must be > 0");
    require(cfg.dt_out > 0.0, "config field 'dt_out': must be > 0");
    require(cfg.dt_out <= cfg.t_final, "config field 'dt_out': must be <= t_final");

    switch (cfg.model) {
        case ModelTag::two_atom_reduced:
            require(cfg.xi.has_value(),
                    "config field 'xi': required for model two_atom_reduced");
            forbid(cfg.omega_over_gamma.has_value(), "omega_over_gamma", "two_atom_reduced");
            forbid(cfg.phi.has_value(), "phi", "two_atom_reduced");
            forbid(cfg.g.has_value(), "g", "two_atom_reduced");
            forbid(cfg.kappa.has_value(), "kappa", "two_atom_reduced");
            forbid(cfg.n_max.has_value(), "n_max", "two_atom_reduced");
            forbid(cfg.n_particles.has_value(), "n_particles", "two_atom_reduced");
            break;
        case ModelTag::driven_collective: {
            require(cfg.omega_over_gamma.has_value(),
                    "config field 'omega_over_gamma': required for model driven_collective");
            require(*cfg.omega_over_gamma >= 0.0,
                    "config field 'omega_over_gamma': must be >= 0");
            forbid(cfg.g.has_value(), "g", "driven_collective");
            forbid(cfg.kappa.has_value(), "kappa", "driven_collective");
            forbid(cfg.n_max.has_value(), "n_max", "driven_collective");
            forbid(cfg.xi.has_value(), "xi", "driven_collective");
            int n = cfg.n_particles.value_or(2);
            require(n >= 2 && n % 2 == 0,
                    "config field 'n_particles': must be an even count >= 2");
            break;
        }
        case ModelTag::cavity_full:
            require(cfg.g.has_value(), "config field 'g': required for model cavity_full");
            require(cfg.kappa.has_value(),
                    "config field 'kappa': required for model cavity_full");
            require(cfg.xi.has_value(), "config field 'xi': required for model cavity_full");
            require(*cfg.g >= 0.0, "config field 'g': must be >= 0");
            require(*cfg.kappa > 0.0, "config field 'kappa': must be > 0");
            require(cfg.n_max.value_or(10) >= 1, "config field 'n_max': must be >= 1");
            forbid(cfg.omega_over_gamma.has_value(), "omega_over_gamma", "cavity_full");
            forbid(cfg.phi.has_value(), "phi", "cavity_full");
            forbid(cfg.n_particles.has_value(), "n_particles", "cavity_full");
            break;
    }

    const int ad = atomic_dim(cfg);
    switch (cfg.initial_state) {
        case InitialStatePreset::eg:
        case InitialStatePreset::ge:
            require(ad == 4, "config field 'initial_state': " +
                                 preset_name(cfg.initial_state) +
                                 " requires a two-atom state space");
            break;
        case InitialStatePreset::theta_superposition:
            require(ad == 4,
                    "config field 'initial_state': theta_superposition requires a "
                    "two-atom state space");
            require(cfg.theta.has_value(),
                    "config field 'theta': required for initial_state theta_superposition");
            break;
        case InitialStatePreset::four_particle_theta:
            require(cfg.model == ModelTag::driven_collective &&
                        cfg.n_particles.value_or(2) == 4,
                    "config field 'initial_state': four_particle_theta requires "
                    "driven_collective with n_particles = 4");
            require(cfg.theta.has_value(),
                    "config field 'theta': required for initial_state four_particle_theta");
            break;
        case InitialStatePreset::custom_amplitudes: {
            require(!cfg.custom_amplitudes.empty(),
                    "config field 'initial_amplitudes': required for initial_state "
                    "custom_amplitudes");
            require(static_cast<int>(cfg.custom_amplitudes.size()) == ad,
                    "config field 'initial_amplitudes': expected " + std::to_string(ad) +
                        " amplitudes");
            double n2 = 0.0;
            for (const auto& a : cfg.custom_amplitudes) n2 += std::norm(a);
            require(std::abs(n2 - 1.0) <= 1e-9,
                    "config field 'initial_amplitudes': state must be normalized");
            break;
        }
    }
}

// ---------------------------------------------------------------------------
// Scenario machinery

namespace {

Ket product_initial_ket(const ScenarioConfig& cfg) {
    const int ad = atomic_dim(cfg);
    const int n_atoms = (ad == 4) ? 2 : cfg.n_particles.value_or(2);
    auto labels = product_basis_labels(n_atoms);
    Vector v = Vector::Zero(ad);
    switch (cfg.initial_state) {
        case InitialStatePreset::eg: v(1) = 1.0; break;
        case InitialStatePreset::ge: v(2) = 1.0; break;
        case InitialStatePreset::theta_superposition:
            v(1) = std::sin(*cfg.theta);
            v(2) = std::cos(*cfg.theta);
            break;
        case InitialStatePreset::four_particle_theta:
            v(0b0011) = std::sin(*cfg.theta);  // |e,e,g,g>
            v(0b1100) = std::cos(*cfg.theta);  // |g,g,e,e>
            break;
        case InitialStatePreset::custom_amplitudes:
            for (int i = 0; i < ad; ++i) v(i) = cfg.custom_amplitudes[i];
            break;
    }
    return Ket(std::move(v), std::move(labels));
}

// Cost-based choice between the adaptive integrator and the exact propagator.
EvolveMethod choose_method(const Liouvillian& L, double t_final, double dt_out) {
    const double scale = L.matrix().cwiseAbs().maxCoeff();
    const double d2 = static_cast<double>(L.matrix().rows());
    const double n_out = t_final / dt_out;
    const double est_steps = 4.0 * scale * t_final + n_out + 64.0;
    const double cost_adaptive = est_steps * 7.0 * d2 * d2;
    const double cost_expm = 26.0 * d2 * d2 * d2 + n_out * d2 * d2;
    if (est_steps > 2e6) return EvolveMethod::expm;
    return cost_adaptive <= cost_expm ? EvolveMethod::adaptive : EvolveMethod::expm;
}

Trajectory evolve_with(EvolveMethod requested, EvolveMethod* used, const Liouvillian& L,
                       const DensityMatrix& rho0, double t_final, double dt_out) {
    EvolveMethod m = requested == EvolveMethod::automatic
                         ? choose_method(L, t_final, dt_out)
                         : requested;
    if (m == EvolveMethod::adaptive) {
        try {
            if (used) *used = EvolveMethod::adaptive;
            return evolve(L, rho0, t_final, dt_out);
        } catch (const StiffnessError&) {
            if (requested == EvolveMethod::adaptive) throw;
            // fall through to the exact propagator
        }
    }
    if (used) *used = EvolveMethod::expm;
    return evolve_expm(L, rho0, t_final, dt_out);
}

struct ObservableContext {
    const ScenarioConfig* cfg = nullptr;
    const CoupledBasis* basis = nullptr;  // driven model only
    double initial_singlet = 0.0;
    int n_max = 0;  // cavity only
};

struct Sample {
    double t = 0.0;
    const DensityMatrix* raw = nullptr;
    const DensityMatrix* atomic = nullptr;  // product-basis atomic state
    const StepDiagnostics* diag = nullptr;
};

using ObservableFn = std::function<double(const ObservableContext&, const Sample&)>;

double bell_overlap(const DensityMatrix& rho, const Ket& k) {
    return fidelity_with_pure(rho, k);
}

std::vector<std::pair<std::string, ObservableFn>> resolve_outputs(
    const ScenarioConfig& cfg, const ObservableContext& ctx) {
    const BellStates bells = bell_states();
    const bool two_atom = atomic_dim(cfg) == 4;
    const bool cavity = cfg.model == ModelTag::cavity_full;
    const bool driven = cfg.model == ModelTag::driven_collective;

    std::vector<std::string> names = cfg.outputs;
    if (names.empty()) {
        if (cfg.model == ModelTag::two_atom_reduced)
            names = {"fidelity_psiE", "pop_gg", "singlet"};
        else if (cavity)
            names = {"photon_number", "pop_gg"};
        else if (two_atom)
            names = {"singlet", "psi_plus", "phi_plus", "phi_minus"};
        else
            names = {"sector_weights"};
    }

    std::vector<std::pair<std::string, ObservableFn>> out;
    auto add = [&](const std::string& n, ObservableFn f) { out.emplace_back(n, std::move(f)); };

    for (const auto& name : names) {
        if (name == "singlet" || name == "fidelity_psi_minus") {
            require(two_atom, "output '" + name + "': requires a two-atom state");
            add(name, [bells](const ObservableContext&, const Sample& s) {
                return bell_overlap(*s.atomic, bells.psi_minus);
            });
        } else if (name == "psi_plus") {
            require(two_atom, "output 'psi_plus': requires a two-atom state");
            add(name, [bells](const ObservableContext&, const Sample& s) {
                return bell_overlap(*s.atomic, bells.psi_plus);
            });
        } else if (name == "phi_plus") {
            require(two_atom, "output 'phi_plus': requires a two-atom state");
            add(name, [bells](const ObservableContext&, const Sample& s) {
                return bell_overlap(*s.atomic, bells.phi_plus);
            });
        } else if (name == "phi_minus") {
            require(two_atom, "output 'phi_minus': requires a two-atom state");
            add(name, [bells](const ObservableContext&, const Sample& s) {
                return bell_overlap(*s.atomic, bells.phi_minus);
            });
        } else if (name == "psi_plus_norm") {
            require(two_atom, "output 'psi_plus_norm': requires a two-atom state");
            require(std::abs(1.0 - ctx.initial_singlet) > 1e-12,
                    "output 'psi_plus_norm': initial state is the pure singlet, the "
                    "normalization 1/(1-F) is degenerate");
            add(name, [bells](const ObservableContext& c, const Sample& s) {
                return bell_overlap(*s.atomic, bells.psi_plus) / (1.0 - c.initial_singlet);
            });
        } else if (name == "fidelity_psiE") {
            require(cfg.xi.has_value(),
                    "output 'fidelity_psiE': requires the positional parameter xi");
            require(two_atom, "output 'fidelity_psiE': requires a two-atom state");
            const Ket dark = entangled_dark_state(*cfg.xi);
            add(name, [dark](const ObservableContext&, const Sample& s) {
                return fidelity_with_pure(*s.atomic, dark);
            });
        } else if (name == "pop_ee" || name == "pop_eg" || name == "pop_ge" ||
                   name == "pop_gg") {
            require(two_atom, "output '" + name + "': requires a two-atom state");
            int idx = name == "pop_ee" ? 0 : name == "pop_eg" ? 1 : name == "pop_ge" ? 2 : 3;
            add(name, [idx](const ObservableContext&, const Sample& s) {
                return s.atomic->population(idx);
            });
        } else if (name == "photon_number") {
            require(cavity, "output 'photon_number': requires the cavity model");
            add(name, [](const ObservableContext& c, const Sample& s) {
                const int nc = c.n_max + 1;
                double n_exp = 0.0;
                for (int a = 0; a < 4; ++a)
                    for (int n = 1; n < nc; ++n)
                        n_exp += n * s.raw->matrix()(a * nc + n, a * nc + n).real();
                return n_exp;
            });
        } else if (name == "top_fock_pop") {
            require(cavity, "output 'top_fock_pop': requires the cavity model");
            add(name, [](const ObservableContext& c, const Sample& s) {
                return top_fock_population(*s.raw, c.n_max);
            });
        } else if (name == "purity") {
            add(name, [](const ObservableContext&, const Sample& s) {
                return (s.raw->matrix() * s.raw->matrix()).trace().real();
            });
        } else if (name == "entropy_paper") {
            add(name, [](const ObservableContext&, const Sample& s) {
                return von_neumann_entropy_paper(*s.raw);
            });
        } else if (name == "singlet_weight") {
            require(driven, "output 'singlet_weight': requires the driven model");
            const int idx = ctx.basis->index_of(0, 0, 1);
            add(name, [idx](const ObservableContext&, const Sample& s) {
                return s.raw->population(idx);
            });
        } else if (name == "sector_weights") {
            require(driven, "output 'sector_weights': requires the driven model");
            for (const auto& sec : ctx.basis->sectors()) {
                std::string col = "w_" + std::to_string(sec.two_s / 2) + "_" +
                                  std::to_string(sec.copy);
                int off = sec.offset, d = sec.dim;
                add(col, [off, d](const ObservableContext&, const Sample& s) {
                    double w = 0.0;
                    for (int i = 0; i < d; ++i) w += s.raw->population(off + i);
                    return w;
                });
            }
        } else {
            throw ConfigError("output '" + name + "': unknown observable");
        }
    }
    add("trace_error", [](const ObservableContext&, const Sample& s) {
        return s.diag->trace_error;
    });
    add("min_eig", [](const ObservableContext&, const Sample& s) {
        return s.diag->min_eigenvalue;
    });
    return out;
}

void append_standard_metadata(ResultTable& t, const char* scenario_name) {
    t.add_metadata("engine", std::string("wernersim ") + kVersion);
    t.add_metadata("scenario", scenario_name);
    t.add_metadata("time_unit", "1/Gamma");
}

}  // namespace

ResultTable run_scenario(const ScenarioConfig& cfg) {
    validate_config(cfg);

    std::optional<CoupledBasis> basis;
    std::optional<Liouvillian> L;
    DensityMatrix atomic0 = DensityMatrix::pure(product_initial_ket(cfg));
    std::optional<DensityMatrix> rho0;
    int n_max = cfg.n_max.value_or(10);

    switch (cfg.model) {
        case ModelTag::two_atom_reduced:
            L = build_two_atom_reduced(*cfg.xi, 1.0);
            rho0 = atomic0;
            break;
        case ModelTag::driven_collective: {
            basis = build_coupled_basis(cfg.n_particles.value_or(2));
            L = build_driven_collective(*basis,
                                        DriveParams(*cfg.omega_over_gamma,
                                                    cfg.phi.value_or(0.0), 1.0));
            rho0 = basis->to_coupled(atomic0);
            break;
        }
        case ModelTag::cavity_full:
            L = build_cavity_liouvillian(CavityParams(*cfg.g, *cfg.kappa, *cfg.xi, n_max));
            rho0 = with_vacuum(atomic0, n_max);
            break;
    }

    ObservableContext ctx;
    ctx.cfg = &cfg;
    ctx.basis = basis ? &*basis : nullptr;
    ctx.n_max = n_max;
    {
        const BellStates b = bell_states();
        ctx.initial_singlet =
            atomic0.dim() == 4 ? fidelity_with_pure(atomic0, b.psi_minus) : 0.0;
    }

    auto outputs = resolve_outputs(cfg, ctx);

    EvolveMethod used = EvolveMethod::adaptive;
    Trajectory traj = evolve_with(cfg.method, &used, *L, *rho0, cfg.t_final, cfg.dt_out);

    ResultTable table;
    append_standard_metadata(table, "run");
    for (const auto& [k, v] : cfg.echo()) table.add_metadata("config." + k, v);
    table.add_metadata("method_used", method_name(used));

    table.columns.push_back("t");
    for (const auto& [name, fn] : outputs) table.columns.push_back(name);

    double max_tail = 0.0;
    for (size_t i = 0; i < traj.size(); ++i) {
        Sample s;
        s.t = traj.times()[i];
        s.raw = &traj.states()[i];
        s.diag = &traj.diagnostics()[i];
        std::optional<DensityMatrix> atomic;
        if (cfg.model == ModelTag::two_atom_reduced) {
            s.atomic = s.raw;
        } else if (cfg.model == ModelTag::driven_collective) {
            atomic = basis->to_product(*s.raw);
            s.atomic = &*atomic;
        } else {
            atomic = trace_out_cavity(*s.raw, n_max);
            s.atomic = &*atomic;
            max_tail = std::max(max_tail, top_fock_population(*s.raw, n_max));
        }
        std::vector<double> row{s.t};
        for (const auto& [name, fn] : outputs) row.push_back(fn(ctx, s));
        table.add_row(std::move(row));
    }
    if (cfg.model == ModelTag::cavity_full) {
        table.add_metadata("max_top_fock_population", max_tail);
        if (max_tail > 1e-10)
            table.add_metadata("truncation_warning",
                               "top Fock level populated; increase n_max");
    }
    return table;
}

// ---------------------------------------------------------------------------
// Named experiments

ResultTable figure_1a(double theta, double omega_over_gamma, double t_final) {
    if (t_final <= 0.0) throw ConfigError("fig1a: t_final must be > 0");
    const double F0 = fidelity_from_theta(theta);
    if (std::abs(1.0 - F0) < 1e-12)
        throw ConfigError("fig1a: initial fidelity is 1, the normalized triplet "
                          "component 1/(1-F) is degenerate");

    CoupledBasis basis = build_coupled_basis(2);
    Liouvillian L =
        build_driven_collective(basis, DriveParams(omega_over_gamma, 0.0, 1.0));
    Vector v = Vector::Zero(4);
    v(1) = std::sin(theta);
    v(2) = std::cos(theta);
    DensityMatrix rho0 = basis.to_coupled(
        DensityMatrix::pure(Ket(std::move(v), product_basis_labels(2))));

    EvolveMethod used;
    Trajectory traj = evolve_with(EvolveMethod::automatic, &used, L, rho0, t_final,
                                  t_final / 200.0);

    const BellStates b = bell_states();
    ResultTable t;
    append_standard_metadata(t, "fig1a");
    t.add_metadata("theta", theta);
    t.add_metadata("omega_over_gamma", omega_over_gamma);
    t.add_metadata("t_final", t_final);
    t.add_metadata("initial_singlet_fidelity", F0);
    t.add_metadata("method_used", method_name(used));
    t.columns = {"t",       "psi_plus_normalized", "phi_plus", "phi_minus",
                 "singlet", "trace_error",         "min_eig"};
    for (size_t i = 0; i < traj.size(); ++i) {
        DensityMatrix atomic = basis.to_product(traj.states()[i]);
        t.add_row({traj.times()[i],
                   fidelity_with_pure(atomic, b.psi_plus) / (1.0 - F0),
                   fidelity_with_pure(atomic, b.phi_plus),
                   fidelity_with_pure(atomic, b.phi_minus),
                   fidelity_with_pure(atomic, b.psi_minus),
                   traj.diagnostics()[i].trace_error,
                   traj.diagnostics()[i].min_eigenvalue});
    }
    return t;
}

std::vector<double> default_fig1b_grid(double lo, double hi, int points) {
    if (points < 2 || lo <= 0.0 || hi <= lo)
        throw ConfigError("fig1b: grid needs points >= 2 and 0 < min < max");
    std::vector<double> grid(points);
    const double l0 = std::log10(lo), l1 = std::log10(hi);
    for (int i = 0; i < points; ++i)
        grid[i] = std::pow(10.0, l0 + (l1 - l0) * i / (points - 1));
    return grid;
}

ResultTable figure_1b(const std::vector<double>& grid) {
    if (grid.empty()) throw ConfigError("fig1b: empty drive grid");
    for (double x : grid)
        if (x < 0.0) throw ConfigError("fig1b: drive values must be >= 0");

    const double ln_third = std::log(1.0 / 3.0);
    DickeBasis s1 = DickeBasis::from_spin(1.0);
    DensityMatrix ground = DensityMatrix::pure(Ket::basis_state(3, 2, s1.labels()));

    ResultTable t;
    append_standard_metadata(t, "fig1b");
    t.add_metadata("grid_points", static_cast<double>(grid.size()));
    t.add_metadata("ln_one_third", ln_third);
    t.columns = {"omega_over_gamma", "beta", "beta_minus_ln_one_third",
                 "engine_pop_dev", "flagged"};
    for (double x : grid) {
        const SteadyPopulations p = analytic_steady_populations(x);
        Liouvillian L = build_driven_collective(s1, DriveParams(x, 0.0, 1.0));
        DensityMatrix ss = steady_state_from_initial(L, ground);
        double dev = std::max({std::abs(ss.population(0) - p.rho11),
                               std::abs(ss.population(1) - p.rho00),
                               std::abs(ss.population(2) - p.rho_m1m1)});
        double b = beta(x);
        t.add_row({x, b, b - ln_third, dev, dev > 1e-6 ? 1.0 : 0.0});
    }
    return t;
}

ResultTable four_particle_scenario(double theta, double omega_over_gamma,
                                   double t_final) {
    if (t_final <= 0.0) throw ConfigError("four-particle: t_final must be > 0");

    CoupledBasis basis = build_coupled_basis(4);
    Liouvillian L =
        build_driven_collective(basis, DriveParams(omega_over_gamma, 0.0, 1.0));

    Vector v = Vector::Zero(16);
    v(0b0011) = std::sin(theta);
    v(0b1100) = std::cos(theta);
    DensityMatrix rho0 = basis.to_coupled(
        DensityMatrix::pure(Ket(std::move(v), product_basis_labels(4))));

    const GeneralizedWernerSpec pred = four_particle_prediction(theta);
    const DensityMatrix target = generalized_werner_state(pred, basis);

    EvolveMethod used;
    Trajectory traj = evolve_with(EvolveMethod::automatic, &used, L, rho0, t_final,
                                  t_final / 100.0);

    ResultTable t;
    append_standard_metadata(t, "four_particle");
    t.add_metadata("theta", theta);
    t.add_metadata("omega_over_gamma", omega_over_gamma);
    t.add_metadata("t_final", t_final);
    t.add_metadata("predicted_fidelity", pred.fidelity);
    t.add_metadata("predicted_alpha_S1", pred.alpha_total(2));
    t.add_metadata("predicted_alpha_S2", pred.alpha_total(4));
    t.add_metadata("method_used", method_name(used));
    {
        std::string diag_str;
        for (int i = 0; i < 16; ++i) {
            if (i) diag_str += " ";
            diag_str += format_double17(target.population(i));
        }
        t.add_metadata("predicted_diagonal", diag_str);
    }

    t.columns = {"t"};
    for (const auto& sec : basis.sectors())
        t.columns.push_back("w_" + std::to_string(sec.two_s / 2) + "_" +
                            std::to_string(sec.copy));
    t.columns.insert(t.columns.end(),
                     {"max_diag_err", "max_cross_coherence", "trace_error", "min_eig"});

    const auto& secs = basis.sectors();
    auto sector_of_index = [&](int i) {
        for (size_t k = 0; k < secs.size(); ++k)
            if (i >= secs[k].offset && i < secs[k].offset + secs[k].dim)
                return static_cast<int>(k);
        return -1;
    };

    for (size_t i = 0; i < traj.size(); ++i) {
        const DensityMatrix& rho = traj.states()[i];
        std::vector<double> row{traj.times()[i]};
        for (const auto& sec : secs) {
            double w = 0.0;
            for (int k = 0; k < sec.dim; ++k) w += rho.population(sec.offset + k);
            row.push_back(w);
        }
        double diag_err = 0.0;
        for (int k = 0; k < 16; ++k)
            diag_err = std::max(diag_err,
                                std::abs(rho.population(k) - target.population(k)));
        double cross = 0.0;
        for (int r = 0; r < 16; ++r)
            for (int c = 0; c < 16; ++c)
                if (sector_of_index(r) != sector_of_index(c))
                    cross = std::max(cross, std::abs(rho.matrix()(r, c)));
        row.push_back(diag_err);
        row.push_back(cross);
        row.push_back(traj.diagnostics()[i].trace_error);
        row.push_back(traj.diagnostics()[i].min_eigenvalue);
        t.add_row(std::move(row));
    }
    t.add_metadata("final_max_diag_err", t.rows.back()[t.columns.size() - 4]);
    t.add_metadata("final_max_cross_coherence", t.rows.back()[t.columns.size() - 3]);
    return t;
}

ResultTable cavity_compare(double g, double kappa, double xi, int n_max,
                           bool check_truncation) {
    if (g <= 0.0) throw ConfigError("cavity-compare: g must be > 0 (Gamma = g^2/kappa)");
    CavityParams p(g, kappa, xi, n_max);
    const double gamma = p.gamma();
    const double t_final = 5.0 / gamma;
    const double dt_out = t_final / 100.0;

    Liouvillian full = build_cavity_liouvillian(p);
    Liouvillian reduced = build_two_atom_reduced(xi, gamma);

    DensityMatrix atomic0 = DensityMatrix::pure(
        Ket::basis_state(4, 1, product_basis_labels(2)));  // |e1, g2>

    EvolveMethod used_full, used_red;
    Trajectory tf = evolve_with(EvolveMethod::automatic, &used_full, full,
                                with_vacuum(atomic0, n_max), t_final, dt_out);
    Trajectory tr = evolve_with(EvolveMethod::automatic, &used_red, reduced, atomic0,
                                t_final, dt_out);

    ResultTable t;
    append_standard_metadata(t, "cavity_compare");
    t.add_metadata("g", g);
    t.add_metadata("kappa", kappa);
    t.add_metadata("xi", xi);
    t.add_metadata("n_max", static_cast<double>(n_max));
    t.add_metadata("gamma", gamma);
    t.add_metadata("g_over_kappa", g / kappa);
    t.add_metadata("method_used_full", method_name(used_full));
    t.add_metadata("method_used_reduced", method_name(used_red));

    t.columns = {"t",            "trace_distance_atomic", "photon_number",
                 "top_fock_pop", "trace_error_full",      "min_eig_full"};
    double max_tail = 0.0;
    for (size_t i = 0; i < tf.size(); ++i) {
        const DensityMatrix& rho_f = tf.states()[i];
        DensityMatrix at = trace_out_cavity(rho_f, n_max);
        const int nc = n_max + 1;
        double n_exp = 0.0;
        for (int a = 0; a < 4; ++a)
            for (int n = 1; n < nc; ++n)
                n_exp += n * rho_f.matrix()(a * nc + n, a * nc + n).real();
        double tail = top_fock_population(rho_f, n_max);
        max_tail = std::max(max_tail, tail);
        t.add_row({tf.times()[i], trace_distance(at, tr.states()[i]), n_exp, tail,
                   tf.diagnostics()[i].trace_error, tf.diagnostics()[i].min_eigenvalue});
    }
    t.add_metadata("final_trace_distance", t.rows.back()[1]);
    t.add_metadata("max_top_fock_population", max_tail);
    if (max_tail > 1e-10)
        t.add_metadata("truncation_warning", "top Fock level populated; increase n_max");
    if (check_truncation) {
        double td = fock_truncation_check(p, atomic0, t_final);
        t.add_metadata("truncation_check_trace_distance", td);
        t.add_metadata("truncation_check_pass",
                       td < tol::fock_truncation ? "yes" : "no");
    }
    return t;
}

ResultTable werner_report(double fidelity) {
    WernerSpec spec(fidelity);
    DensityMatrix rho = werner_state(spec);

    ResultTable t;
    append_standard_metadata(t, "werner");
    t.add_metadata("fidelity", fidelity);
    t.add_metadata("classification", to_string(classify_fidelity(fidelity)));
    t.add_metadata("chsh_threshold", chsh_threshold());
    t.add_metadata("theta", theta_for_fidelity(fidelity));
    t.add_metadata("entropy_paper_convention",
                   steady_entropy_paper(fidelity, INFINITY));
    t.add_metadata("entropy", -steady_entropy_paper(fidelity, INFINITY));
    {
        Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix(), Eigen::EigenvaluesOnly);
        std::string ev;
        for (int i = 3; i >= 0; --i) {
            if (!ev.empty()) ev += " ";
            ev += format_double17(es.eigenvalues()(i));
        }
        t.add_metadata("eigenvalues", ev);
    }
    t.columns = {"row", "col", "re", "im"};
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            t.add_row({static_cast<double>(r), static_cast<double>(c),
                       rho.matrix()(r, c).real(), rho.matrix()(r, c).imag()});
    return t;
}

}  // namespace wernersim
