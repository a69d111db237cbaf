#include "wernersim/werner.hpp"

#include <cmath>
#include <limits>

namespace wernersim {

namespace {
double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }
}  // namespace

WernerSpec::WernerSpec(double f) : fidelity(f) {
    if (!(f >= 0.0 && f <= 1.0))
        throw DimensionError("WernerSpec: fidelity must lie in [0,1]");
}

DensityMatrix werner_state(const WernerSpec& spec) {
    const BellStates b = bell_states();
    const double F = spec.fidelity;
    auto proj = [](const Ket& k) {
        return Matrix(k.amplitudes() * k.amplitudes().adjoint());
    };
    Matrix rho = F * proj(b.psi_minus) +
                 (1.0 - F) / 3.0 * (proj(b.psi_plus) + proj(b.phi_plus) + proj(b.phi_minus));
    return DensityMatrix::from_matrix(std::move(rho), b.psi_minus.basis_labels());
}

DensityMatrix werner_state(double fidelity) { return werner_state(WernerSpec(fidelity)); }

double fidelity_from_theta(double theta) { return 0.5 * (1.0 - std::sin(2.0 * theta)); }

double theta_for_fidelity(double fidelity) {
    if (!(fidelity >= 0.0 && fidelity <= 1.0))
        throw DimensionError("theta_for_fidelity: fidelity must lie in [0,1]");
    return 0.5 * std::asin(1.0 - 2.0 * fidelity);
}

std::string to_string(FidelityClass c) {
    switch (c) {
        case FidelityClass::classical: return "classical";
        case FidelityClass::purifiable: return "purifiable";
        case FidelityClass::chsh_violating: return "chsh_violating";
    }
    return "unknown";
}

double chsh_threshold() { return (2.0 + 3.0 * std::sqrt(2.0)) / 8.0; }

FidelityClass classify_fidelity(double fidelity) {
    if (!(fidelity >= 0.0 && fidelity <= 1.0))
        throw DimensionError("classify_fidelity: fidelity must lie in [0,1]");
    if (fidelity > chsh_threshold()) return FidelityClass::chsh_violating;
    if (fidelity > 0.5) return FidelityClass::purifiable;
    return FidelityClass::classical;
}

SteadyPopulations analytic_steady_populations(double omega_over_gamma) {
    if (omega_over_gamma < 0.0)
        throw DimensionError("analytic_steady_populations: drive must be nonnegative");
    const double u = omega_over_gamma * omega_over_gamma;
    const double norm = 3.0 * u * u + 4.0 * u + 4.0;  // >= 4, never singular
    SteadyPopulations p;
    p.rho11 = u * u / norm;
    p.rho00 = (u * u + 2.0 * u) / norm;
    p.rho_m1m1 = 1.0 - p.rho11 - p.rho00;
    return p;
}

double beta(double omega_over_gamma) {
    const SteadyPopulations p = analytic_steady_populations(omega_over_gamma);
    return xlogx(p.rho11) + xlogx(p.rho00) + xlogx(p.rho_m1m1);
}

double steady_entropy_paper(double fidelity, double omega_over_gamma) {
    if (!(fidelity >= 0.0 && fidelity <= 1.0))
        throw DimensionError("steady_entropy_paper: fidelity must lie in [0,1]");
    const double b = std::isinf(omega_over_gamma) ? std::log(1.0 / 3.0)
                                                  : beta(omega_over_gamma);
    const double one_m = 1.0 - fidelity;
    return xlogx(fidelity) + (one_m > 0.0 ? one_m * (std::log(one_m) + b) : 0.0);
}

DensityMatrix predicted_two_atom_mixture(double xi, double theta_init) {
    const Ket dark = entangled_dark_state(xi);
    Vector psi0 = Vector::Zero(4);
    psi0(1) = std::sin(theta_init);  // |e,g>
    psi0(2) = std::cos(theta_init);  // |g,e>
    const Complex overlap = dark.amplitudes().adjoint() * psi0;
    const double w = std::norm(overlap);
    Matrix rho = w * (dark.amplitudes() * dark.amplitudes().adjoint());
    rho(3, 3) += 1.0 - w;
    return DensityMatrix::from_matrix(std::move(rho), dark.basis_labels());
}

GeneralizedWernerSpec::GeneralizedWernerSpec(
    int n_particles_, double fidelity_, std::map<std::pair<int, int>, double> weights_)
    : n_particles(n_particles_), fidelity(fidelity_), weights(std::move(weights_)) {
    if (n_particles <= 0 || n_particles % 2 != 0)
        throw DimensionError("GeneralizedWernerSpec: particle count must be even");
    if (!(fidelity >= 0.0 && fidelity <= 1.0))
        throw DimensionError("GeneralizedWernerSpec: fidelity must lie in [0,1]");
    double sum = 0.0;
    for (const auto& [key, w] : weights) {
        const auto& [two_s, copy] = key;
        if (two_s < 2 || two_s > n_particles || two_s % 2 != 0)
            throw DimensionError("GeneralizedWernerSpec: S must be an integer in 1..N");
        if (copy < 1) throw DimensionError("GeneralizedWernerSpec: copy index must be >= 1");
        if (w < 0.0) throw DimensionError("GeneralizedWernerSpec: negative weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw DimensionError("GeneralizedWernerSpec: weights must sum to 1");
}

double GeneralizedWernerSpec::alpha_total(int two_s) const {
    double a = 0.0;
    for (const auto& [key, w] : weights)
        if (key.first == two_s) a += w;
    return a;
}

GeneralizedWernerSpec four_particle_prediction(double theta) {
    const double s = std::sin(2.0 * theta);
    const double F = (1.0 + s) / 3.0;
    const double a1 = 1.5 * (1.0 - s) / (2.0 - s);
    const double a2 = 0.5 * (1.0 + s) / (2.0 - s);
    std::map<std::pair<int, int>, double> w;
    w[{2, 1}] = a1;  // S=1, copy 1
    w[{4, 1}] = a2;  // S=2
    return GeneralizedWernerSpec(4, F, std::move(w));
}

DensityMatrix generalized_werner_state(const GeneralizedWernerSpec& spec,
                                       const CoupledBasis& basis) {
    if (basis.n_particles() != spec.n_particles)
        throw DimensionError("generalized_werner_state: basis size mismatch");
    Matrix rho = Matrix::Zero(basis.dim(), basis.dim());
    const int singlet = basis.index_of(0, 0, 1);
    rho(singlet, singlet) = spec.fidelity;
    for (const auto& [key, w] : spec.weights) {
        if (w == 0.0) continue;
        const auto& sec = basis.find_sector(key.first, key.second);
        const double per_m = (1.0 - spec.fidelity) * w / sec.dim;
        for (int i = 0; i < sec.dim; ++i) rho(sec.offset + i, sec.offset + i) += per_m;
    }
    return DensityMatrix::from_matrix(std::move(rho), basis.labels());
}

}  // namespace wernersim
