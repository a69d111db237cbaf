#ifndef WERNERSIM_WERNER_HPP
#define WERNERSIM_WERNER_HPP

#include <map>
#include <utility>

#include "wernersim/spin.hpp"
#include "wernersim/state.hpp"

namespace wernersim {

struct WernerSpec {
    double fidelity = 1.0;
    explicit WernerSpec(double f);
};

/// F |Psi-><Psi-| + (1-F)/3 (|Psi+><Psi+| + |Phi+><Phi+| + |Phi-><Phi-|)
/// in the two-atom product basis.
DensityMatrix werner_state(const WernerSpec& spec);
DensityMatrix werner_state(double fidelity);

/// Singlet fidelity of the initial superposition sin(t)|e,g> + cos(t)|g,e>:
/// F = (1 - sin 2t)/2.
double fidelity_from_theta(double theta);

/// Principal inverse: theta = (1/2) asin(1 - 2F). Purifiable (F > 1/2)
/// corresponds to theta in (pi/4 + n pi, 3 pi/4 + n pi).
double theta_for_fidelity(double fidelity);

enum class FidelityClass { classical, purifiable, chsh_violating };

std::string to_string(FidelityClass c);

/// CHSH-violation threshold (2 + 3 sqrt 2)/8.
double chsh_threshold();

/// Strict thresholds: classical for F <= 1/2, chsh_violating for
/// F > (2+3sqrt2)/8, purifiable in between. Boundaries fall to the lower class.
FidelityClass classify_fidelity(double fidelity);

/// Steady populations of the driven spin-1 triplet, ordered (m=1, m=0, m=-1).
struct SteadyPopulations {
    double rho11 = 0.0;
    double rho00 = 0.0;
    double rho_m1m1 = 1.0;
};

/// Exact steady-state populations of the driven collective decay on S=1:
/// with u = (Omega/Gamma)^2,
///   (rho11, rho00, rho-1-1) = (u^2, u^2 + 2u, u^2 + 2u + 4)/(3u^2 + 4u + 4).
/// Equals the diagonal of analytic_steady_state(displaced_lowering(S=1, ...)).
/// All three approach 1/3 as the drive grows.
SteadyPopulations analytic_steady_populations(double omega_over_gamma);

/// beta(Omega/Gamma) = sum_m rho_mm ln rho_mm over the triplet populations;
/// 0 at zero drive, decreasing to ln(1/3) at strong drive.
double beta(double omega_over_gamma);

/// Steady-state entropy (paper sign convention, <= 0):
///   F ln F + (1-F)[ln(1-F) + beta(Omega/Gamma)].
/// An infinite drive argument selects the Werner-state limit beta = ln(1/3).
double steady_entropy_paper(double fidelity, double omega_over_gamma);

/// Steady mixture reached by the undriven positioned decay from
/// sin(t)|e,g> + cos(t)|g,e>: weight |<psi_E|psi0>|^2 = cos^2(xi + t) on the
/// entangled dark state, remainder on |g,g>.
DensityMatrix predicted_two_atom_mixture(double xi, double theta_init);

/// 2N-particle generalized Werner data: singlet fidelity plus per-(S, copy)
/// weights of the non-singlet part (summing to 1 over S >= 1 sectors).
struct GeneralizedWernerSpec {
    int n_particles = 2;
    double fidelity = 0.0;
    /// (two_S, copy) -> weight alpha; Sum alpha = 1 to 1e-12.
    std::map<std::pair<int, int>, double> weights;

    GeneralizedWernerSpec(int n_particles_, double fidelity_,
                          std::map<std::pair<int, int>, double> weights_);
    /// Paper-level alpha^(S): weights summed over copies.
    double alpha_total(int two_s) const;
};

/// Steady-state prediction for sin(t)|e1e2g3g4> + cos(t)|g1g2e3e4>:
/// F = (1 + sin 2t)/3, alpha^(1) = (3/2)(1 - sin 2t)/(2 - sin 2t) on copy 1,
/// alpha^(2) = (1/2)(1 + sin 2t)/(2 - sin 2t).
GeneralizedWernerSpec four_particle_prediction(double theta);

/// F|Psi_s><Psi_s| + (1-F) sum_{S,copy} alpha/(2S+1) sum_m |S,m,c><S,m,c|,
/// diagonal in the coupled basis; the singlet is |0,0>_1.
DensityMatrix generalized_werner_state(const GeneralizedWernerSpec& spec,
                                       const CoupledBasis& basis);

}  // namespace wernersim

#endif
