#ifndef WERNERSIM_SPIN_HPP
#define WERNERSIM_SPIN_HPP

#include <string>
#include <vector>

#include "wernersim/state.hpp"

namespace wernersim {

/// Single spin-S multiplet |S,m> with m = S, S-1, ..., -S.
/// S is stored doubled so half-integers are exact.
class DickeBasis {
  public:
    static DickeBasis from_two_s(int two_s);
    static DickeBasis from_spin(double s);

    int two_s() const { return two_s_; }
    double spin() const { return 0.5 * two_s_; }
    int dim() const { return two_s_ + 1; }
    /// m value of basis index i (doubled).
    int two_m(int i) const { return two_s_ - 2 * i; }
    const std::vector<std::string>& labels() const { return labels_; }

  private:
    explicit DickeBasis(int two_s);
    int two_s_;
    std::vector<std::string> labels_;
};

/// Classical drive: Rabi magnitude |Omega| (units of Gamma), phase phi,
/// and the collective decay constant Gamma (> 0).
struct DriveParams {
    double omega_abs = 0.0;
    double phi = 0.0;
    double gamma = 1.0;

    DriveParams() = default;
    DriveParams(double omega_abs_, double phi_, double gamma_);
    double omega_over_gamma() const { return omega_abs / gamma; }
};

/// Condon-Shortley Clebsch-Gordan coefficient <j1 m1 j2 m2|J M>.
double clebsch_gordan(double j1, double m1, double j2, double m2, double J,
                      double M);

/// S^- with <S,m-1|S^-|S,m> = sqrt(S(S+1) - m(m-1)).
OperatorMatrix lowering_operator(const DickeBasis& basis);
OperatorMatrix raising_operator(const DickeBasis& basis);
OperatorMatrix sz_operator(const DickeBasis& basis);

/// S^- + i(|Omega|/Gamma) e^{i phi} I on the given multiplet.
OperatorMatrix displaced_lowering(const DickeBasis& basis, const DriveParams& drive);

/// R^- = S1^- cos(xi) + S2^- sin(xi) in the product basis {ee, eg, ge, gg}.
OperatorMatrix two_atom_positioned_lowering(double xi);

/// Orthonormal basis of the null space: right singular vectors whose
/// singular value is below tol.
std::vector<Ket> kernel(const OperatorMatrix& op, double tol = tol::kernel_default);

/// The four Bell states in the two-atom product basis.
struct BellStates {
    Ket phi_plus;   // (|ee> + |gg>)/sqrt2
    Ket phi_minus;  // (|ee> - |gg>)/sqrt2
    Ket psi_plus;   // (|eg> + |ge>)/sqrt2  ==  |1,0>
    Ket psi_minus;  // (|eg> - |ge>)/sqrt2  ==  |0,0>
};
BellStates bell_states();

/// Dark state of two_atom_positioned_lowering(xi) orthogonal to |gg>:
/// cos(xi)|g,e> - sin(xi)|e,g>.
Ket entangled_dark_state(double xi);

/// Coupled total-spin basis of 2N spin-1/2 particles. Adjacent particles are
/// coupled pairwise, then the pair spins are folded left to right; repeated
/// total-S values are distinguished by the intermediate spins (the "copy").
/// Copies are ordered by descending lexicographic intermediate-spin tuple,
/// sectors by descending S; m runs downward inside a sector.
class CoupledBasis {
  public:
    struct Sector {
        int two_s = 0;
        int copy = 1;            // 1-based within equal-S sectors
        int offset = 0;          // first basis index of the sector
        int dim = 0;             // 2S+1
        std::vector<int> path;   // doubled intermediate spins
    };

    int n_particles() const { return n_particles_; }
    int dim() const { return static_cast<int>(u_.rows()); }
    /// Unitary mapping product-basis amplitudes to coupled-basis amplitudes.
    const Matrix& u() const { return u_; }
    const std::vector<Sector>& sectors() const { return sectors_; }
    const std::vector<std::string>& labels() const { return labels_; }

    const Sector& find_sector(int two_s, int copy) const;
    /// Basis index of |S, m, copy>.
    int index_of(int two_s, int two_m, int copy) const;

    Ket to_coupled(const Ket& product_state) const;
    DensityMatrix to_coupled(const DensityMatrix& product_state) const;
    DensityMatrix to_product(const DensityMatrix& coupled_state) const;

    friend CoupledBasis build_coupled_basis(int n_particles);

  private:
    CoupledBasis() = default;
    int n_particles_ = 0;
    Matrix u_;
    std::vector<Sector> sectors_;
    std::vector<std::string> labels_;
};

CoupledBasis build_coupled_basis(int n_particles);

enum class CollectiveComponent { lower, raise, z };

/// Collective operator (sum over particles) expressed in the coupled basis:
/// exactly block-diagonal over (S, copy) sectors, each block the standard
/// spin-S matrix.
OperatorMatrix collective_operator_in_coupled_basis(const CoupledBasis& basis,
                                                    CollectiveComponent which);

/// Sum_i sigma_i^- over n spin-1/2 particles in the 2^n product basis.
OperatorMatrix product_collective_lowering(int n_particles);

std::vector<std::string> product_basis_labels(int n_particles);

}  // namespace wernersim

#endif
