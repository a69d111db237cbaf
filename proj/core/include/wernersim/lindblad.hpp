#ifndef WERNERSIM_LINDBLAD_HPP
#define WERNERSIM_LINDBLAD_HPP

#include <optional>
#include <string>
#include <vector>

#include "wernersim/spin.hpp"
#include "wernersim/state.hpp"

namespace wernersim {

enum class ModelTag { cavity_full, two_atom_reduced, driven_collective };

std::string to_string(ModelTag tag);

/// Column-stacking vectorization: vec(rho) with columns stacked.
Vector vectorize(const Matrix& m);
Matrix unvectorize(const Vector& v, int dim);

/// Linear generator of density-matrix evolution, stored as the dense
/// d^2 x d^2 superoperator acting on column-vectorized matrices.
class Liouvillian {
  public:
    struct Sector {
        int two_s = 0;
        int copy = 1;
        int offset = 0;
        int dim = 0;
    };

    Liouvillian(int dim, Matrix superop, ModelTag tag,
                std::vector<Sector> sectors = {},
                std::vector<std::string> basis_labels = {});

    int dim() const { return dim_; }
    const Matrix& matrix() const { return m_; }
    ModelTag tag() const { return tag_; }
    const std::vector<Sector>& sectors() const { return sectors_; }
    const std::vector<std::string>& basis_labels() const { return labels_; }

    /// Projectors onto the conserved (S, copy) sectors; empty when the model
    /// has no sector structure.
    std::vector<OperatorMatrix> sector_projectors() const;

    /// d rho/dt for a given state.
    Matrix apply(const Matrix& rho) const;

    /// max_i |(I^T_vec L)_i|: zero for a trace-preserving generator.
    double trace_preservation_defect() const;

  private:
    int dim_;
    Matrix m_;
    ModelTag tag_;
    std::vector<Sector> sectors_;
    std::vector<std::string> labels_;
};

/// Atom-cavity parameters: coupling g, cavity decay kappa, positional angle
/// xi, and the Fock-space truncation (photon numbers 0..n_max).
struct CavityParams {
    double g = 1.0;
    double kappa = 1.0;
    double xi = 0.0;
    int n_max = 10;

    CavityParams() = default;
    CavityParams(double g_, double kappa_, double xi_, int n_max_);
    double gamma() const { return g * g / kappa; }
};

/// Full two-atom + cavity-mode master equation (resonant interaction picture):
/// d rho/dt = -i[H, rho] - kappa(a^+a rho - 2 a rho a^+ + rho a^+a),
/// H = g (R^- a^+ + R^+ a), R^- = S1^- cos(xi) + S2^- sin(xi).
Liouvillian build_cavity_liouvillian(const CavityParams& p);

/// Collective-decay generator with an arbitrary jump operator R:
/// d rho/dt = -gamma (R^+R^- rho - 2 R^- rho R^+ + rho R^+R^-), R^+ = (R^-)^+.
Liouvillian build_collective_decay_liouvillian(const OperatorMatrix& jump,
                                               double gamma,
                                               ModelTag tag = ModelTag::two_atom_reduced,
                                               std::vector<std::string> labels = {});

/// Reduced two-atom collective decay with R^- = two_atom_positioned_lowering(xi).
Liouvillian build_two_atom_reduced(double xi, double gamma);

/// Coherently driven collective decay on a single spin-S multiplet:
/// d rho/dt = i|Omega| [e^{i phi} S^+ + e^{-i phi} S^-, rho]
///          - Gamma (S^+S^- rho - 2 S^- rho S^+ + rho S^+S^-).
Liouvillian build_driven_collective(const DickeBasis& basis, const DriveParams& drive);

/// Same dynamics on the full coupled basis of 2N particles; block-diagonal
/// over (S, copy) sectors, with sector metadata populated.
Liouvillian build_driven_collective(const CoupledBasis& basis, const DriveParams& drive);

struct StepDiagnostics {
    double time = 0.0;
    double trace_error = 0.0;       // before any renormalization
    double hermiticity_error = 0.0; // before hermitization
    double min_eigenvalue = 0.0;
    double rhs_norm = 0.0;          // max |d rho/dt| entry
    bool renormalized = false;
};

/// Time-ordered (t, state) samples plus per-sample diagnostics.
class Trajectory {
  public:
    Trajectory(std::vector<double> times, std::vector<DensityMatrix> states,
               std::vector<StepDiagnostics> diagnostics);

    const std::vector<double>& times() const { return times_; }
    const std::vector<DensityMatrix>& states() const { return states_; }
    const std::vector<StepDiagnostics>& diagnostics() const { return diags_; }
    const DensityMatrix& final_state() const { return states_.back(); }
    size_t size() const { return times_.size(); }

  private:
    std::vector<double> times_;
    std::vector<DensityMatrix> states_;
    std::vector<StepDiagnostics> diags_;
};

/// Adaptive embedded Runge-Kutta (Dormand-Prince 5(4)), relative tolerance
/// 1e-9, absolute 1e-12, sampled every dt_out. Samples are renormalized only
/// when |trace - 1| > 1e-9 and the event is recorded. Throws StiffnessError on
/// step-size underflow; evolve_expm is the fallback.
Trajectory evolve(const Liouvillian& L, const DensityMatrix& rho0, double t_final,
                  double dt_out);

/// Exact propagator: applies expm(L dt_out) per output step.
Trajectory evolve_expm(const Liouvillian& L, const DensityMatrix& rho0,
                       double t_final, double dt_out);

/// Steady state reached from rho0. With sector metadata: solves L vec(rho) = 0
/// per sector, weighting by the conserved sector populations of rho0, and
/// carries cross-sector coherences through their own (invariant) blocks.
/// Without sectors: spectral projection onto the null space, falling back to
/// integration until ||L vec(rho)||_inf < 1e-11.
DensityMatrix steady_state_from_initial(const Liouvillian& L, const DensityMatrix& rho0);

/// Normalized (R^-)^-1 (R^-)^-dagger: the closed-form steady state of the
/// collective-decay generator when R^- is nonsingular. Throws
/// SingularOperatorError when R^- has a kernel (dark states exist).
DensityMatrix analytic_steady_state(const OperatorMatrix& r_minus,
                                    double* condition_number = nullptr);

/// Rebuilds the cavity model at n_max + delta and returns the trace distance
/// between the final atomic states from atoms (x) vacuum. Cost grows steeply
/// with n_max; intended for small truncations.
double fock_truncation_check(const CavityParams& p, const DensityMatrix& atomic_rho0,
                             double t_final, int delta = 5);

/// Population of the highest Fock level, summed over atomic states.
double top_fock_population(const DensityMatrix& rho, int n_max);

/// Atoms (x) |0><0| on the truncated Fock space.
DensityMatrix with_vacuum(const DensityMatrix& atomic, int n_max);

/// Reduced atomic state of a cavity-model density matrix.
DensityMatrix trace_out_cavity(const DensityMatrix& rho, int n_max);

}  // namespace wernersim

#endif
