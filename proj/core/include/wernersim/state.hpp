#ifndef WERNERSIM_STATE_HPP
#define WERNERSIM_STATE_HPP

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wernersim/errors.hpp"

namespace wernersim {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

namespace tol {
// Density-matrix contract.
inline constexpr double hermiticity = 1e-12;
inline constexpr double trace_unit = 1e-12;
inline constexpr double min_eigenvalue = -1e-10;
// Kets.
inline constexpr double ket_norm = 1e-12;
// Null-space detection.
inline constexpr double kernel_default = 1e-10;
// Integrator.
inline constexpr double ode_rel = 1e-9;
inline constexpr double ode_abs = 1e-12;
inline constexpr double renorm_threshold = 1e-9;
// Steady-state residual for the iterative fallback.
inline constexpr double steady_residual = 1e-11;
// Fock-truncation convergence.
inline constexpr double fock_truncation = 1e-8;
}  // namespace tol

/// Pure state over a labeled basis. Normalized unless built with
/// Unnormalized (intermediate construction only).
class Ket {
  public:
    enum class Norm { Enforced, Unnormalized };

    Ket(Vector amplitudes, std::vector<std::string> basis_labels,
        Norm norm = Norm::Enforced);
    explicit Ket(Vector amplitudes, Norm norm = Norm::Enforced);

    static Ket basis_state(int dim, int index,
                           std::vector<std::string> basis_labels = {});

    int dim() const { return static_cast<int>(amps_.size()); }
    const Vector& amplitudes() const { return amps_; }
    Complex amplitude(int i) const { return amps_(i); }
    const std::vector<std::string>& basis_labels() const { return labels_; }
    bool is_normalized() const;

    Ket normalized() const;

  private:
    Vector amps_;
    std::vector<std::string> labels_;
};

/// General complex matrix (Hamiltonians, jump operators, projectors).
/// No constraints beyond shape; may be non-Hermitian.
class OperatorMatrix {
  public:
    OperatorMatrix() = default;
    explicit OperatorMatrix(Matrix entries) : m_(std::move(entries)) {}

    static OperatorMatrix identity(int dim);
    static OperatorMatrix zero(int rows, int cols);

    int dim_in() const { return static_cast<int>(m_.cols()); }
    int dim_out() const { return static_cast<int>(m_.rows()); }
    bool is_square() const { return m_.rows() == m_.cols(); }
    const Matrix& matrix() const { return m_; }

    OperatorMatrix adjoint() const { return OperatorMatrix(m_.adjoint()); }
    Ket apply(const Ket& psi) const;

  private:
    Matrix m_;
};

OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b);
OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b);
OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b);
OperatorMatrix operator*(Complex c, const OperatorMatrix& a);

/// Hermitian, positive-semidefinite, unit-trace matrix over a labeled basis.
/// The contract is checked at construction: max |rho_ij - conj(rho_ji)| <= 1e-12,
/// |tr rho - 1| <= 1e-12, min eigenvalue >= -1e-10.
class DensityMatrix {
  public:
    static DensityMatrix from_matrix(Matrix entries,
                                     std::vector<std::string> basis_labels = {});
    static DensityMatrix pure(const Ket& psi);

    int dim() const { return static_cast<int>(m_.rows()); }
    const Matrix& matrix() const { return m_; }
    const std::vector<std::string>& basis_labels() const { return labels_; }

    double trace_error() const;
    double hermiticity_error() const;
    double min_eigenvalue() const;
    /// Diagonal entry as a real population.
    double population(int i) const { return m_(i, i).real(); }

  private:
    DensityMatrix(Matrix m, std::vector<std::string> labels)
        : m_(std::move(m)), labels_(std::move(labels)) {}

    Matrix m_;
    std::vector<std::string> labels_;
};

std::vector<std::string> default_labels(int dim);
std::vector<std::string> tensor_labels(const std::vector<std::string>& a,
                                       const std::vector<std::string>& b);

/// Kronecker products with basis labels concatenated as "la⊗lb".
Ket tensor(const Ket& a, const Ket& b);
OperatorMatrix tensor(const OperatorMatrix& a, const OperatorMatrix& b);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

/// Reduced density matrix over the kept factors (ascending factor order).
/// dims lists the factor dimensions; their product must equal rho.dim().
DensityMatrix partial_trace(const DensityMatrix& rho,
                            const std::vector<int>& dims,
                            const std::vector<int>& keep);

/// Re <psi|rho|psi>. Throws if the imaginary part exceeds 1e-12.
double fidelity_with_pure(const DensityMatrix& rho, const Ket& psi);

/// Sum_i lambda_i ln lambda_i over eigenvalues (0 ln 0 := 0); always <= 0.
/// Sign convention deliberately matches beta/steady-entropy comparisons.
double von_neumann_entropy_paper(const DensityMatrix& rho);

/// Conventional (nonnegative) von Neumann entropy, -Sum lambda ln lambda.
double von_neumann_entropy(const DensityMatrix& rho);

/// Half the sum of singular values of (a - b); in [0,1].
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

}  // namespace wernersim

#endif
