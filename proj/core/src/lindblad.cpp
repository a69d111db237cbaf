#include "wernersim/lindblad.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

namespace wernersim {

std::string to_string(ModelTag tag) {
    switch (tag) {
        case ModelTag::cavity_full: return "cavity_full";
        case ModelTag::two_atom_reduced: return "two_atom_reduced";
        case ModelTag::driven_collective: return "driven_collective";
    }
    return "unknown";
}

Vector vectorize(const Matrix& m) {
    Vector v(m.size());
    Eigen::Index k = 0;
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r) v(k++) = m(r, c);
    return v;
}

Matrix unvectorize(const Vector& v, int dim) {
    if (v.size() != static_cast<Eigen::Index>(dim) * dim)
        throw DimensionError("unvectorize: size mismatch");
    Matrix m(dim, dim);
    Eigen::Index k = 0;
    for (int c = 0; c < dim; ++c)
        for (int r = 0; r < dim; ++r) m(r, c) = v(k++);
    return m;
}

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// A rho -> (I (x) A) vec(rho);  rho B -> (B^T (x) I) vec(rho)
Matrix left_mult(const Matrix& a) {
    return kron(Matrix::Identity(a.rows(), a.cols()), a);
}
Matrix right_mult(const Matrix& b) {
    return kron(b.transpose(), Matrix::Identity(b.rows(), b.cols()));
}
// C rho D -> (D^T (x) C) vec(rho)
Matrix sandwich(const Matrix& c, const Matrix& d) { return kron(d.transpose(), c); }

Matrix commutator_superop(const Matrix& h) { return left_mult(h) - right_mult(h); }

// -gamma (R^+R rho - 2 R rho R^+ + rho R^+R)
Matrix decay_superop(const Matrix& r, double gamma) {
    Matrix rdr = r.adjoint() * r;
    return -gamma * (left_mult(rdr) + right_mult(rdr) - 2.0 * sandwich(r, r.adjoint()));
}

}  // namespace

// ---------------------------------------------------------------------------
// Liouvillian

Liouvillian::Liouvillian(int dim, Matrix superop, ModelTag tag,
                         std::vector<Sector> sectors,
                         std::vector<std::string> basis_labels)
    : dim_(dim),
      m_(std::move(superop)),
      tag_(tag),
      sectors_(std::move(sectors)),
      labels_(std::move(basis_labels)) {
    if (m_.rows() != m_.cols() || m_.rows() != static_cast<Eigen::Index>(dim_) * dim_)
        throw DimensionError("Liouvillian: superoperator must be dim^2 x dim^2");
}

std::vector<OperatorMatrix> Liouvillian::sector_projectors() const {
    std::vector<OperatorMatrix> out;
    for (const auto& s : sectors_) {
        Matrix p = Matrix::Zero(dim_, dim_);
        for (int i = 0; i < s.dim; ++i) p(s.offset + i, s.offset + i) = 1.0;
        out.emplace_back(std::move(p));
    }
    return out;
}

Matrix Liouvillian::apply(const Matrix& rho) const {
    return unvectorize(m_ * vectorize(rho), dim_);
}

double Liouvillian::trace_preservation_defect() const {
    // trace(L rho) = vec(I)^dagger L vec(rho) for all rho.
    Vector id_vec = vectorize(Matrix::Identity(dim_, dim_));
    return (id_vec.adjoint() * m_).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Builders

CavityParams::CavityParams(double g_, double kappa_, double xi_, int n_max_)
    : g(g_), kappa(kappa_), xi(xi_), n_max(n_max_) {
    // g = 0 is allowed: decoupled atoms with a decaying cavity mode.
    if (g < 0.0 || kappa <= 0.0)
        throw DimensionError("CavityParams: need g >= 0 and kappa > 0");
    if (n_max < 1) throw DimensionError("CavityParams: n_max must be >= 1");
}

Liouvillian build_cavity_liouvillian(const CavityParams& p) {
    if (p.n_max < 1) throw DimensionError("build_cavity_liouvillian: n_max must be >= 1");
    const int nc = p.n_max + 1;
    const int d = 4 * nc;

    Matrix a = Matrix::Zero(nc, nc);
    for (int n = 1; n < nc; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));

    Matrix rm = two_atom_positioned_lowering(p.xi).matrix();
    Matrix rm_full = kron(rm, Matrix::Identity(nc, nc));
    Matrix a_full = kron(Matrix::Identity(4, 4), a);

    Matrix h = p.g * (rm_full * a_full.adjoint() + rm_full.adjoint() * a_full);
    Matrix L = Complex(0, -1) * commutator_superop(h) + decay_superop(a_full, p.kappa);

    std::vector<std::string> fock;
    for (int n = 0; n < nc; ++n) fock.push_back(std::to_string(n));
    return Liouvillian(d, std::move(L), ModelTag::cavity_full, {},
                       tensor_labels(product_basis_labels(2), fock));
}

Liouvillian build_collective_decay_liouvillian(const OperatorMatrix& jump,
                                               double gamma, ModelTag tag,
                                               std::vector<std::string> labels) {
    if (!jump.is_square())
        throw DimensionError("build_collective_decay_liouvillian: jump operator must be square");
    if (gamma <= 0.0)
        throw DimensionError("build_collective_decay_liouvillian: gamma must be positive");
    return Liouvillian(jump.dim_in(), decay_superop(jump.matrix(), gamma), tag, {},
                       std::move(labels));
}

Liouvillian build_two_atom_reduced(double xi, double gamma) {
    return build_collective_decay_liouvillian(two_atom_positioned_lowering(xi), gamma,
                                              ModelTag::two_atom_reduced,
                                              product_basis_labels(2));
}

namespace {
Matrix driven_superop(const Matrix& sm, const DriveParams& drive) {
    Matrix sp = sm.adjoint();
    Matrix k = std::exp(Complex(0, drive.phi)) * sp + std::exp(Complex(0, -drive.phi)) * sm;
    return Complex(0, drive.omega_abs) * commutator_superop(k) +
           decay_superop(sm, drive.gamma);
}
}  // namespace

Liouvillian build_driven_collective(const DickeBasis& basis, const DriveParams& drive) {
    Matrix sm = lowering_operator(basis).matrix();
    std::vector<Liouvillian::Sector> sectors = {{basis.two_s(), 1, 0, basis.dim()}};
    return Liouvillian(basis.dim(), driven_superop(sm, drive),
                       ModelTag::driven_collective, std::move(sectors), basis.labels());
}

Liouvillian build_driven_collective(const CoupledBasis& basis, const DriveParams& drive) {
    Matrix sm =
        collective_operator_in_coupled_basis(basis, CollectiveComponent::lower).matrix();
    std::vector<Liouvillian::Sector> sectors;
    for (const auto& s : basis.sectors())
        sectors.push_back({s.two_s, s.copy, s.offset, s.dim});
    return Liouvillian(basis.dim(), driven_superop(sm, drive),
                       ModelTag::driven_collective, std::move(sectors), basis.labels());
}

// ---------------------------------------------------------------------------
// Trajectory

Trajectory::Trajectory(std::vector<double> times, std::vector<DensityMatrix> states,
                       std::vector<StepDiagnostics> diagnostics)
    : times_(std::move(times)), states_(std::move(states)), diags_(std::move(diagnostics)) {
    if (times_.size() != states_.size() || times_.size() != diags_.size())
        throw DimensionError("Trajectory: inconsistent sample counts");
    for (size_t i = 1; i < times_.size(); ++i)
        if (times_[i] <= times_[i - 1])
            throw DimensionError("Trajectory: times must be strictly increasing");
}

namespace {

std::vector<double> sample_times(double t_final, double dt_out) {
    if (t_final <= 0.0) throw DimensionError("evolve: t_final must be positive");
    if (dt_out <= 0.0) throw DimensionError("evolve: dt_out must be positive");
    std::vector<double> ts;
    for (double t = dt_out; t < t_final - 1e-12 * t_final; t += dt_out) ts.push_back(t);
    ts.push_back(t_final);
    return ts;
}

struct SampleRecord {
    DensityMatrix state;
    StepDiagnostics diag;
};

SampleRecord make_sample(const Liouvillian& L, Matrix rho, double t) {
    StepDiagnostics d;
    d.time = t;
    d.trace_error = std::abs(rho.trace() - Complex(1.0, 0.0));
    d.hermiticity_error = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    rho = 0.5 * (rho + rho.adjoint().eval());
    if (d.trace_error > tol::renorm_threshold) {
        rho /= rho.trace().real();
        d.renormalized = true;
    }
    d.rhs_norm = L.apply(rho).cwiseAbs().maxCoeff();
    // Engine-level tolerances: integration error may exceed the strict
    // construction bounds without signalling an invalid state.
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
    d.min_eigenvalue = es.eigenvalues().minCoeff();
    if (d.min_eigenvalue < -1e-8)
        throw InvalidStateError("evolve: sample lost positivity, min eigenvalue " +
                                std::to_string(d.min_eigenvalue));
    double tr_err = std::abs(rho.trace() - Complex(1.0, 0.0));
    if (tr_err > 1e-12) rho /= rho.trace().real();
    return SampleRecord{DensityMatrix::from_matrix(std::move(rho), L.basis_labels()), d};
}

// Dormand-Prince 5(4) coefficients.
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                 A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247,
                 A64 = 49.0 / 176, A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192,
                 B5 = -2187.0 / 6784, B6 = 11.0 / 84;
constexpr double E1 = B1 - 5179.0 / 57600, E3 = B3 - 7571.0 / 16695,
                 E4 = B4 - 393.0 / 640, E5 = B5 + 92097.0 / 339200,
                 E6 = B6 - 187.0 / 2100, E7 = -1.0 / 40;

}  // namespace

Trajectory evolve(const Liouvillian& L, const DensityMatrix& rho0, double t_final,
                  double dt_out) {
    if (rho0.dim() != L.dim()) throw DimensionError("evolve: dimension mismatch");
    const auto ts = sample_times(t_final, dt_out);
    const Matrix& A = L.matrix();

    Vector y = vectorize(rho0.matrix());
    double t = 0.0;
    double dt = std::min(dt_out, 1e-2 / std::max(1.0, A.cwiseAbs().maxCoeff()));
    long total_steps = 0;
    constexpr long kMaxSteps = 20'000'000;

    std::vector<double> times{0.0};
    std::vector<DensityMatrix> states{rho0};
    std::vector<StepDiagnostics> diags;
    {
        auto s0 = make_sample(L, rho0.matrix(), 0.0);
        diags.push_back(s0.diag);
    }

    Vector k1 = A * y;
    for (double target : ts) {
        while (t < target - 1e-14 * std::max(1.0, target)) {
            dt = std::min(dt, target - t);
            if (dt < 1e-14 * std::max(1.0, std::abs(t)))
                throw StiffnessError(
                    "evolve: step size underflow at t=" + std::to_string(t) +
                    "; use evolve_expm (exact propagator) for this regime");
            if (++total_steps > kMaxSteps)
                throw StiffnessError(
                    "evolve: step budget exhausted; use evolve_expm for this regime");

            Vector k2 = A * (y + dt * (A21 * k1));
            Vector k3 = A * (y + dt * (A31 * k1 + A32 * k2));
            Vector k4 = A * (y + dt * (A41 * k1 + A42 * k2 + A43 * k3));
            Vector k5 = A * (y + dt * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
            Vector k6 = A * (y + dt * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
            Vector y5 = y + dt * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
            Vector k7 = A * y5;
            Vector err_v = dt * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);

            double err = 0.0;
            for (Eigen::Index i = 0; i < y.size(); ++i) {
                double sc = tol::ode_abs +
                            tol::ode_rel * std::max(std::abs(y(i)), std::abs(y5(i)));
                err += std::norm(err_v(i)) / (sc * sc);
            }
            err = std::sqrt(err / static_cast<double>(y.size()));

            if (err <= 1.0) {
                t += dt;
                y = std::move(y5);
                k1 = std::move(k7);  // first-same-as-last
            }
            double factor = (err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0;
            dt *= std::clamp(factor, 0.2, 5.0);
        }
        t = target;
        auto s = make_sample(L, unvectorize(y, L.dim()), t);
        if (s.diag.renormalized) y = vectorize(s.state.matrix());
        times.push_back(t);
        states.push_back(s.state);
        diags.push_back(s.diag);
    }
    return Trajectory(std::move(times), std::move(states), std::move(diags));
}

Trajectory evolve_expm(const Liouvillian& L, const DensityMatrix& rho0, double t_final,
                       double dt_out) {
    if (rho0.dim() != L.dim()) throw DimensionError("evolve_expm: dimension mismatch");
    const auto ts = sample_times(t_final, dt_out);

    std::vector<double> times{0.0};
    std::vector<DensityMatrix> states{rho0};
    std::vector<StepDiagnostics> diags{make_sample(L, rho0.matrix(), 0.0).diag};

    // Sample times are integer multiples of dt_out except possibly the last.
    Matrix P = (L.matrix() * dt_out).exp();
    Vector y = vectorize(rho0.matrix());
    double t = 0.0;
    for (double target : ts) {
        double step = target - t;
        if (std::abs(step - dt_out) < 1e-12 * std::max(1.0, dt_out)) {
            y = P * y;
        } else {
            y = (L.matrix() * step).exp() * y;
        }
        t = target;
        auto s = make_sample(L, unvectorize(y, L.dim()), t);
        if (s.diag.renormalized) y = vectorize(s.state.matrix());
        times.push_back(t);
        states.push_back(s.state);
        diags.push_back(s.diag);
    }
    return Trajectory(std::move(times), std::move(states), std::move(diags));
}

// ---------------------------------------------------------------------------
// Steady states

namespace {

// Flat vec index of entry (r, c) under column stacking.
inline Eigen::Index vidx(int r, int c, int d) {
    return static_cast<Eigen::Index>(c) * d + r;
}

// Restriction of L to the invariant block of matrix units |row in R><col in C|.
Matrix block_restriction(const Matrix& L, int d, int row_off, int row_dim, int col_off,
                         int col_dim) {
    const int n = row_dim * col_dim;
    Matrix sub(n, n);
    for (int c2 = 0; c2 < col_dim; ++c2)
        for (int r2 = 0; r2 < row_dim; ++r2)
            for (int c1 = 0; c1 < col_dim; ++c1)
                for (int r1 = 0; r1 < row_dim; ++r1)
                    sub(c1 * row_dim + r1, c2 * row_dim + r2) =
                        L(vidx(row_off + r1, col_off + c1, d),
                          vidx(row_off + r2, col_off + c2, d));
    return sub;
}

Matrix block_of(const Matrix& rho, int row_off, int row_dim, int col_off, int col_dim) {
    return rho.block(row_off, col_off, row_dim, col_dim);
}

// Unique trace-one steady state of a sector block; throws on degeneracy.
Matrix sector_steady(const Matrix& L, int d, const Liouvillian::Sector& s) {
    Matrix sub = block_restriction(L, d, s.offset, s.dim, s.offset, s.dim);
    Eigen::JacobiSVD<Matrix> svd(sub, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double cutoff = 1e-10 * std::max(1.0, sv(0));
    int null_dim = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) < cutoff) ++null_dim;
    if (null_dim != 1)
        throw DegeneracyError("steady_state_from_initial: sector (2S=" +
                              std::to_string(s.two_s) + ", copy " + std::to_string(s.copy) +
                              ") has null-space dimension " + std::to_string(null_dim));
    Vector v = svd.matrixV().col(sv.size() - 1);
    Matrix m(s.dim, s.dim);
    for (int c = 0; c < s.dim; ++c)
        for (int r = 0; r < s.dim; ++r) m(r, c) = v(c * s.dim + r);
    m = 0.5 * (m + m.adjoint().eval());
    Complex tr = m.trace();
    if (std::abs(tr) < 1e-12)
        throw DegeneracyError("steady_state_from_initial: traceless sector null vector");
    return m / tr;
}

// Limit of the cross-sector coherence block: spectral projection onto the
// zero modes of the block restriction.
Matrix cross_block_limit(const Matrix& sub, const Matrix& b0) {
    Eigen::ComplexEigenSolver<Matrix> es(sub);
    if (es.info() != Eigen::Success)
        throw DegeneracyError("steady_state_from_initial: eigensolver failed on coherence block");
    const auto& ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev(i).real() > 1e-9)
            throw DegeneracyError("steady_state_from_initial: growing coherence mode");
    Vector v0(b0.size());
    Eigen::Index k = 0;
    for (Eigen::Index c = 0; c < b0.cols(); ++c)
        for (Eigen::Index r = 0; r < b0.rows(); ++r) v0(k++) = b0(r, c);
    Vector coeff = es.eigenvectors().fullPivLu().solve(v0);
    Vector vlim = Vector::Zero(v0.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (std::abs(ev(i)) < 1e-10) vlim += coeff(i) * es.eigenvectors().col(i);
    Matrix out(b0.rows(), b0.cols());
    k = 0;
    for (Eigen::Index c = 0; c < b0.cols(); ++c)
        for (Eigen::Index r = 0; r < b0.rows(); ++r) out(r, c) = vlim(k++);
    return out;
}

DensityMatrix steady_by_integration(const Liouvillian& L, const DensityMatrix& rho0) {
    const int d = L.dim();
    double scale = std::max(1.0, L.matrix().cwiseAbs().maxCoeff());
    double horizon = 1.0;
    Matrix P = (L.matrix() * horizon).exp();
    Vector y = vectorize(rho0.matrix());
    for (int iter = 0; iter < 200; ++iter) {
        y = P * y;
        double res = (L.matrix() * y).cwiseAbs().maxCoeff();
        if (res < tol::steady_residual) {
            Matrix rho = unvectorize(y, d);
            rho = 0.5 * (rho + rho.adjoint().eval());
            rho /= rho.trace().real();
            return DensityMatrix::from_matrix(std::move(rho), L.basis_labels());
        }
        if (iter % 4 == 3) {
            P = P * P;  // double the horizon
            horizon *= 2.0;
        }
        if (horizon > 1e12 / scale)
            throw DegeneracyError("steady_state_from_initial: integration fallback did not settle");
    }
    throw DegeneracyError("steady_state_from_initial: integration fallback did not settle");
}

}  // namespace

DensityMatrix steady_state_from_initial(const Liouvillian& L, const DensityMatrix& rho0) {
    if (rho0.dim() != L.dim())
        throw DimensionError("steady_state_from_initial: dimension mismatch");
    const int d = L.dim();

    if (!L.sectors().empty()) {
        const auto& secs = L.sectors();
        Matrix out = Matrix::Zero(d, d);
        for (const auto& s : secs) {
            double w = 0.0;
            for (int i = 0; i < s.dim; ++i) w += rho0.matrix()(s.offset + i, s.offset + i).real();
            if (w < 1e-14) continue;
            out.block(s.offset, s.offset, s.dim, s.dim) =
                w * sector_steady(L.matrix(), d, s);
        }
        for (size_t i = 0; i < secs.size(); ++i) {
            for (size_t j = i + 1; j < secs.size(); ++j) {
                Matrix b0 = block_of(rho0.matrix(), secs[i].offset, secs[i].dim,
                                     secs[j].offset, secs[j].dim);
                if (b0.cwiseAbs().maxCoeff() < 1e-14) continue;
                Matrix sub = block_restriction(L.matrix(), d, secs[i].offset, secs[i].dim,
                                               secs[j].offset, secs[j].dim);
                Matrix blim = cross_block_limit(sub, b0);
                out.block(secs[i].offset, secs[j].offset, secs[i].dim, secs[j].dim) = blim;
                out.block(secs[j].offset, secs[i].offset, secs[j].dim, secs[i].dim) =
                    blim.adjoint();
            }
        }
        double res = (L.matrix() * vectorize(out)).cwiseAbs().maxCoeff();
        if (res > 1e-9)
            throw DegeneracyError("steady_state_from_initial: sector solution residual " +
                                  std::to_string(res));
        out = 0.5 * (out + out.adjoint().eval());
        out /= out.trace().real();
        return DensityMatrix::from_matrix(std::move(out), L.basis_labels());
    }

    if (d <= 32) {
        // Spectral projection onto the null space of the full superoperator.
        Eigen::ComplexEigenSolver<Matrix> es(L.matrix());
        if (es.info() == Eigen::Success) {
            const auto& ev = es.eigenvalues();
            bool ok = true;
            for (Eigen::Index i = 0; i < ev.size(); ++i)
                if (ev(i).real() > 1e-9) ok = false;
            if (ok) {
                Vector coeff = es.eigenvectors().fullPivLu().solve(vectorize(rho0.matrix()));
                Vector vlim = Vector::Zero(ev.size());
                for (Eigen::Index i = 0; i < ev.size(); ++i)
                    if (std::abs(ev(i)) < 1e-10) vlim += coeff(i) * es.eigenvectors().col(i);
                double res = (L.matrix() * vlim).cwiseAbs().maxCoeff();
                if (res < tol::steady_residual) {
                    Matrix rho = unvectorize(vlim, d);
                    rho = 0.5 * (rho + rho.adjoint().eval());
                    double tr = rho.trace().real();
                    if (std::abs(tr - 1.0) < 1e-6) {
                        rho /= tr;
                        return DensityMatrix::from_matrix(std::move(rho), L.basis_labels());
                    }
                }
            }
        }
    }
    return steady_by_integration(L, rho0);
}

DensityMatrix analytic_steady_state(const OperatorMatrix& r_minus,
                                    double* condition_number) {
    if (!r_minus.is_square())
        throw DimensionError("analytic_steady_state: operator must be square");
    Eigen::JacobiSVD<Matrix> svd(r_minus.matrix());
    const auto& sv = svd.singularValues();
    double smin = sv(sv.size() - 1), smax = sv(0);
    if (condition_number) *condition_number = (smin > 0.0) ? smax / smin : INFINITY;
    if (smin <= 1e-12 * std::max(1.0, smax))
        throw SingularOperatorError(
            "analytic_steady_state: R^- is singular; steady states are dark states "
            "spanned by kernel(R^-)");
    Matrix inv = r_minus.matrix().partialPivLu().solve(
        Matrix::Identity(r_minus.dim_in(), r_minus.dim_in()));
    Matrix rho = inv * inv.adjoint();
    rho /= rho.trace().real();
    rho = 0.5 * (rho + rho.adjoint().eval());
    return DensityMatrix::from_matrix(std::move(rho));
}

// ---------------------------------------------------------------------------
// Cavity helpers

DensityMatrix with_vacuum(const DensityMatrix& atomic, int n_max) {
    const int nc = n_max + 1;
    Matrix vac = Matrix::Zero(nc, nc);
    vac(0, 0) = 1.0;
    std::vector<std::string> fock;
    for (int n = 0; n < nc; ++n) fock.push_back(std::to_string(n));
    return tensor(atomic, DensityMatrix::from_matrix(std::move(vac), fock));
}

DensityMatrix trace_out_cavity(const DensityMatrix& rho, int n_max) {
    return partial_trace(rho, {4, n_max + 1}, {0});
}

double top_fock_population(const DensityMatrix& rho, int n_max) {
    const int nc = n_max + 1;
    double p = 0.0;
    for (int a = 0; a < 4; ++a) p += rho.matrix()(a * nc + n_max, a * nc + n_max).real();
    return p;
}

double fock_truncation_check(const CavityParams& p, const DensityMatrix& atomic_rho0,
                             double t_final, int delta) {
    CavityParams bigger = p;
    bigger.n_max = p.n_max + delta;
    auto run = [&](const CavityParams& q) {
        Liouvillian L = build_cavity_liouvillian(q);
        Trajectory tr = evolve_expm(L, with_vacuum(atomic_rho0, q.n_max), t_final,
                                    t_final / 8.0);
        return trace_out_cavity(tr.final_state(), q.n_max);
    };
    return trace_distance(run(p), run(bigger));
}

}  // namespace wernersim
