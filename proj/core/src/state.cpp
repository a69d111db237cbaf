#include "wernersim/state.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace wernersim {

namespace {

void check_label_count(int dim, const std::vector<std::string>& labels,
                       const char* what) {
    if (!labels.empty() && static_cast<int>(labels.size()) != dim) {
        throw DimensionError(std::string(what) + ": " +
                             std::to_string(labels.size()) + " labels for dimension " +
                             std::to_string(dim));
    }
}

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace

std::vector<std::string> default_labels(int dim) {
    std::vector<std::string> out;
    out.reserve(dim);
    for (int i = 0; i < dim; ++i) out.push_back(std::to_string(i));
    return out;
}

std::vector<std::string> tensor_labels(const std::vector<std::string>& a,
                                       const std::vector<std::string>& b) {
    if (a.empty() || b.empty()) return {};
    std::vector<std::string> out;
    out.reserve(a.size() * b.size());
    for (const auto& la : a)
        for (const auto& lb : b) out.push_back(la + "⊗" + lb);
    return out;
}

// ---------------------------------------------------------------------------
// Ket

Ket::Ket(Vector amplitudes, std::vector<std::string> basis_labels, Norm norm)
    : amps_(std::move(amplitudes)), labels_(std::move(basis_labels)) {
    if (amps_.size() == 0) throw DimensionError("Ket: empty amplitude vector");
    check_label_count(dim(), labels_, "Ket");
    if (norm == Norm::Enforced && !is_normalized()) {
        throw InvalidStateError("Ket: squared norm deviates from 1 by more than " +
                                std::to_string(tol::ket_norm));
    }
}

Ket::Ket(Vector amplitudes, Norm norm)
    : Ket(std::move(amplitudes), std::vector<std::string>{}, norm) {}

Ket Ket::basis_state(int dim, int index, std::vector<std::string> basis_labels) {
    if (index < 0 || index >= dim) throw DimensionError("Ket::basis_state: index out of range");
    Vector v = Vector::Zero(dim);
    v(index) = 1.0;
    return Ket(std::move(v), std::move(basis_labels));
}

bool Ket::is_normalized() const {
    return std::abs(amps_.squaredNorm() - 1.0) <= tol::ket_norm;
}

Ket Ket::normalized() const {
    double n = amps_.norm();
    if (n == 0.0) throw InvalidStateError("Ket: cannot normalize the zero vector");
    return Ket(amps_ / n, labels_);
}

// ---------------------------------------------------------------------------
// OperatorMatrix

OperatorMatrix OperatorMatrix::identity(int dim) {
    return OperatorMatrix(Matrix::Identity(dim, dim));
}

OperatorMatrix OperatorMatrix::zero(int rows, int cols) {
    return OperatorMatrix(Matrix::Zero(rows, cols));
}

Ket OperatorMatrix::apply(const Ket& psi) const {
    if (dim_in() != psi.dim())
        throw DimensionError("OperatorMatrix::apply: dimension mismatch");
    return Ket(m_ * psi.amplitudes(), psi.basis_labels(), Ket::Norm::Unnormalized);
}

OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
    if (a.dim_in() != b.dim_out())
        throw DimensionError("OperatorMatrix: product dimension mismatch");
    return OperatorMatrix(a.matrix() * b.matrix());
}

OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b) {
    if (a.dim_in() != b.dim_in() || a.dim_out() != b.dim_out())
        throw DimensionError("OperatorMatrix: sum dimension mismatch");
    return OperatorMatrix(a.matrix() + b.matrix());
}

OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b) {
    if (a.dim_in() != b.dim_in() || a.dim_out() != b.dim_out())
        throw DimensionError("OperatorMatrix: difference dimension mismatch");
    return OperatorMatrix(a.matrix() - b.matrix());
}

OperatorMatrix operator*(Complex c, const OperatorMatrix& a) {
    return OperatorMatrix(c * a.matrix());
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix DensityMatrix::from_matrix(Matrix entries,
                                         std::vector<std::string> basis_labels) {
    if (entries.rows() != entries.cols())
        throw DimensionError("DensityMatrix: matrix not square");
    const int d = static_cast<int>(entries.rows());
    check_label_count(d, basis_labels, "DensityMatrix");

    double herm = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
    if (herm > tol::hermiticity)
        throw InvalidStateError("DensityMatrix: hermiticity violation " + std::to_string(herm));
    double tr_err = std::abs(entries.trace() - Complex(1.0, 0.0));
    if (tr_err > tol::trace_unit)
        throw InvalidStateError("DensityMatrix: trace deviates from 1 by " + std::to_string(tr_err));

    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (entries + entries.adjoint()),
                                             Eigen::EigenvaluesOnly);
    double lmin = es.eigenvalues().minCoeff();
    if (lmin < tol::min_eigenvalue)
        throw InvalidStateError("DensityMatrix: negative eigenvalue " + std::to_string(lmin));

    return DensityMatrix(std::move(entries), std::move(basis_labels));
}

DensityMatrix DensityMatrix::pure(const Ket& psi) {
    const Vector& a = psi.amplitudes();
    return from_matrix(a * a.adjoint(), psi.basis_labels());
}

double DensityMatrix::trace_error() const {
    return std::abs(m_.trace() - Complex(1.0, 0.0));
}

double DensityMatrix::hermiticity_error() const {
    return (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m_ + m_.adjoint()),
                                             Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

// ---------------------------------------------------------------------------
// Tensor products

namespace {
Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}
}  // namespace

Ket tensor(const Ket& a, const Ket& b) {
    Vector out(a.dim() * b.dim());
    for (int i = 0; i < a.dim(); ++i)
        out.segment(i * b.dim(), b.dim()) = a.amplitude(i) * b.amplitudes();
    return Ket(std::move(out), tensor_labels(a.basis_labels(), b.basis_labels()),
               Ket::Norm::Unnormalized);
}

OperatorMatrix tensor(const OperatorMatrix& a, const OperatorMatrix& b) {
    return OperatorMatrix(kron(a.matrix(), b.matrix()));
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
    return DensityMatrix::from_matrix(
        kron(a.matrix(), b.matrix()),
        tensor_labels(a.basis_labels(), b.basis_labels()));
}

// ---------------------------------------------------------------------------
// Partial trace

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& dims,
                            const std::vector<int>& keep) {
    long prod = 1;
    for (int d : dims) {
        if (d <= 0) throw DimensionError("partial_trace: nonpositive factor dimension");
        prod *= d;
    }
    if (prod != rho.dim())
        throw DimensionError("partial_trace: factor dimensions do not multiply to rho.dim");
    if (keep.empty()) throw DimensionError("partial_trace: keep set is empty");

    const int nf = static_cast<int>(dims.size());
    std::vector<bool> kept(nf, false);
    for (int k : keep) {
        if (k < 0 || k >= nf) throw DimensionError("partial_trace: keep index out of range");
        kept[k] = true;
    }

    // Strides of each factor in the flat composite index (first factor most
    // significant, matching tensor()).
    std::vector<long> stride(nf, 1);
    for (int f = nf - 2; f >= 0; --f) stride[f] = stride[f + 1] * dims[f + 1];

    std::vector<int> keep_sorted(keep);
    std::sort(keep_sorted.begin(), keep_sorted.end());
    keep_sorted.erase(std::unique(keep_sorted.begin(), keep_sorted.end()),
                      keep_sorted.end());

    long dk = 1, dt = 1;
    for (int f = 0; f < nf; ++f) (kept[f] ? dk : dt) *= dims[f];

    // Enumerate kept and traced multi-indices, mapping to flat offsets.
    auto offsets = [&](bool want_kept) {
        std::vector<long> out;
        std::vector<int> active;
        for (int f = 0; f < nf; ++f)
            if (kept[f] == want_kept) active.push_back(f);
        long count = 1;
        for (int f : active) count *= dims[f];
        out.reserve(count);
        std::vector<int> idx(active.size(), 0);
        for (long n = 0; n < count; ++n) {
            long off = 0;
            for (size_t a = 0; a < active.size(); ++a) off += idx[a] * stride[active[a]];
            out.push_back(off);
            for (int a = static_cast<int>(active.size()) - 1; a >= 0; --a) {
                if (++idx[a] < dims[active[a]]) break;
                idx[a] = 0;
            }
        }
        return out;
    };

    const std::vector<long> keep_off = offsets(true);
    const std::vector<long> trace_off = offsets(false);
    const Matrix& m = rho.matrix();

    Matrix out = Matrix::Zero(dk, dk);
    for (long i = 0; i < dk; ++i)
        for (long j = 0; j < dk; ++j) {
            Complex s = 0.0;
            for (long t = 0; t < dt; ++t)
                s += m(keep_off[i] + trace_off[t], keep_off[j] + trace_off[t]);
            out(i, j) = s;
        }

    // Labels survive only if the originals split consistently across factors.
    std::vector<std::string> labels;
    const auto& src = rho.basis_labels();
    if (!src.empty()) {
        std::vector<std::vector<std::string>> parts(nf);
        bool ok = true;
        for (int f = 0; f < nf && ok; ++f) {
            parts[f].resize(dims[f]);
            for (int i = 0; i < dims[f]; ++i) {
                // Probe the label of the state with factor f at i, others at 0.
                long flat = i * stride[f];
                std::string s = src[flat];
                size_t begin = 0;
                int piece = 0;
                std::string found;
                while (piece <= f) {
                    size_t pos = s.find("⊗", begin);
                    std::string tokenpart = (pos == std::string::npos)
                                                ? s.substr(begin)
                                                : s.substr(begin, pos - begin);
                    if (piece == f) found = tokenpart;
                    if (pos == std::string::npos) {
                        if (piece < f) ok = false;
                        break;
                    }
                    begin = pos + 3;  // UTF-8 length of the separator
                    ++piece;
                }
                if (!ok) break;
                parts[f][i] = found;
            }
        }
        if (ok) {
            labels.assign(dk, "");
            for (long i = 0; i < dk; ++i) {
                std::string lab;
                long rem = i;
                for (size_t a = 0; a < keep_sorted.size(); ++a) {
                    long block = 1;
                    for (size_t b = a + 1; b < keep_sorted.size(); ++b)
                        block *= dims[keep_sorted[b]];
                    int comp = static_cast<int>(rem / block);
                    rem %= block;
                    if (a) lab += "⊗";
                    lab += parts[keep_sorted[a]][comp];
                }
                labels[i] = lab;
            }
        }
    }

    return DensityMatrix::from_matrix(std::move(out), std::move(labels));
}

// ---------------------------------------------------------------------------
// Functionals

double fidelity_with_pure(const DensityMatrix& rho, const Ket& psi) {
    if (rho.dim() != psi.dim())
        throw DimensionError("fidelity_with_pure: dimension mismatch");
    Complex v = psi.amplitudes().adjoint() * rho.matrix() * psi.amplitudes();
    if (std::abs(v.imag()) > 1e-12)
        throw InvalidStateError("fidelity_with_pure: imaginary part " +
                                std::to_string(v.imag()));
    return v.real();
}

double von_neumann_entropy_paper(const DensityMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(
        0.5 * (rho.matrix() + rho.matrix().adjoint()), Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        double l = es.eigenvalues()(i);
        if (l < tol::min_eigenvalue)
            throw InvalidStateError("von_neumann_entropy_paper: eigenvalue " +
                                    std::to_string(l));
        l = std::clamp(l, 0.0, 1.0);
        s += xlogx(l);
    }
    return s;
}

double von_neumann_entropy(const DensityMatrix& rho) {
    return -von_neumann_entropy_paper(rho);
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    if (a.dim() != b.dim()) throw DimensionError("trace_distance: dimension mismatch");
    Eigen::JacobiSVD<Matrix> svd(a.matrix() - b.matrix());
    return 0.5 * svd.singularValues().sum();
}

}  // namespace wernersim
