#include "wernersim/spin.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

namespace wernersim {

namespace {

std::string half_str(int doubled) {
    if (doubled % 2 == 0) return std::to_string(doubled / 2);
    return std::to_string(doubled) + "/2";
}

std::string dicke_label(int two_s, int two_m) {
    return "|" + half_str(two_s) + "," + half_str(two_m) + ">";
}

double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

int as_nonneg_int(double x, const char* ctx) {
    int i = static_cast<int>(std::lround(x));
    if (std::abs(x - i) > 1e-9 || i < 0)
        throw DimensionError(std::string("clebsch_gordan: non-integral ") + ctx);
    return i;
}

}  // namespace

// ---------------------------------------------------------------------------
// DickeBasis / DriveParams

DickeBasis::DickeBasis(int two_s) : two_s_(two_s) {
    if (two_s < 0) throw DimensionError("DickeBasis: negative spin");
    labels_.reserve(two_s + 1);
    for (int i = 0; i <= two_s; ++i) labels_.push_back(dicke_label(two_s, two_s - 2 * i));
}

DickeBasis DickeBasis::from_two_s(int two_s) { return DickeBasis(two_s); }

DickeBasis DickeBasis::from_spin(double s) {
    int two_s = static_cast<int>(std::lround(2.0 * s));
    if (std::abs(2.0 * s - two_s) > 1e-12)
        throw DimensionError("DickeBasis: spin must be a half-integer");
    return DickeBasis(two_s);
}

DriveParams::DriveParams(double omega_abs_, double phi_, double gamma_)
    : omega_abs(omega_abs_), phi(phi_), gamma(gamma_) {
    if (gamma <= 0.0) throw DimensionError("DriveParams: gamma must be positive");
    if (omega_abs < 0.0) throw DimensionError("DriveParams: |Omega| must be nonnegative");
}

// ---------------------------------------------------------------------------
// Clebsch-Gordan (Racah formula)

double clebsch_gordan(double j1, double m1, double j2, double m2, double J,
                      double M) {
    if (std::abs(m1) > j1 + 1e-12 || std::abs(m2) > j2 + 1e-12 ||
        std::abs(M) > J + 1e-12)
        return 0.0;
    if (std::abs(m1 + m2 - M) > 1e-9) return 0.0;
    if (J < std::abs(j1 - j2) - 1e-9 || J > j1 + j2 + 1e-9) return 0.0;

    auto f = [](double x) { return factorial(as_nonneg_int(x, "factorial argument")); };

    double pref = std::sqrt((2.0 * J + 1.0) * f(J + j1 - j2) * f(J - j1 + j2) *
                            f(j1 + j2 - J) / f(j1 + j2 + J + 1.0));
    pref *= std::sqrt(f(J + M) * f(J - M) * f(j1 - m1) * f(j1 + m1) * f(j2 - m2) *
                      f(j2 + m2));

    int kmin = std::max(0, std::max(as_nonneg_int(std::max(0.0, j2 - J - m1), "k"),
                                    as_nonneg_int(std::max(0.0, j1 + m2 - J), "k")));
    int kmax = static_cast<int>(std::lround(
        std::min(j1 + j2 - J, std::min(j1 - m1, j2 + m2))));

    double s = 0.0;
    for (int k = kmin; k <= kmax; ++k) {
        double denom = factorial(k) * f(j1 + j2 - J - k) * f(j1 - m1 - k) *
                       f(j2 + m2 - k) * f(J - j2 + m1 + k) * f(J - j1 - m2 + k);
        s += ((k % 2) ? -1.0 : 1.0) / denom;
    }
    return pref * s;
}

// ---------------------------------------------------------------------------
// Ladder operators

OperatorMatrix lowering_operator(const DickeBasis& basis) {
    const int n = basis.dim();
    const double S = basis.spin();
    Matrix m = Matrix::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) {
        double mm = 0.5 * basis.two_m(i);  // m of the column state
        m(i + 1, i) = std::sqrt(S * (S + 1.0) - mm * (mm - 1.0));
    }
    return OperatorMatrix(std::move(m));
}

OperatorMatrix raising_operator(const DickeBasis& basis) {
    return lowering_operator(basis).adjoint();
}

OperatorMatrix sz_operator(const DickeBasis& basis) {
    const int n = basis.dim();
    Matrix m = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 0.5 * basis.two_m(i);
    return OperatorMatrix(std::move(m));
}

OperatorMatrix displaced_lowering(const DickeBasis& basis, const DriveParams& drive) {
    if (drive.gamma <= 0.0) throw DimensionError("displaced_lowering: gamma must be positive");
    const Complex shift =
        Complex(0.0, 1.0) * drive.omega_over_gamma() * std::exp(Complex(0.0, drive.phi));
    Matrix m = lowering_operator(basis).matrix();
    m += shift * Matrix::Identity(basis.dim(), basis.dim());
    return OperatorMatrix(std::move(m));
}

OperatorMatrix two_atom_positioned_lowering(double xi) {
    // Product basis {ee, eg, ge, gg}; S1^- acts on the first atom, S2^- on the
    // second.
    Matrix m = Matrix::Zero(4, 4);
    m(2, 0) = std::cos(xi);
    m(3, 1) = std::cos(xi);
    m(1, 0) = std::sin(xi);
    m(3, 2) = std::sin(xi);
    return OperatorMatrix(std::move(m));
}

std::vector<Ket> kernel(const OperatorMatrix& op, double tol) {
    if (!op.is_square()) throw DimensionError("kernel: operator must be square");
    Eigen::JacobiSVD<Matrix> svd(op.matrix(), Eigen::ComputeFullV);
    std::vector<Ket> out;
    const auto& sv = svd.singularValues();
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) < tol)
            out.emplace_back(svd.matrixV().col(i), Ket::Norm::Unnormalized);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Bell states

namespace {
const std::vector<std::string> kTwoAtomLabels = {"e⊗e", "e⊗g", "g⊗e",
                                                 "g⊗g"};
Ket bell(int i, int j, double sign) {
    Vector v = Vector::Zero(4);
    v(i) = 1.0 / std::sqrt(2.0);
    v(j) = sign / std::sqrt(2.0);
    return Ket(std::move(v), kTwoAtomLabels);
}
}  // namespace

BellStates bell_states() {
    return BellStates{bell(0, 3, +1.0), bell(0, 3, -1.0), bell(1, 2, +1.0),
                      bell(1, 2, -1.0)};
}

Ket entangled_dark_state(double xi) {
    Vector v = Vector::Zero(4);
    v(2) = std::cos(xi);   // |g,e>
    v(1) = -std::sin(xi);  // |e,g>
    return Ket(std::move(v), kTwoAtomLabels, Ket::Norm::Unnormalized).normalized();
}

// ---------------------------------------------------------------------------
// Coupled basis

std::vector<std::string> product_basis_labels(int n_particles) {
    std::vector<std::string> out;
    const int dim = 1 << n_particles;
    out.reserve(dim);
    for (int s = 0; s < dim; ++s) {
        std::string lab;
        for (int b = n_particles - 1; b >= 0; --b) {
            if (!lab.empty()) lab += "⊗";
            lab += ((s >> b) & 1) ? "g" : "e";
        }
        out.push_back(lab);
    }
    return out;
}

OperatorMatrix product_collective_lowering(int n_particles) {
    const int dim = 1 << n_particles;
    Matrix out = Matrix::Zero(dim, dim);
    for (int s = 0; s < dim; ++s) {
        for (int b = 0; b < n_particles; ++b) {
            // sigma_b^-: e -> g on particle b (bit 0 = e, bit 1 = g).
            int bit = n_particles - 1 - b;
            if (!((s >> bit) & 1)) out(s | (1 << bit), s) += 1.0;
        }
    }
    return OperatorMatrix(std::move(out));
}

namespace {

// One total-spin channel during the pairwise fold: spin, intermediate path,
// and rows (m = S..-S) over the product space coupled so far.
struct Channel {
    int two_s = 0;
    std::vector<int> path;
    Matrix rows;  // (two_s+1) x (product dim)
};

std::vector<Channel> pair_channels() {
    std::vector<Channel> out;
    for (int two_s : {2, 0}) {
        Channel c;
        c.two_s = two_s;
        c.rows = Matrix::Zero(two_s + 1, 4);
        for (int r = 0; r <= two_s; ++r) {
            double m = 0.5 * (two_s - 2 * r);
            for (int i1 = 0; i1 < 2; ++i1)
                for (int i2 = 0; i2 < 2; ++i2) {
                    double m1 = i1 ? -0.5 : 0.5;
                    double m2 = i2 ? -0.5 : 0.5;
                    c.rows(r, 2 * i1 + i2) =
                        clebsch_gordan(0.5, m1, 0.5, m2, 0.5 * two_s, m);
                }
        }
        out.push_back(std::move(c));
    }
    return out;
}

Channel fold(const Channel& a, const Channel& b, int two_s_total, bool record_total) {
    const double ja = 0.5 * a.two_s, jb = 0.5 * b.two_s, J = 0.5 * two_s_total;
    Channel c;
    c.two_s = two_s_total;
    c.path = a.path;
    c.path.push_back(b.two_s);
    if (record_total) c.path.push_back(two_s_total);

    const Eigen::Index pa = a.rows.cols(), pb = b.rows.cols();
    c.rows = Matrix::Zero(two_s_total + 1, pa * pb);
    for (int r = 0; r <= two_s_total; ++r) {
        double M = J - r;
        for (int ra = 0; ra <= a.two_s; ++ra) {
            double ma = ja - ra;
            double mb = M - ma;
            if (std::abs(mb) > jb + 1e-9) continue;
            int rb = static_cast<int>(std::lround(jb - mb));
            double cg = clebsch_gordan(ja, ma, jb, mb, J, M);
            if (cg == 0.0) continue;
            for (Eigen::Index ia = 0; ia < pa; ++ia) {
                if (a.rows(ra, ia) == 0.0) continue;
                c.rows.row(r).segment(ia * pb, pb) +=
                    cg * a.rows(ra, ia) * b.rows.row(rb);
            }
        }
    }
    return c;
}

}  // namespace

CoupledBasis build_coupled_basis(int n_particles) {
    if (n_particles <= 0 || n_particles % 2 != 0)
        throw DimensionError("build_coupled_basis: particle count must be even and positive");

    const std::vector<Channel> pair = pair_channels();
    const int n_pairs = n_particles / 2;

    std::vector<Channel> acc;
    for (const auto& p : pair) {
        Channel c = p;
        c.path = (n_pairs == 1) ? std::vector<int>{} : std::vector<int>{p.two_s};
        acc.push_back(std::move(c));
    }
    for (int k = 1; k < n_pairs; ++k) {
        const bool last = (k == n_pairs - 1);
        std::vector<Channel> next;
        for (const auto& a : acc)
            for (const auto& b : pair)
                for (int ts = a.two_s + b.two_s; ts >= std::abs(a.two_s - b.two_s);
                     ts -= 2)
                    next.push_back(fold(a, b, ts, /*record_total=*/!last));
        acc = std::move(next);
    }

    // Sector order: S descending, then intermediate path descending-lex.
    std::stable_sort(acc.begin(), acc.end(), [](const Channel& x, const Channel& y) {
        if (x.two_s != y.two_s) return x.two_s > y.two_s;
        return x.path > y.path;
    });

    CoupledBasis out;
    out.n_particles_ = n_particles;
    const int dim = 1 << n_particles;
    out.u_ = Matrix::Zero(dim, dim);

    int row = 0, prev_two_s = -1, copy = 0;
    for (const auto& ch : acc) {
        copy = (ch.two_s == prev_two_s) ? copy + 1 : 1;
        prev_two_s = ch.two_s;
        CoupledBasis::Sector sec;
        sec.two_s = ch.two_s;
        sec.copy = copy;
        sec.offset = row;
        sec.dim = ch.two_s + 1;
        sec.path = ch.path;
        out.sectors_.push_back(sec);
        out.u_.block(row, 0, ch.rows.rows(), dim) = ch.rows;
        for (int r = 0; r <= ch.two_s; ++r)
            out.labels_.push_back(dicke_label(ch.two_s, ch.two_s - 2 * r) + "_" +
                                  std::to_string(copy));
        row += ch.two_s + 1;
    }
    if (row != dim)
        throw DimensionError("build_coupled_basis: multiplicity bookkeeping failed");
    return out;
}

const CoupledBasis::Sector& CoupledBasis::find_sector(int two_s, int copy) const {
    for (const auto& s : sectors_)
        if (s.two_s == two_s && s.copy == copy) return s;
    throw DimensionError("CoupledBasis: no sector with requested (S, copy)");
}

int CoupledBasis::index_of(int two_s, int two_m, int copy) const {
    const Sector& s = find_sector(two_s, copy);
    int r = (two_s - two_m) / 2;
    if (r < 0 || r >= s.dim) throw DimensionError("CoupledBasis: m out of range");
    return s.offset + r;
}

Ket CoupledBasis::to_coupled(const Ket& product_state) const {
    if (product_state.dim() != dim())
        throw DimensionError("CoupledBasis: dimension mismatch");
    return Ket(u_ * product_state.amplitudes(), labels_, Ket::Norm::Unnormalized);
}

DensityMatrix CoupledBasis::to_coupled(const DensityMatrix& product_state) const {
    if (product_state.dim() != dim())
        throw DimensionError("CoupledBasis: dimension mismatch");
    return DensityMatrix::from_matrix(u_ * product_state.matrix() * u_.adjoint(),
                                      labels_);
}

DensityMatrix CoupledBasis::to_product(const DensityMatrix& coupled_state) const {
    if (coupled_state.dim() != dim())
        throw DimensionError("CoupledBasis: dimension mismatch");
    return DensityMatrix::from_matrix(u_.adjoint() * coupled_state.matrix() * u_,
                                      product_basis_labels(n_particles_));
}

OperatorMatrix collective_operator_in_coupled_basis(const CoupledBasis& basis,
                                                    CollectiveComponent which) {
    Matrix out = Matrix::Zero(basis.dim(), basis.dim());
    for (const auto& sec : basis.sectors()) {
        DickeBasis db = DickeBasis::from_two_s(sec.two_s);
        Matrix block;
        switch (which) {
            case CollectiveComponent::lower: block = lowering_operator(db).matrix(); break;
            case CollectiveComponent::raise: block = raising_operator(db).matrix(); break;
            case CollectiveComponent::z: block = sz_operator(db).matrix(); break;
        }
        out.block(sec.offset, sec.offset, sec.dim, sec.dim) = block;
    }
    return OperatorMatrix(std::move(out));
}

}  // namespace wernersim
