#include "covlaw/covariance.hpp"

#include "covlaw/errors.hpp"

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

namespace covlaw {

// ---------------------------------------------------------------------------
// HermitianTuple

HermitianTuple::HermitianTuple(int n, std::vector<std::string> indices,
                               std::vector<Matrix> matrices, double tol)
    : n_(n), indices_(std::move(indices)), matrices_(std::move(matrices)) {
    if (indices_.size() != matrices_.size()) {
        throw DomainError("HermitianTuple: index/matrix count mismatch");
    }
    for (std::size_t k = 0; k < matrices_.size(); ++k) {
        const Matrix& a = matrices_[k];
        if (a.rows() != n_ || a.cols() != n_) {
            throw DomainError("HermitianTuple: matrix '" + indices_[k] + "' is not " +
                              std::to_string(n_) + "x" + std::to_string(n_));
        }
        const double defect = hermitian_defect(a);
        if (defect > tol * std::max(1.0, a.cwiseAbs().maxCoeff())) {
            throw DomainError("HermitianTuple: matrix '" + indices_[k] +
                              "' is not Hermitian (defect " + std::to_string(defect) + ")");
        }
    }
}

const Matrix& HermitianTuple::at(const std::string& name) const {
    for (std::size_t k = 0; k < indices_.size(); ++k) {
        if (indices_[k] == name) return matrices_[k];
    }
    throw DomainError("HermitianTuple: no matrix for '" + name + "'");
}

bool HermitianTuple::contains(const std::string& name) const {
    return std::find(indices_.begin(), indices_.end(), name) != indices_.end();
}

std::string to_string(BaseAlgebra base) { return base == BaseAlgebra::Full ? "full" : "diagonal"; }

BaseAlgebra base_from_string(const std::string& s) {
    if (s == "full") return BaseAlgebra::Full;
    if (s == "diagonal") return BaseAlgebra::Diagonal;
    throw ConfigError("unknown base algebra '" + s + "' (expected full|diagonal)");
}

// ---------------------------------------------------------------------------
// DiscreteCovariance internals

struct DiscreteCovariance::Impl {
    int n = 0;
    std::vector<std::string> indices;
    BaseAlgebra base = BaseAlgebra::Full;
    std::optional<Matrix> dense;     // dense form
    std::vector<RealMatrix> tables;  // kernel form, |F|^2 tables
    std::size_t choi_cap = DiscreteCovariance::default_choi_cap;

    mutable std::once_flag choi_once, kraus_once, factors_once, norm_once;
    mutable Matrix lazy_choi;
    mutable std::vector<HermitianTuple> kraus;
    mutable std::vector<RealMatrix> factors;
    mutable double norm = -1.0;

    int m() const { return static_cast<int>(indices.size()); }
    std::size_t dim() const { return static_cast<std::size_t>(m()) * n * n; }
    Eigen::Index row(int i, int s, int t) const {
        return static_cast<Eigen::Index>(i) * n * n + static_cast<Eigen::Index>(s) * n + t;
    }
    const RealMatrix& table(int i, int j) const {
        return tables[static_cast<std::size_t>(i * m() + j)];
    }
    RealMatrix cell_block(int s, int t) const {
        RealMatrix b(m(), m());
        for (int i = 0; i < m(); ++i)
            for (int j = 0; j < m(); ++j) b(i, j) = table(i, j)(s, t);
        return b;
    }
};

namespace {

void check_indices(const std::vector<std::string>& indices) {
    if (indices.empty()) throw DomainError("covariance needs a nonempty index set");
    auto sorted = indices;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw DomainError("covariance index names must be distinct");
    }
}

std::string basis_pair(const std::vector<std::string>& idx, int i, int s, int t, int j, int s2,
                       int t2) {
    std::ostringstream os;
    os << "eta_{" << idx[i] << "," << idx[j] << "} at E_{" << s << "," << t << "} / E_{" << s2
       << "," << t2 << "}";
    return os.str();
}

// Checks Hermiticity, positivity, trace symmetry (and the D_n conditions when base is
// diagonal) of a dense Choi matrix. Returns its largest eigenvalue.
double verify_dense(const CovarianceTolerances& tol, int n, const std::vector<std::string>& idx,
                    BaseAlgebra base, const Matrix& c) {
    const int m = static_cast<int>(idx.size());
    const double scale = std::max(1e-300, c.cwiseAbs().maxCoeff());
    const double herm = hermitian_defect(c);
    if (herm > tol.symmetry * std::max(1.0, scale)) {
        throw InvariantViolation("covariance is not *-preserving: Choi matrix not Hermitian (defect " +
                                     std::to_string(herm) + ")",
                                 herm);
    }
    auto at = [&](int i, int s, int t, int j, int s2, int t2) {
        const Eigen::Index nn = static_cast<Eigen::Index>(n) * n;
        return c(i * nn + s * n + t, j * nn + s2 * n + t2);
    };
    // Tr(eta_ij(E_st) E_s't') = eta_ij(E_st)_{t's'} = C[(i,t',s),(j,s',t)]
    // Tr(E_st eta_ji(E_s't')) = eta_ji(E_s't')_{ts} = C[(j,t,s'),(i,s,t')]
    double worst = 0.0;
    std::string where;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int s = 0; s < n; ++s)
                for (int t = 0; t < n; ++t)
                    for (int s2 = 0; s2 < n; ++s2)
                        for (int t2 = 0; t2 < n; ++t2) {
                            const double r = std::abs(at(i, t2, s, j, s2, t) - at(j, t, s2, i, s, t2));
                            if (r > worst) {
                                worst = r;
                                where = basis_pair(idx, i, s, t, j, s2, t2);
                            }
                        }
    if (worst > tol.symmetry * std::max(1.0, scale)) {
        throw InvariantViolation("covariance is not trace-symmetric: residual " +
                                     std::to_string(worst) + " at " + where,
                                 worst);
    }
    if (base == BaseAlgebra::Diagonal) {
        // eta_ij(E_tt') must vanish for t != t' and be diagonal for t = t':
        // C[(i,s,t),(j,s',t')] = 0 unless s = s' and t = t'.
        double off = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                for (int s = 0; s < n; ++s)
                    for (int t = 0; t < n; ++t)
                        for (int s2 = 0; s2 < n; ++s2)
                            for (int t2 = 0; t2 < n; ++t2)
                                if (s != s2 || t != t2) off = std::max(off, std::abs(at(i, s, t, j, s2, t2)));
        if (off > tol.symmetry * std::max(1.0, scale)) {
            throw InvariantViolation("covariance declared diagonal-based is not D_n-valued (residual " +
                                         std::to_string(off) + ")",
                                     off);
        }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(c, Eigen::EigenvaluesOnly);
    const RealVector& ev = es.eigenvalues();
    const double lmax = ev.size() ? ev(ev.size() - 1) : 0.0;
    const double lmin = ev.size() ? ev(0) : 0.0;
    if (lmin < -tol.psd_relative * std::max(lmax, 1e-300) && lmin < -1e-300) {
        throw InvariantViolation("covariance is not completely positive: lambda_min(Choi) = " +
                                     std::to_string(lmin),
                                 lmin);
    }
    return std::max(lmax, 0.0);
}

struct BasisEntry {
    int pos;  // s*n + t
    Complex value;
};

// Nonzero entries of each Hermitian basis element, in the same order as hermitian_basis().
std::vector<std::vector<BasisEntry>> hermitian_basis_sparse(int n) {
    std::vector<std::vector<BasisEntry>> basis;
    basis.reserve(static_cast<std::size_t>(n) * n);
    const double r = 1.0 / std::sqrt(2.0);
    for (int s = 0; s < n; ++s) basis.push_back({{s * n + s, 1.0}});
    for (int s = 0; s < n; ++s)
        for (int t = s + 1; t < n; ++t) {
            basis.push_back({{s * n + t, r}, {t * n + s, r}});
            basis.push_back({{s * n + t, Complex(0, r)}, {t * n + s, Complex(0, -r)}});
        }
    return basis;
}

}  // namespace

std::vector<Matrix> hermitian_basis(int n) {
    std::vector<Matrix> out;
    for (const auto& entries : hermitian_basis_sparse(n)) {
        Matrix e = Matrix::Zero(n, n);
        for (const auto& [pos, v] : entries) e(pos / n, pos % n) = v;
        out.push_back(std::move(e));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Construction

DiscreteCovariance DiscreteCovariance::from_maps(int n, std::vector<std::string> indices,
                                                 const CovarianceFn& apply_fn, BaseAlgebra base,
                                                 CovarianceTolerances tol) {
    if (n < 1) throw DomainError("covariance dimension must be >= 1");
    check_indices(indices);
    const int m = static_cast<int>(indices.size());

    // Linearity spot check on random combinations.
    std::mt19937_64 gen(0x5eedULL + static_cast<unsigned>(n));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const Matrix a = random_matrix(n, gen), b = random_matrix(n, gen);
            const Complex alpha(0.7, -1.3);
            const Matrix lhs = apply_fn(i, j, alpha * a + b);
            const Matrix rhs = alpha * apply_fn(i, j, a) + apply_fn(i, j, b);
            const double err = (lhs - rhs).cwiseAbs().maxCoeff();
            const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
            if (err > tol.linearity * scale) {
                throw DomainError("covariance map " + indices[i] + "," + indices[j] +
                                  " is not linear (residual " + std::to_string(err) + ")");
            }
        }

    const Eigen::Index nn = static_cast<Eigen::Index>(n) * n;
    Matrix c = Matrix::Zero(m * nn, m * nn);
    // choi[(i,s,t),(j,s',t')] = eta_ij(E_{t,t'})_{s,s'}
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int t = 0; t < n; ++t)
                for (int t2 = 0; t2 < n; ++t2) {
                    const Matrix img = apply_fn(i, j, matrix_unit(n, t, t2));
                    if (img.rows() != n || img.cols() != n) {
                        throw DomainError("covariance map returned a matrix of the wrong size");
                    }
                    for (int s = 0; s < n; ++s)
                        for (int s2 = 0; s2 < n; ++s2) c(i * nn + s * n + t, j * nn + s2 * n + t2) = img(s, s2);
                }
    return from_choi(n, std::move(indices), base, std::move(c), tol);
}

DiscreteCovariance DiscreteCovariance::from_choi(int n, std::vector<std::string> indices,
                                                 BaseAlgebra base, Matrix choi,
                                                 CovarianceTolerances tol) {
    if (n < 1) throw DomainError("covariance dimension must be >= 1");
    check_indices(indices);
    const Eigen::Index d = static_cast<Eigen::Index>(indices.size()) * n * n;
    if (choi.rows() != d || choi.cols() != d) {
        throw DomainError("Choi matrix has dimension " + std::to_string(choi.rows()) + ", expected " +
                          std::to_string(d));
    }
    const double lmax = verify_dense(tol, n, indices, base, choi);
    auto impl = std::make_shared<Impl>();
    impl->n = n;
    impl->indices = std::move(indices);
    impl->base = base;
    impl->dense = std::move(choi);
    impl->norm = lmax;
    std::call_once(impl->norm_once, [] {});
    return DiscreteCovariance(std::move(impl));
}

DiscreteCovariance DiscreteCovariance::from_kernel_table(int n, std::vector<std::string> indices,
                                                         std::vector<RealMatrix> tables,
                                                         CovarianceTolerances tol) {
    if (n < 1) throw DomainError("covariance dimension must be >= 1");
    check_indices(indices);
    const int m = static_cast<int>(indices.size());
    if (tables.size() != static_cast<std::size_t>(m * m)) {
        throw DomainError("kernel covariance needs |F|^2 tables");
    }
    for (const auto& t : tables) {
        if (t.rows() != n || t.cols() != n) throw DomainError("kernel table has the wrong size");
        if (!t.allFinite()) throw DomainError("kernel table has non-finite entries");
    }
    auto impl = std::make_shared<Impl>();
    impl->n = n;
    impl->indices = std::move(indices);
    impl->base = BaseAlgebra::Diagonal;
    impl->tables = std::move(tables);

    double scale = 0.0;
    for (const auto& t : impl->tables) scale = std::max(scale, t.cwiseAbs().maxCoeff());
    scale = std::max(scale, 1e-300);
    double worst_sym = 0.0, worst_tau = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const RealMatrix& hij = impl->table(i, j);
            const RealMatrix& hji = impl->table(j, i);
            worst_sym = std::max(worst_sym, (hij - hji).cwiseAbs().maxCoeff());
            worst_tau = std::max(worst_tau, (hij - hji.transpose()).cwiseAbs().maxCoeff());
        }
    if (worst_tau > tol.symmetry * scale) {
        throw InvariantViolation("kernel violates H_ij[s,t] = H_ji[t,s] (residual " +
                                     std::to_string(worst_tau) + ")",
                                 worst_tau);
    }
    if (worst_sym > tol.symmetry * scale) {
        throw InvariantViolation("kernel cell blocks are not symmetric (residual " +
                                     std::to_string(worst_sym) + ")",
                                 worst_sym);
    }

    double lmax_all = 0.0;
    double lmin_all = 0.0;
    std::string where;
    for (int s = 0; s < n; ++s)
        for (int t = 0; t < n; ++t) {
            double lo, hi;
            if (m == 1) {
                lo = hi = impl->table(0, 0)(s, t);
            } else {
                Eigen::SelfAdjointEigenSolver<RealMatrix> es(impl->cell_block(s, t), Eigen::EigenvaluesOnly);
                lo = es.eigenvalues()(0);
                hi = es.eigenvalues()(m - 1);
            }
            lmax_all = std::max(lmax_all, hi);
            if (lo < lmin_all) {
                lmin_all = lo;
                where = "cell (" + std::to_string(s) + "," + std::to_string(t) + ")";
            }
        }
    if (lmin_all < -tol.psd_relative * std::max(lmax_all, 1e-300)) {
        throw InvariantViolation("kernel cell block not PSD: lambda_min = " + std::to_string(lmin_all) +
                                     " at " + where,
                                 lmin_all);
    }
    impl->norm = lmax_all / n;
    std::call_once(impl->norm_once, [] {});
    return DiscreteCovariance(std::move(impl));
}

// ---------------------------------------------------------------------------
// Accessors

int DiscreteCovariance::n() const { return impl_->n; }
const std::vector<std::string>& DiscreteCovariance::indices() const { return impl_->indices; }
BaseAlgebra DiscreteCovariance::base() const { return impl_->base; }
bool DiscreteCovariance::is_kernel() const { return !impl_->dense.has_value(); }

int DiscreteCovariance::index_of(const std::string& name) const {
    const auto& idx = impl_->indices;
    const auto it = std::find(idx.begin(), idx.end(), name);
    if (it == idx.end()) throw DomainError("index '" + name + "' is not in the covariance index set");
    return static_cast<int>(it - idx.begin());
}

Matrix DiscreteCovariance::apply(int i, int j, const Matrix& a) const {
    const Impl& im = *impl_;
    const int m = im.m();
    const int n = im.n;
    if (i < 0 || j < 0 || i >= m || j >= m) throw DomainError("covariance index out of range");
    if (a.rows() != n || a.cols() != n) throw DomainError("covariance argument has the wrong size");
    if (im.dense) {
        const Matrix& c = *im.dense;
        Matrix out = Matrix::Zero(n, n);
        for (int s = 0; s < n; ++s)
            for (int s2 = 0; s2 < n; ++s2) {
                Complex acc = 0.0;
                for (int t = 0; t < n; ++t)
                    for (int t2 = 0; t2 < n; ++t2) acc += c(im.row(i, s, t), im.row(j, s2, t2)) * a(t, t2);
                out(s, s2) = acc;
            }
        return out;
    }
    Matrix out = Matrix::Zero(n, n);
    out.diagonal() = apply_diagonal(i, j, a.diagonal());
    return out;
}

Matrix DiscreteCovariance::apply(const std::string& i, const std::string& j, const Matrix& a) const {
    return apply(index_of(i), index_of(j), a);
}

Vector DiscreteCovariance::apply_diagonal(int i, int j, const Vector& diag) const {
    const Impl& im = *impl_;
    if (im.dense) throw DomainError("diagonal application needs a kernel covariance");
    if (i < 0 || j < 0 || i >= im.m() || j >= im.m()) throw DomainError("covariance index out of range");
    if (diag.size() != im.n) throw DomainError("covariance argument has the wrong size");
    const RealMatrix& h = im.table(i, j);
    const RealVector re = h * diag.real();
    const RealVector imag = h * diag.imag();
    Vector out(im.n);
    for (int s = 0; s < im.n; ++s) out[s] = Complex(re[s], imag[s]) / static_cast<double>(im.n);
    return out;
}

const RealMatrix& DiscreteCovariance::kernel_table(int i, int j) const {
    if (!is_kernel()) throw DomainError("covariance has no kernel table");
    return impl_->table(i, j);
}

bool DiscreteCovariance::choi_available() const {
    return impl_->dense.has_value() || impl_->dim() <= impl_->choi_cap;
}

const Matrix& DiscreteCovariance::choi() const {
    const Impl& im = *impl_;
    if (im.dense) return *im.dense;
    if (im.dim() > im.choi_cap) {
        throw BudgetExceeded("Choi matrix of dimension " + std::to_string(im.dim()) +
                             " exceeds the materialization cap " + std::to_string(im.choi_cap));
    }
    std::call_once(im.choi_once, [&im] {
        const Eigen::Index d = static_cast<Eigen::Index>(im.dim());
        im.lazy_choi = Matrix::Zero(d, d);
        for (int i = 0; i < im.m(); ++i)
            for (int j = 0; j < im.m(); ++j)
                for (int s = 0; s < im.n; ++s)
                    for (int t = 0; t < im.n; ++t)
                        im.lazy_choi(im.row(i, s, t), im.row(j, s, t)) = im.table(i, j)(s, t) / im.n;
    });
    return im.lazy_choi;
}

const std::vector<HermitianTuple>& DiscreteCovariance::kraus() const {
    std::call_once(impl_->kraus_once, [this] { impl_->kraus = kraus_decompose(*this); });
    return impl_->kraus;
}

double DiscreteCovariance::choi_norm() const { return impl_->norm; }

double DiscreteCovariance::eta_one_norm() const {
    const Impl& im = *impl_;
    const int m = im.m(), n = im.n;
    if (!im.dense) {
        double best = 0.0;
        for (int s = 0; s < n; ++s) {
            RealMatrix b(m, m);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) b(i, j) = im.table(i, j).row(s).sum() / n;
            Eigen::SelfAdjointEigenSolver<RealMatrix> es(b, Eigen::EigenvaluesOnly);
            best = std::max(best, es.eigenvalues().cwiseAbs().maxCoeff());
        }
        return best;
    }
    Matrix block(m * n, m * n);
    const Matrix id = Matrix::Identity(n, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) block.block(i * n, j * n, n, n) = apply(i, j, id);
    Eigen::SelfAdjointEigenSolver<Matrix> es(block, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

double DiscreteCovariance::eta_one_norm(int i, int j) const {
    const Impl& im = *impl_;
    if (!im.dense) {
        return (im.table(i, j).rowwise().sum() / im.n).cwiseAbs().maxCoeff();
    }
    return operator_norm(apply(i, j, Matrix::Identity(im.n, im.n)));
}

DiscreteCovariance DiscreteCovariance::restrict(const std::vector<int>& positions) const {
    const Impl& im = *impl_;
    const int n = im.n;
    std::vector<std::string> names;
    for (int p : positions) {
        if (p < 0 || p >= im.m()) throw DomainError("restrict: index position out of range");
        names.push_back(im.indices[p]);
    }
    if (!im.dense) {
        std::vector<RealMatrix> tables;
        for (int p : positions)
            for (int q : positions) tables.push_back(im.table(p, q));
        return from_kernel_table(n, std::move(names), std::move(tables));
    }
    const Eigen::Index nn = static_cast<Eigen::Index>(n) * n;
    const Eigen::Index k = static_cast<Eigen::Index>(positions.size());
    Matrix c(k * nn, k * nn);
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b)
            c.block(a * nn, b * nn, nn, nn) = im.dense->block(positions[a] * nn, positions[b] * nn, nn, nn);
    return from_choi(n, std::move(names), im.base, std::move(c));
}

const std::vector<RealMatrix>& DiscreteCovariance::cell_factors() const {
    const Impl& im = *impl_;
    if (im.dense) throw DomainError("cell factors exist only for kernel covariances");
    std::call_once(im.factors_once, [&im] {
        const int n = im.n, m = im.m();
        im.factors.assign(static_cast<std::size_t>(n) * n, RealMatrix());
#pragma omp parallel for schedule(static)
        for (int s = 0; s < n; ++s) {
            for (int t = s; t < n; ++t) {
                RealMatrix f(m, m);
                if (m == 1) {
                    f(0, 0) = std::sqrt(std::max(0.0, im.table(0, 0)(s, t)) / n);
                } else {
                    Eigen::SelfAdjointEigenSolver<RealMatrix> es(im.cell_block(s, t) / n);
                    const RealVector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
                    f = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
                }
                im.factors[static_cast<std::size_t>(s) * n + t] = std::move(f);
            }
        }
    });
    return im.factors;
}

// ---------------------------------------------------------------------------
// Kraus operators

std::vector<HermitianTuple> kraus_decompose(const DiscreteCovariance& eta) {
    const int n = eta.n();
    const int m = eta.index_count();
    const Matrix& c = eta.choi();
    const auto basis = hermitian_basis_sparse(n);
    const Eigen::Index nn = static_cast<Eigen::Index>(n) * n;
    const Eigen::Index d = m * nn;

    // R = W^* C W, where W's columns are vec(e_alpha) placed in the block of index i.
    Matrix cw(d, d);
    for (int j = 0; j < m; ++j)
        for (std::size_t beta = 0; beta < basis.size(); ++beta) {
            Vector col = Vector::Zero(d);
            for (const auto& [pos, v] : basis[beta]) col += v * c.col(j * nn + pos);
            cw.col(j * nn + static_cast<Eigen::Index>(beta)) = col;
        }
    RealMatrix r(d, d);
    for (int i = 0; i < m; ++i)
        for (std::size_t alpha = 0; alpha < basis.size(); ++alpha) {
            const Eigen::Index row = i * nn + static_cast<Eigen::Index>(alpha);
            for (Eigen::Index col = 0; col < d; ++col) {
                Complex acc = 0.0;
                for (const auto& [pos, v] : basis[alpha]) acc += std::conj(v) * cw(i * nn + pos, col);
                r(row, col) = acc.real();
            }
        }
    r = (r + r.transpose()).eval() / 2.0;

    Eigen::SelfAdjointEigenSolver<RealMatrix> es(r);
    const RealVector& ev = es.eigenvalues();
    const double lmax = ev.size() ? std::max(ev(ev.size() - 1), 0.0) : 0.0;
    if (ev.size() && ev(0) < -1e-10 * std::max(lmax, 1e-300) && ev(0) < -1e-300) {
        throw InvariantViolation("Kraus decomposition found negative eigenvalue " + std::to_string(ev(0)),
                                 ev(0));
    }
    std::vector<HermitianTuple> out;
    const double cutoff = 1e-12 * lmax;
    const double r2 = 1.0 / std::sqrt(2.0);
    for (Eigen::Index k = d - 1; k >= 0; --k) {
        if (!(ev(k) > cutoff)) break;
        const double w = std::sqrt(ev(k));
        std::vector<Matrix> mats;
        for (int i = 0; i < m; ++i) {
            Matrix a = Matrix::Zero(n, n);
            const auto u = [&](std::size_t alpha) { return w * es.eigenvectors()(i * nn + alpha, k); };
            std::size_t alpha = 0;
            for (int s = 0; s < n; ++s) a(s, s) = u(alpha++);
            for (int s = 0; s < n; ++s)
                for (int t = s + 1; t < n; ++t) {
                    const double sym = u(alpha++) * r2;
                    const double anti = u(alpha++) * r2;
                    a(s, t) = Complex(sym, anti);
                    a(t, s) = Complex(sym, -anti);
                }
            mats.push_back(std::move(a));
        }
        out.emplace_back(n, eta.indices(), std::move(mats));
    }
    return out;
}

double kraus_reconstruction_residual(const DiscreteCovariance& eta,
                                     const std::vector<HermitianTuple>& kraus) {
    const int n = eta.n(), m = eta.index_count();
    double worst = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int s = 0; s < n; ++s)
                for (int t = 0; t < n; ++t) {
                    Matrix acc = Matrix::Zero(n, n);
                    for (const auto& tuple : kraus) acc += tuple[i].col(s) * tuple[j].row(t);
                    const Matrix target = eta.apply(i, j, matrix_unit(n, s, t));
                    worst = std::max(worst, (acc - target).cwiseAbs().maxCoeff());
                }
    return worst;
}

// ---------------------------------------------------------------------------
// Serialization

void write_json(std::ostream& os, const DiscreteCovariance& eta) {
    const Matrix& c = eta.choi();
    nlohmann::json j;
    j["n"] = eta.n();
    j["indices"] = eta.indices();
    j["base"] = to_string(eta.base());
    nlohmann::json entries = nlohmann::json::array();
    for (Eigen::Index r = 0; r < c.rows(); ++r)
        for (Eigen::Index k = 0; k < c.cols(); ++k) entries.push_back({c(r, k).real(), c(r, k).imag()});
    j["choi"] = std::move(entries);
    os << j.dump() << '\n';
}

DiscreteCovariance read_json(std::istream& is) {
    nlohmann::json j;
    try {
        is >> j;
        const int n = j.at("n").get<int>();
        auto indices = j.at("indices").get<std::vector<std::string>>();
        const BaseAlgebra base = base_from_string(j.at("base").get<std::string>());
        const auto& entries = j.at("choi");
        const Eigen::Index d = static_cast<Eigen::Index>(indices.size()) * n * n;
        if (entries.size() != static_cast<std::size_t>(d * d)) throw ConfigError("choi entry count mismatch");
        Matrix c(d, d);
        std::size_t p = 0;
        for (Eigen::Index r = 0; r < d; ++r)
            for (Eigen::Index k = 0; k < d; ++k, ++p) c(r, k) = Complex(entries[p][0].get<double>(), entries[p][1].get<double>());
        return DiscreteCovariance::from_choi(n, std::move(indices), base, std::move(c));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("covariance JSON: ") + e.what());
    }
}

namespace {
constexpr char kMagic[4] = {'C', 'O', 'V', 'L'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw ConfigError("covariance binary: truncated input");
    return v;
}
}  // namespace

// Layout (host byte order): "COVL", u32 version, u32 n, u32 |F|, u8 base,
// per index (u32 length, bytes), then d*d (re, im) doubles row-major.
void write_binary(std::ostream& os, const DiscreteCovariance& eta) {
    const Matrix& c = eta.choi();
    os.write(kMagic, 4);
    put(os, kVersion);
    put(os, static_cast<std::uint32_t>(eta.n()));
    put(os, static_cast<std::uint32_t>(eta.index_count()));
    put(os, static_cast<std::uint8_t>(eta.base() == BaseAlgebra::Diagonal));
    for (const auto& name : eta.indices()) {
        put(os, static_cast<std::uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
    }
    for (Eigen::Index r = 0; r < c.rows(); ++r)
        for (Eigen::Index k = 0; k < c.cols(); ++k) {
            put(os, c(r, k).real());
            put(os, c(r, k).imag());
        }
}

DiscreteCovariance read_binary(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) throw ConfigError("covariance binary: bad magic");
    if (get<std::uint32_t>(is) != kVersion) throw ConfigError("covariance binary: unsupported version");
    const int n = static_cast<int>(get<std::uint32_t>(is));
    const int m = static_cast<int>(get<std::uint32_t>(is));
    const BaseAlgebra base = get<std::uint8_t>(is) ? BaseAlgebra::Diagonal : BaseAlgebra::Full;
    std::vector<std::string> names;
    for (int k = 0; k < m; ++k) {
        const auto len = get<std::uint32_t>(is);
        std::string s(len, '\0');
        is.read(s.data(), len);
        if (!is) throw ConfigError("covariance binary: truncated index name");
        names.push_back(std::move(s));
    }
    const Eigen::Index d = static_cast<Eigen::Index>(m) * n * n;
    Matrix c(d, d);
    for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index k = 0; k < d; ++k) {
            const double re = get<double>(is);
            const double im = get<double>(is);
            c(r, k) = Complex(re, im);
        }
    return DiscreteCovariance::from_choi(n, std::move(names), base, std::move(c));
}

}  // namespace covlaw
