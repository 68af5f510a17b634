#pragma once

#include "covlaw/linalg.hpp"

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace covlaw {

/// One n x n Hermitian matrix per index name.
class HermitianTuple {
public:
    HermitianTuple() = default;
    /// Throws DomainError if a matrix is not n x n or not Hermitian to `tol`.
    HermitianTuple(int n, std::vector<std::string> indices, std::vector<Matrix> matrices,
                   double tol = 1e-12);

    int n() const noexcept { return n_; }
    std::size_t size() const noexcept { return matrices_.size(); }
    const std::vector<std::string>& indices() const noexcept { return indices_; }
    const std::vector<Matrix>& matrices() const noexcept { return matrices_; }
    const Matrix& operator[](std::size_t k) const { return matrices_[k]; }
    /// Throws DomainError for unknown names.
    const Matrix& at(const std::string& name) const;
    bool contains(const std::string& name) const;

private:
    int n_ = 0;
    std::vector<std::string> indices_;
    std::vector<Matrix> matrices_;
};

enum class BaseAlgebra { Full, Diagonal };

std::string to_string(BaseAlgebra base);
BaseAlgebra base_from_string(const std::string& s);

/// Position-based callable: (i, j, a) -> eta_{i,j}(a).
using CovarianceFn = std::function<Matrix(int, int, const Matrix&)>;

struct CovarianceTolerances {
    double psd_relative = 1e-10;
    double symmetry = 1e-10;
    double linearity = 1e-10;
};

/// An operator-valued covariance matrix eta = (eta_{i,j})_{i,j in F} on M_n.
///
/// Two storage forms exist. The dense form keeps the entry-covariance (Choi) matrix
///   choi[(i,s,t),(j,s',t')] = E[(X_i)_{st} conj((X_j)_{s't'})] = eta_{i,j}(E_{t,t'})_{s,s'},
/// of dimension |F| n^2. The kernel form is for D_n-valued covariances coming from a
/// weight kernel: eta_{i,j}(a)_{ss} = (1/n) sum_t H_{i,j}[s,t] a_{tt}. The kernel form
/// materializes its Choi matrix on demand only below a size cap.
///
/// Values are immutable and cheap to copy; Kraus operators are computed once per value.
class DiscreteCovariance {
public:
    static DiscreteCovariance from_maps(int n, std::vector<std::string> indices,
                                        const CovarianceFn& apply_fn,
                                        BaseAlgebra base = BaseAlgebra::Full,
                                        CovarianceTolerances tol = {});

    /// Rebuilds from a stored Choi matrix, re-verifying every invariant.
    static DiscreteCovariance from_choi(int n, std::vector<std::string> indices, BaseAlgebra base,
                                        Matrix choi, CovarianceTolerances tol = {});

    /// D_n-valued covariance from kernel tables H[i*|F|+j] (each n x n).
    /// Every cell block (H_{i,j}[s,t])_{i,j} must be symmetric PSD.
    static DiscreteCovariance from_kernel_table(int n, std::vector<std::string> indices,
                                                std::vector<RealMatrix> tables,
                                                CovarianceTolerances tol = {});

    int n() const;
    const std::vector<std::string>& indices() const;
    int index_count() const { return static_cast<int>(indices().size()); }
    int index_of(const std::string& name) const;
    BaseAlgebra base() const;
    bool is_kernel() const;

    Matrix apply(int i, int j, const Matrix& a) const;
    Matrix apply(const std::string& i, const std::string& j, const Matrix& a) const;
    /// Kernel covariances only: diagonal of eta_{i,j}(a) from the diagonal of a.
    Vector apply_diagonal(int i, int j, const Vector& diag) const;

    /// Kernel table H_{i,j}; only for kernel covariances.
    const RealMatrix& kernel_table(int i, int j) const;

    /// Dense Choi matrix. Throws BudgetExceeded for kernel covariances above the cap.
    const Matrix& choi() const;
    bool choi_available() const;

    /// Self-adjoint Kraus family: tuple k holds (a_{k,i})_{i in F}.
    const std::vector<HermitianTuple>& kraus() const;

    /// ||T_F|| (largest Choi eigenvalue).
    double choi_norm() const;
    /// ||(eta_{i,j}(1))_{i,j}|| as an |F|n x |F|n block matrix.
    double eta_one_norm() const;
    /// Per-pair ||eta_{i,j}(1)||.
    double eta_one_norm(int i, int j) const;

    /// Covariance of the sub-family at `positions`.
    DiscreteCovariance restrict(const std::vector<int>& positions) const;

    /// Square roots of the per-cell |F| x |F| blocks H[s,t]/n, used by the
    /// diagonal sampling fast path. Entry s*n+t, valid for s <= t.
    const std::vector<RealMatrix>& cell_factors() const;

    static constexpr std::size_t default_choi_cap = 4096;

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
    explicit DiscreteCovariance(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
};

/// Kraus decomposition via the real-symmetric covariance on (Herm n)^F.
std::vector<HermitianTuple> kraus_decompose(const DiscreteCovariance& eta);

/// max over basis pairs of |sum_k a_{k,i} E_{s,t} a_{k,j} - eta_{i,j}(E_{s,t})|_max.
double kraus_reconstruction_residual(const DiscreteCovariance& eta,
                                     const std::vector<HermitianTuple>& kraus);

/// Orthonormal basis of Herm(n) under Tr(a b): E_ss, (E_st+E_ts)/sqrt2, i(E_st-E_ts)/sqrt2.
std::vector<Matrix> hermitian_basis(int n);

void write_json(std::ostream& os, const DiscreteCovariance& eta);
DiscreteCovariance read_json(std::istream& is);
void write_binary(std::ostream& os, const DiscreteCovariance& eta);
DiscreteCovariance read_binary(std::istream& is);

}  // namespace covlaw
