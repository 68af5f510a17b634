#pragma once

// Lazy products of matrix factors with memoized sub-products, shared by the polynomial
// evaluator and the moment engines.

#include "covlaw/covariance.hpp"
#include "covlaw/covpoly.hpp"
#include "covlaw/partitions.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace covlaw::detail {

struct Operand {
    enum class Kind { Identity, Diagonal, Dense };
    Kind kind = Kind::Identity;
    Vector diag;  // Diagonal
    Matrix dense; // Dense
};

using OperandPtr = std::shared_ptr<const Operand>;

struct Factor {
    std::string key;
    OperandPtr op;
};

using Chain = std::vector<Factor>;

std::string chain_key(const Chain& c);

OperandPtr identity_operand();
/// Classifies `m` as Diagonal when every off-diagonal entry is exactly zero.
OperandPtr make_operand(const Matrix& m);
OperandPtr make_diagonal(Vector d);
OperandPtr multiply(const Operand& a, const Operand& b);
OperandPtr add(const Operand& a, const Operand& b, int n);
Matrix to_matrix(const Operand& op, int n);
/// eta_{i,j}(op); kernel covariances only look at the diagonal.
OperandPtr apply_eta(const DiscreteCovariance& eta, int i, int j, const Operand& op);

class ChainEvaluator {
public:
    explicit ChainEvaluator(int n) : n_(n) {}

    int n() const noexcept { return n_; }
    OperandPtr product(const Chain& c);
    Vector diagonal(const Chain& c);
    /// Normalized trace, rotating a diagonal factor to the front when one exists.
    Complex trace(const Chain& c);
    Matrix to_matrix(const Operand& op) const { return detail::to_matrix(op, n_); }
    Matrix to_matrix(const Chain& c) { return to_matrix(*product(c)); }

    /// Factor for eta_{i,j} applied to the product of `inner`.
    Factor eta_factor(const DiscreteCovariance& eta, int i, int j, const std::string& name_i,
                      const std::string& name_j, const Chain& inner);

    /// Removes adjacent blocks of `pi` one at a time; slots has 2k+1 chains (slot r sits
    /// between points r and r+1). Returns the single remaining chain.
    Chain reduce(const DiscreteCovariance* eta, PairPartition pi, std::vector<std::string> indices,
                 std::vector<Chain> slots, ReductionOrder order);

private:
    int n_;
    std::map<std::string, OperandPtr> memo_;
};

}  // namespace covlaw::detail
