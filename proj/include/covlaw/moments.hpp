#pragma once

#include "covlaw/covariance.hpp"
#include "covlaw/covpoly.hpp"
#include "covlaw/exec.hpp"
#include "covlaw/partitions.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace covlaw {

/// eta_{pi,i}[a_1, ..., a_{2k-1}] by repeated removal of adjacent blocks.
Matrix eta_pi_eval(const DiscreteCovariance& eta, const PairPartition& pi,
                   const std::vector<std::string>& indices, const std::vector<Matrix>& args,
                   ReductionOrder order = ReductionOrder::SmallestFirst);

enum class MomentMethod {
    IntervalRecursion,  // first point pairs with r: O(l^3) covariance applications
    PartitionSum,       // explicit sum over NC_2(l)
};

/// b_0 E_B[x_{i_1} b_1 ... b_{l-1} x_{i_l}] b_l for a (B, eta)-semicircular family.
/// `coeffs` holds l+1 matrices; odd l gives the zero matrix.
Matrix semicircular_expectation(const DiscreteCovariance& eta, const std::vector<std::string>& indices,
                                const std::vector<Matrix>& coeffs,
                                MomentMethod method = MomentMethod::IntervalRecursion,
                                Exec exec = Exec::Parallel);

/// tau[f(eta, b, X)] with every covariance argument replaced by its E_B-compression
/// (identity for a full base, diagonal part for a diagonal base).
Complex semicircular_trace(const CovPolynomial& f, const DiscreteCovariance& eta,
                           const HermitianTuple& b);

struct WickOptions {
    /// Maximal number of Kraus-index assignments, summed over pairings.
    double budget = 5e7;
    Exec exec = Exec::Parallel;
};

/// Number of (pairing, Kraus-assignment) terms an exact Gaussian moment would visit.
double wick_cost(int length, std::size_t kraus_count);

/// Exact E[b_0 X_{i_1} b_1 ... X_{i_l} b_l] for an eta-Gaussian family, summing all
/// pairings and shared Kraus indices. Throws BudgetExceeded above the budget.
Matrix gaussian_moment_exact(const DiscreteCovariance& eta, const std::vector<std::string>& indices,
                             const std::vector<Matrix>& coeffs, WickOptions opt = {});

/// The single Wick term E[b_0 X_{pi,i;1} b_1 ... X_{pi,i;l} b_l].
Matrix wick_term(const DiscreteCovariance& eta, const PairPartition& pi,
                 const std::vector<std::string>& indices, const std::vector<Matrix>& coeffs,
                 WickOptions opt = {});

/// E prod_c tr_n(X^{powers[c]}) for a GUE matrix with entry variance 1/n, by the genus sum
/// over pairings of all letters.
double gue_trace_product_exact(const std::vector<int>& powers, int n);

/// E tr_n f(X) for an independent GUE family (eta_{i,j}(a) = delta_{ij} tr_n(a) 1) and a
/// polynomial without base letters; every covariance block reduces to a trace.
double gue_family_exact_trace(const CovPolynomial& f, int n);

struct CrossingGap {
    double gap = 0.0;
    double bound = 0.0;
    double moment = 0.0;  // max_i E tr_n X_i^{l-4} used in the bound (l even, so the power is even)
};

/// |tr E[moment] - tr semicircular| against the crossing-term bound summed over all
/// crossing pairings.
CrossingGap crossing_gap(const DiscreteCovariance& eta, const std::vector<std::string>& indices,
                         const std::vector<Matrix>& coeffs, WickOptions opt = {});

struct BoundReport {
    double sigma = 0.0;    // ||eta_F(1)||^{1/2}
    double v = 0.0;        // ||T_F||^{1/2}
    double w4_bound = 0.0; // 2 ||T_F|| ||eta_F(1)||
    double herbst_rate = 0.0;
    std::vector<int> p;
    std::vector<double> bbvh_gap_bound;
    std::vector<double> moment_cap;
    /// Crossing bound for unit coefficients at length 2p (p >= 2), with the moment
    /// factor replaced by its a-priori cap.
    std::vector<double> crossing_bound;
};

double bbvh_gap_bound(double eta_one_norm, double choi_norm, int p);
double moment_cap(double eta_one_norm, double choi_norm, int p);

BoundReport bounds(const DiscreteCovariance& eta, const std::vector<int>& p);

void write_json(std::ostream& os, const BoundReport& r);

}  // namespace covlaw
