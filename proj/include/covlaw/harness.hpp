#pragma once

#include "covlaw/config.hpp"
#include "covlaw/records.hpp"

#include <string>

namespace covlaw {

struct RunOptions {
    bool timing = false;         // fill wall_ms; otherwise written as 0 for byte-stable output
    std::string spectrum_dir;    // per-n sorted eigenvalues of sample 0 (strong runs)
};

/// Per n: mean of tr_n f(eta^(n), b^(n), X^(n)) over the samples against the configured reference.
RunResult weak_convergence_run(const RunConfig& cfg, const RunOptions& opt = {});

/// Per n: mean operator norm of f(eta^(n), b^(n), X^(n)); reference is the moment-root
/// lower-bound proxy tau((f*f)^m)^{1/2m} at n_ref for the largest configured m.
RunResult strong_convergence_run(const RunConfig& cfg, const RunOptions& opt = {});

/// Averaging estimator (1/m) sum_t X_i^(t) Y X_j^(t) against eta_{i,j}(Y) at n = schedule[0].
RunResult eta_estimator_run(const RunConfig& cfg, const RunOptions& opt = {});

/// Exceedance frequencies of |f - mean f| >= delta for f = L (sum_i tr_n X_i^2)^{1/2}
/// against 4 exp(-n delta^2 / (2 ||T|| L^2)).
RunResult tail_diagnostic_run(const RunConfig& cfg, const RunOptions& opt = {});

/// Exact E tr_n f at level n when available: independent GUE families through the genus
/// sum, otherwise Wick sums over Kraus operators for monomials without covariance blocks.
double exact_gaussian_trace(const RunConfig& cfg, const DiscreteCovariance& eta,
                            const HermitianTuple& b);

/// Least-squares slope of log(y) against log(x).
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace covlaw
