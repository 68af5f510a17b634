#pragma once

#include "covlaw/covariance.hpp"
#include "covlaw/exec.hpp"
#include "covlaw/partitions.hpp"
#include "covlaw/rng.hpp"

#include <string>
#include <vector>

namespace covlaw {

/// One eta-Gaussian family. Kernel covariances use independent entries with variances
/// from the kernel table; every other covariance uses X_i = sum_k g_k a_{k,i}.
HermitianTuple sample(const DiscreteCovariance& eta, const SeedSpec& seed,
                      Exec exec = Exec::Parallel);

/// Always the Kraus construction (requires a materialized Choi matrix).
HermitianTuple sample_kraus(const DiscreteCovariance& eta, const SeedSpec& seed);

/// Entrywise construction for kernel covariances.
HermitianTuple sample_kernel(const DiscreteCovariance& eta, const SeedSpec& seed,
                             Exec exec = Exec::Parallel);

/// X_{pi,i}: an independent copy per block; slots r and s of block {r,s} hold that
/// copy's components i_r and i_s. Slot names are "1", ..., "l".
HermitianTuple sample_partition_family(const DiscreteCovariance& eta, const PairPartition& pi,
                                       const std::vector<std::string>& indices,
                                       const SeedSpec& seed);

/// m independent families; copy t uses seed.with_copy(t).
std::vector<HermitianTuple> sample_copies(const DiscreteCovariance& eta, int m,
                                          const SeedSpec& seed, Exec exec = Exec::Parallel);

}  // namespace covlaw
