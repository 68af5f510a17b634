#pragma once

namespace covlaw {

/// Execution policy for the data-parallel kernels. Serial is the reference path the
/// tests compare the OpenMP path against; both produce identical results.
enum class Exec { Serial, Parallel };

}  // namespace covlaw
