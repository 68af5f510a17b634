#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace covlaw {

/// One experiment row.
struct RunRecord {
    int n = 0;
    long long N = 0;
    double mean = 0.0;
    double stderr_ = 0.0;  // sample std / sqrt(N)
    double reference = 0.0;
    double gap = 0.0;
    double bound_sigma = 0.0;
    double bound_v = 0.0;
    double bound_w4 = 0.0;
    double bound_crossing = 0.0;
    double log3_choi = 0.0;
    std::uint64_t seed = 0;
    double wall_ms = 0.0;
    /// Run-specific parameter: delta for tail rows, copy count for estimator rows.
    double param = std::numeric_limits<double>::quiet_NaN();
    /// JSON-only diagnostics.
    nlohmann::ordered_json extra = nlohmann::ordered_json::object();
};

struct RunResult {
    std::string kind;
    std::string experiment;
    std::vector<RunRecord> records;
    nlohmann::ordered_json summary = nlohmann::ordered_json::object();
    bool pass = true;
};

/// Sample mean and standard error of the mean.
struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
};
MeanStderr mean_stderr(const std::vector<double>& v);

/// Shortest round-trip decimal form; empty for NaN.
std::string format_number(double v);

void write_csv(std::ostream& os, const std::vector<RunRecord>& records);
nlohmann::ordered_json to_json(const RunRecord& r);
void write_json(std::ostream& os, const RunResult& result);

}  // namespace covlaw
