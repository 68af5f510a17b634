#include "covlaw/records.hpp"

#include <charconv>
#include <ostream>

namespace covlaw {

MeanStderr mean_stderr(const std::vector<double>& v) {
    MeanStderr out;
    if (v.empty()) return out;
    double sum = 0.0;
    for (double x : v) sum += x;
    out.mean = sum / static_cast<double>(v.size());
    if (v.size() < 2) return out;
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    const double var = ss / static_cast<double>(v.size() - 1);
    out.stderr_ = std::sqrt(var / static_cast<double>(v.size()));
    return out;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_csv(std::ostream& os, const std::vector<RunRecord>& records) {
    os << "n,N,mean,stderr,reference,gap,bound_sigma,bound_v,bound_w4,bound_crossing,log3_choi,seed,wall_ms,param\n";
    for (const RunRecord& r : records) {
        os << r.n << ',' << r.N << ',' << format_number(r.mean) << ',' << format_number(r.stderr_) << ','
           << format_number(r.reference) << ',' << format_number(r.gap) << ',' << format_number(r.bound_sigma)
           << ',' << format_number(r.bound_v) << ',' << format_number(r.bound_w4) << ','
           << format_number(r.bound_crossing) << ',' << format_number(r.log3_choi) << ',' << r.seed << ','
           << format_number(r.wall_ms) << ',' << format_number(r.param) << '\n';
    }
}

namespace {

nlohmann::ordered_json number(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

}  // namespace

nlohmann::ordered_json to_json(const RunRecord& r) {
    nlohmann::ordered_json j;
    j["n"] = r.n;
    j["N"] = r.N;
    j["mean"] = number(r.mean);
    j["stderr"] = number(r.stderr_);
    j["reference"] = number(r.reference);
    j["gap"] = number(r.gap);
    j["bound_sigma"] = number(r.bound_sigma);
    j["bound_v"] = number(r.bound_v);
    j["bound_w4"] = number(r.bound_w4);
    j["bound_crossing"] = number(r.bound_crossing);
    j["log3_choi"] = number(r.log3_choi);
    j["seed"] = r.seed;
    j["wall_ms"] = number(r.wall_ms);
    j["param"] = number(r.param);
    for (const auto& [k, v] : r.extra.items()) j[k] = v;
    return j;
}

void write_json(std::ostream& os, const RunResult& result) {
    nlohmann::ordered_json j;
    j["kind"] = result.kind;
    j["experiment"] = result.experiment;
    j["pass"] = result.pass;
    j["summary"] = result.summary;
    j["records"] = nlohmann::ordered_json::array();
    for (const RunRecord& r : result.records) j["records"].push_back(to_json(r));
    os << j.dump(2) << '\n';
}

}  // namespace covlaw
