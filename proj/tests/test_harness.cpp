#include "covlaw/config.hpp"
#include "covlaw/errors.hpp"
#include "covlaw/harness.hpp"
#include "covlaw/records.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace covlaw;
namespace fs = std::filesystem;

namespace {

RunConfig cfg_of(const std::string& text) { return parse_config(text, COVLAW_CONFIG_DIR); }

std::string csv_of(const RunResult& r) {
    std::ostringstream os;
    write_csv(os, r.records);
    return os.str();
}

}  // namespace

TEST_CASE("records") {
    const MeanStderr ms = mean_stderr({1.0, 2.0, 3.0, 4.0});
    CHECK(ms.mean == doctest::Approx(2.5));
    CHECK(ms.stderr_ == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
    CHECK(mean_stderr({7.0}).stderr_ == 0.0);
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(std::nan("")) == "");
    std::ostringstream os;
    write_csv(os, {RunRecord{}});
    const std::string header = os.str().substr(0, os.str().find('\n'));
    CHECK(header == "n,N,mean,stderr,reference,gap,bound_sigma,bound_v,bound_w4,bound_crossing,log3_choi,seed,wall_ms,param");
}

TEST_CASE("log-log slope") {
    CHECK(log_log_slope({1, 2, 4, 8}, {1, 0.5, 0.25, 0.125}) == doctest::Approx(-1.0));
    CHECK(std::isnan(log_log_slope({1, 2}, {0.0, 0.0})));
    CHECK(std::isnan(log_log_slope({1}, {1})));
}

TEST_CASE("weak run: constant polynomial is exact") {
    const RunConfig cfg = cfg_of("statistic = \"trace\"\npolynomial = \"1\"\nschedule = [8, 16]\nsamples = 4\nn_ref = 16\n");
    const RunResult r = weak_convergence_run(cfg);
    REQUIRE(r.records.size() == 2);
    for (const RunRecord& rec : r.records) {
        CHECK(rec.mean == 1.0);
        CHECK(rec.stderr_ == 0.0);
        CHECK(rec.reference == doctest::Approx(1.0));
    }
    CHECK(r.records[0].n < r.records[1].n);
    CHECK(r.pass);
}

TEST_CASE("weak run against exact values on GUE") {
    for (const char* poly : {"x:1^2", "x:1^4", "x:1^6"}) {
        CAPTURE(poly);
        const RunConfig cfg = cfg_of(std::string("statistic = \"trace\"\nreference = \"exact-gaussian\"\npolynomial = \"") + poly +
                                     "\"\nschedule = [16, 32]\nsamples = 40\nseed = 3\nn_ref = 32\n");
        const RunResult r = weak_convergence_run(cfg);
        for (const RunRecord& rec : r.records) CHECK(std::abs(rec.mean - rec.reference) <= 5.0 * rec.stderr_);
    }
}

TEST_CASE("weak run on a band model against the kernel average") {
    const RunConfig cfg = load_config(std::string(COVLAW_CONFIG_DIR) + "/band.toml");
    RunConfig small = cfg;
    small.schedule = {32, 64};
    small.n_ref = 64;
    const RunResult r = weak_convergence_run(small);
    for (const RunRecord& rec : r.records) CHECK(std::abs(rec.mean - rec.reference) <= 5.0 * rec.stderr_ + 1e-12);
}

TEST_CASE("exact-gaussian reference for non-GUE models") {
    RunConfig cfg = load_config(std::string(COVLAW_CONFIG_DIR) + "/band.toml");
    cfg.reference = Reference::ExactGaussian;
    cfg.schedule = {4, 6};
    cfg.samples = 400;
    const RunResult r = weak_convergence_run(cfg);
    for (const RunRecord& rec : r.records) CHECK(std::abs(rec.mean - rec.reference) <= 5.0 * rec.stderr_);
    cfg.polynomial = parse_polynomial("L[1,1](x:1^2)");
    CHECK_THROWS_AS(weak_convergence_run(cfg), ConfigError);
}

TEST_CASE("strong run: zero polynomial") {
    const RunConfig cfg = cfg_of("statistic = \"opnorm\"\npolynomial = \"x:1 - x:1\"\nschedule = [8]\nsamples = 3\nn_ref = 8\n");
    const RunResult r = strong_convergence_run(cfg);
    CHECK(r.records.front().mean == 0.0);
    CHECK(r.records.front().stderr_ == 0.0);
}

TEST_CASE("strong run: proxies increase and records carry the hypothesis column") {
    const RunConfig cfg = cfg_of(
        "statistic = \"opnorm\"\npolynomial = \"x:1^2 + b:w\"\nschedule = [16, 32, 64]\nsamples = 3\nn_ref = 32\n"
        "[base]\nw = [[0, 0], [1, 1]]\n[strong]\nmoment_orders = [1, 2, 3, 4]\n");
    const fs::path dir = fs::temp_directory_path() / "covlaw_spectra_test";
    fs::remove_all(dir);
    const RunResult r = strong_convergence_run(cfg, RunOptions{false, dir.string()});
    CHECK(r.summary["proxy_monotone"].get<bool>());
    CHECK(r.summary["self_adjoint"].get<bool>());
    CHECK(fs::exists(dir / "spectrum_n16.csv"));
    for (std::size_t k = 1; k < r.records.size(); ++k) CHECK(r.records[k].log3_choi < r.records[k - 1].log3_choi);
    fs::remove_all(dir);
}

TEST_CASE("strong run falls back to sampled moments above the term budget") {
    const RunConfig cfg = cfg_of(
        "statistic = \"opnorm\"\npolynomial = \"x:1 + x:1^2 + 1\"\nschedule = [8]\nsamples = 4\nn_ref = 16\n"
        "[strong]\nmoment_orders = [2, 9]\nterm_budget = 100\n");
    const RunResult r = strong_convergence_run(cfg);
    CHECK(r.summary["proxy_sampled"].get<bool>());
    CHECK_FALSE(r.summary["proxies"][0]["sampled"].get<bool>());
    CHECK(r.summary["proxies"][1]["sampled"].get<bool>());
}

TEST_CASE("estimator run: Y = 0 gives zero error") {
    const RunConfig cfg = cfg_of("statistic = \"eta-estimator\"\nschedule = [8]\n[estimator]\ntarget = \"zero\"\nm = [2, 4]\nrepetitions = 3\n");
    const RunResult r = eta_estimator_run(cfg);
    for (const RunRecord& rec : r.records) CHECK(rec.mean == 0.0);
    CHECK(r.summary["slope"].is_null());
    CHECK(r.pass);
}

TEST_CASE("estimator run: identity target on a weighted model") {
    const RunConfig cfg = cfg_of(
        "statistic = \"eta-estimator\"\npolynomial = \"x:a\"\nschedule = [8]\nseed = 2\n[model]\nkind = \"weighted\"\nindices = [\"a\", \"b\"]\n"
        "[[model.kernel]]\ni = \"a\"\nj = \"a\"\n[[model.kernel]]\ni = \"b\"\nj = \"b\"\n"
        "[[model.kernel]]\ni = \"a\"\nj = \"b\"\nvalue = 0.5\n"
        "[estimator]\ni = \"a\"\nj = \"b\"\ntarget = \"identity\"\nm = [4, 16, 64]\nrepetitions = 30\n");
    const RunResult r = eta_estimator_run(cfg);
    CHECK(r.records.front().mean > r.records.back().mean);
    CHECK(r.records.front().param == 4.0);
}

TEST_CASE("tail run: delta = 0 and Lipschitz scaling") {
    const std::string base = "statistic = \"tail\"\nschedule = [16]\nsamples = 200\n[tail]\ndelta = [0, 1]\n";
    const RunResult one = tail_diagnostic_run(cfg_of(base + "lipschitz = 1\n"));
    const RunResult two = tail_diagnostic_run(cfg_of(base + "lipschitz = 2\n"));
    CHECK(one.records[0].reference == 4.0);
    CHECK(one.records[0].mean == 1.0);
    CHECK(one.pass);
    // Exponent -n delta^2 / (2 ||T|| L^2) with delta = ||T||^{1/2}: -8 for L = 1, -2 for L = 2.
    CHECK(one.records[1].reference == doctest::Approx(4.0 * std::exp(-8.0)));
    CHECK(two.records[1].reference == doctest::Approx(4.0 * std::exp(-2.0)));
    CHECK(two.pass);
}

TEST_CASE("runs reject mismatched statistics") {
    const RunConfig cfg = cfg_of("statistic = \"tail\"\n");
    CHECK_THROWS_AS(weak_convergence_run(cfg), ConfigError);
    CHECK_THROWS_AS(strong_convergence_run(cfg), ConfigError);
    CHECK_THROWS_AS(eta_estimator_run(cfg), ConfigError);
}

TEST_CASE("results are reproducible") {
    const RunConfig cfg = cfg_of("statistic = \"trace\"\npolynomial = \"x:1^3 + x:1\"\nschedule = [16, 32]\nsamples = 6\nseed = 9\nn_ref = 16\n");
    CHECK(csv_of(weak_convergence_run(cfg)) == csv_of(weak_convergence_run(cfg)));
    RunConfig other = cfg;
    other.seed = 10;
    CHECK(csv_of(weak_convergence_run(cfg)) != csv_of(weak_convergence_run(other)));
}

TEST_CASE("CLI exit codes") {
    const fs::path dir = fs::temp_directory_path() / "covlaw_cli_test";
    fs::create_directories(dir);
    std::ofstream(dir / "bad.toml") << "samples = \"many\"\n";
    std::ofstream(dir / "ok.toml") << "polynomial = \"x:1^2\"\nschedule = [4]\nsamples = 2\nn_ref = 4\n";
    const std::string cli = COVLAW_CLI;
    auto status = [](const std::string& cmd) {
        const int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
        return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    };
    CHECK(status(cli + " weak --config " + (dir / "bad.toml").string()) == 1);
    CHECK(status(cli + " weak --config " + (dir / "missing.toml").string()) == 1);
    CHECK(status(cli + " weak --config " + (dir / "ok.toml").string()) == 0);
    CHECK(status(cli + " bounds --config " + (dir / "ok.toml").string()) == 0);
    CHECK(status(cli + " poly-eval --poly 'L[1,1](x:1^2) x:1' --n 4") == 0);
    CHECK(status(cli + " poly-eval --poly 'x:1 +' --n 4") == 1);
    fs::remove_all(dir);
}
