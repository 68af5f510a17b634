#include "covlaw/config.hpp"
#include "covlaw/errors.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace covlaw;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_config(text, COVLAW_CONFIG_DIR);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("defaults") {
    const RunConfig cfg = parse_config("");
    CHECK(cfg.schedule == std::vector<int>{64, 128, 256, 512, 1024});
    CHECK(cfg.samples == 50);
    CHECK(cfg.n_ref == 512);
    CHECK(cfg.model.kind == "gue");
    CHECK(to_string(cfg.polynomial) == "x:1^2");
    CHECK(cfg.strong.moment_orders.front() == 2);
    CHECK(cfg.strong.moment_orders.back() == 12);
}

TEST_CASE("every shipped config loads") {
    for (const auto& entry : std::filesystem::directory_iterator(COVLAW_CONFIG_DIR)) {
        if (entry.path().extension() != ".toml") continue;
        CAPTURE(entry.path().string());
        CHECK_NOTHROW(load_config(entry.path().string()));
    }
}

TEST_CASE("diagnostics name the line or field") {
    CHECK(contains(error_of("samples = 0\n"), "samples"));
    CHECK(contains(error_of("schedule = [64, 32]\n"), "schedule"));
    CHECK(contains(error_of("experiment = \"a\"\nsamples = \n"), "line 2"));
    CHECK(contains(error_of("bogus = 1\n"), "bogus"));
    CHECK(contains(error_of("[model]\nkind = \"nope\"\n"), "model.kind"));
    CHECK(contains(error_of("statistic = \"average\"\n"), "statistic"));
    CHECK(contains(error_of("polynomial = \"x:2\"\n"), "polynomial"));
    CHECK(contains(error_of("polynomial = \"b:w x:1\"\n"), "polynomial"));
    CHECK(contains(error_of("[model]\nkind = \"band\"\nprofile = [[0, 1], [1, 1]]\n"), "profile"));
    CHECK(contains(error_of("[model]\nkind = \"weighted\"\nindices = [\"1\"]\n[[model.kernel]]\ni = \"1\"\nj = \"2\"\n"),
                   "model.kernel"));
    CHECK(contains(error_of("[estimator]\nrepetitions = 1\n"), "estimator.repetitions"));
    CHECK(contains(error_of("[tail]\ndelta_units = \"furlongs\"\n"), "tail.delta_units"));
    CHECK_THROWS_AS(load_config("/nonexistent/run.toml"), ConfigError);
}

TEST_CASE("models from text") {
    const RunConfig band = parse_config(
        "polynomial = \"x:1^2\"\n[model]\nkind = \"band\"\nprofile = [[0, 1], [1, 0]]\nepsilon = 0.5\n");
    const auto eta = build_covariance(band.model, 8);
    CHECK(eta.is_kernel());
    CHECK(eta.kernel_table(0, 0)(0, 7) == 0.0);

    const RunConfig w = parse_config(
        "polynomial = \"x:a x:b\"\n[model]\nkind = \"weighted\"\nindices = [\"a\", \"b\"]\n"
        "[[model.kernel]]\ni = \"a\"\nj = \"a\"\n[[model.kernel]]\ni = \"b\"\nj = \"b\"\n"
        "[[model.kernel]]\ni = \"a\"\nj = \"b\"\ntype = \"constant\"\nvalue = 0.5\n");
    const auto e2 = build_covariance(w.model, 4);
    CHECK(e2.kernel_table(0, 1)(2, 3) == doctest::Approx(0.5));
    CHECK(e2.kernel_table(1, 0)(3, 2) == doctest::Approx(0.5));

    const RunConfig f = parse_config("[model]\nkind = \"fgf\"\n[[model.j1]]\nindex = \"1\"\nsupp_f = [[0, 1]]\n");
    CHECK(f.model.fgf_t == 2.0);
}

TEST_CASE("grid kernels from CSV") {
    const auto grids = read_grid_csv(std::string(COVLAW_CONFIG_DIR) + "/grid_kernel.csv");
    REQUIRE(grids.size() == 1);
    const auto& g = grids.front().second;
    CHECK(g.s_nodes.size() == 3);
    CHECK(g.values(1, 1) == 1.0);
    const RunConfig cfg = load_config(std::string(COVLAW_CONFIG_DIR) + "/grid.toml");
    const auto eta = build_covariance(cfg.model, 16);
    CHECK(eta.kernel_table(0, 0)(0, 0) > 0.9);
    const auto dir = std::filesystem::temp_directory_path();
    std::ofstream(dir / "covlaw_bad_grid.csv") << "s,t,i,j,value\n0,0,1,1,1\n0,1,1,1,1\n1,0,1,1,1\n";
    CHECK_THROWS_AS(read_grid_csv((dir / "covlaw_bad_grid.csv").string()), ConfigError);
}
