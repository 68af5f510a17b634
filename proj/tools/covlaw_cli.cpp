#include "covlaw/config.hpp"
#include "covlaw/errors.hpp"
#include "covlaw/harness.hpp"
#include "covlaw/moments.hpp"
#include "covlaw/records.hpp"
#include "covlaw/sampler.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace covlaw;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    int threads = 0;
    std::string out;
};

RunConfig load(const Common& c) {
    RunConfig cfg = load_config(c.config);
    if (c.seed) cfg.seed = *c.seed;
    return cfg;
}

// CSV to <out> (stdout when empty) and the JSON summary next to it.
void emit(const RunResult& result, const std::string& out) {
    if (out.empty()) {
        write_csv(std::cout, result.records);
        return;
    }
    const std::filesystem::path csv(out);
    if (csv.has_parent_path()) std::filesystem::create_directories(csv.parent_path());
    std::ofstream f(csv);
    if (!f) throw ConfigError("cannot write '" + out + "'");
    write_csv(f, result.records);
    std::filesystem::path json = csv;
    json.replace_extension(".json");
    std::ofstream j(json);
    write_json(j, result);
}

void write_text(const std::string& out, const std::string& text) {
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + out + "'");
    f << text;
}

ordered_json bound_json(const DiscreteCovariance& eta, const std::vector<int>& ps) {
    std::ostringstream os;
    write_json(os, bounds(eta, ps));
    ordered_json j = ordered_json::parse(os.str());
    j["choi_norm"] = eta.choi_norm();
    j["eta_one_norm"] = eta.eta_one_norm();
    return j;
}

void add_common(CLI::App* sub, Common& c, bool needs_config = true) {
    auto* opt = sub->add_option("--config", c.config, "run configuration (TOML)");
    if (needs_config) opt->required();
    sub->add_option("--seed", c.seed, "override the configured master seed");
    sub->add_option("--threads", c.threads, "worker threads (0 keeps the OpenMP default)");
    sub->add_option("--out", c.out, "output file; runs also write a .json summary beside it");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"covlaw: covariance laws of Gaussian random matrices"};
    app.require_subcommand(1);

    Common c;
    bool timing = false;
    std::string spectrum_dir;
    std::vector<int> ns;
    std::string format = "json";
    std::string poly_text;

    std::vector<std::pair<std::string, CLI::App*>> runs;
    for (const char* name : {"weak", "strong", "estimator", "tail"}) {
        CLI::App* sub = app.add_subcommand(name, std::string(name) + " experiment");
        add_common(sub, c);
        sub->add_flag("--timing", timing, "record wall times (output is then not byte-stable)");
        if (std::string(name) == "strong")
            sub->add_option("--spectrum-dir", spectrum_dir, "write sorted eigenvalues of sample 0 per n");
        runs.emplace_back(name, sub);
    }
    CLI::App* bounds_cmd = app.add_subcommand("bounds", "bound report per n of the schedule");
    add_common(bounds_cmd, c);
    bounds_cmd->add_option("--n", ns, "levels (defaults to the schedule)");

    CLI::App* choi_cmd = app.add_subcommand("choi-dump", "Choi matrix of the model at level n");
    add_common(choi_cmd, c);
    choi_cmd->add_option("--n", ns, "level")->required()->expected(1);
    choi_cmd->add_option("--format", format, "json | binary")->check(CLI::IsMember({"json", "binary"}));

    CLI::App* poly_cmd = app.add_subcommand("poly-eval", "parse, print and evaluate a covariance polynomial");
    add_common(poly_cmd, c, false);
    poly_cmd->add_option("--poly", poly_text, "polynomial text (defaults to the configured one)");
    poly_cmd->add_option("--n", ns, "level")->expected(1);

    CLI11_PARSE(app, argc, argv);

    try {
        if (c.threads > 0) omp_set_num_threads(c.threads);
        RunOptions ro{timing, spectrum_dir};
        for (const auto& [name, sub] : runs) {
            if (!sub->parsed()) continue;
            const RunConfig cfg = load(c);
            if (cfg.strong.spectrum_dump && ro.spectrum_dir.empty()) {
                const fs::path parent = c.out.empty() ? fs::path(".") : fs::path(c.out).parent_path();
                ro.spectrum_dir = (parent / (cfg.experiment + "_spectra")).string();
            }
            RunResult r;
            if (name == "weak") r = weak_convergence_run(cfg, ro);
            else if (name == "strong") r = strong_convergence_run(cfg, ro);
            else if (name == "estimator") r = eta_estimator_run(cfg, ro);
            else r = tail_diagnostic_run(cfg, ro);
            emit(r, c.out);
            if (!c.out.empty()) std::cerr << name << ": " << (r.pass ? "PASS" : "FAIL") << '\n';
            return 0;
        }
        if (bounds_cmd->parsed()) {
            const RunConfig cfg = load(c);
            ordered_json out = ordered_json::array();
            for (int n : ns.empty() ? cfg.schedule : ns) {
                const DiscreteCovariance eta = build_covariance(cfg.model, n);
                ordered_json j;
                j["n"] = n;
                j.update(bound_json(eta, cfg.bound_orders));
                if (cfg.model.kind == "fgf") j["fgf_t"] = cfg.model.fgf_t;
                out.push_back(std::move(j));
            }
            write_text(c.out, out.dump(2) + "\n");
            return 0;
        }
        if (choi_cmd->parsed()) {
            const RunConfig cfg = load(c);
            const int n = ns.front();
            const DiscreteCovariance eta = build_covariance(cfg.model, n);
            const Matrix& t = eta.choi();
            if (format == "binary") {
                // Header: int64 rows, int64 cols; then row-major complex<double> entries.
                std::ostringstream os;
                const std::int64_t dims[2] = {t.rows(), t.cols()};
                os.write(reinterpret_cast<const char*>(dims), sizeof dims);
                for (Eigen::Index r = 0; r < t.rows(); ++r)
                    for (Eigen::Index col = 0; col < t.cols(); ++col) {
                        const Complex z = t(r, col);
                        os.write(reinterpret_cast<const char*>(&z), sizeof z);
                    }
                write_text(c.out, os.str());
            } else {
                ordered_json j;
                j["n"] = n;
                j["indices"] = eta.indices();
                j["layout"] = "row (i,s,t) = i*n*n + s*n + t";
                j["choi_norm"] = eta.choi_norm();
                ordered_json re = ordered_json::array(), im = ordered_json::array();
                for (Eigen::Index r = 0; r < t.rows(); ++r) {
                    ordered_json rr = ordered_json::array(), ri = ordered_json::array();
                    for (Eigen::Index col = 0; col < t.cols(); ++col) {
                        rr.push_back(t(r, col).real());
                        ri.push_back(t(r, col).imag());
                    }
                    re.push_back(std::move(rr));
                    im.push_back(std::move(ri));
                }
                j["real"] = std::move(re);
                j["imag"] = std::move(im);
                write_text(c.out, j.dump() + "\n");
            }
            return 0;
        }
        if (poly_cmd->parsed()) {
            RunConfig cfg;
            if (!c.config.empty()) cfg = load_config(c.config);
            if (c.seed) cfg.seed = *c.seed;
            const CovPolynomial f = poly_text.empty()
                                        ? cfg.polynomial
                                        : parse_polynomial(poly_text);
            if (c.config.empty()) {
                std::vector<std::string> idx = f.alphabet().indices;
                if (idx.empty()) idx = {"1"};
                cfg.model.kernel = models::gue_kernel(idx);
            }
            const int n = ns.empty() ? cfg.schedule.front() : ns.front();
            ordered_json j;
            j["canonical"] = to_string(f);
            j["degree"] = degree(f);
            j["depth"] = depth(f);
            j["self_adjoint_shape"] = to_string(adjoint(f));
            if (!c.config.empty() || f.alphabet().base.empty()) {
                const DiscreteCovariance eta = build_covariance(cfg.model, n);
                const HermitianTuple b = cfg.base.discretize(n);
                const HermitianTuple x = sample(eta, SeedSpec{cfg.seed, cfg.experiment + ":poly", static_cast<std::uint64_t>(n), 0, 0});
                j["n"] = n;
                j["sample_trace"] = evaluate_trace(f, EvalInputs{&b, &x, &eta}).real();
                j["semicircular_trace"] = semicircular_trace(f, eta, b).real();
            }
            write_text(c.out, j.dump(2) + "\n");
            return 0;
        }
    } catch (const InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << " (residual " << e.residual() << ")\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const BudgetExceeded& e) {
        std::cerr << "budget exceeded: " << e.what() << '\n';
        return 1;
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
