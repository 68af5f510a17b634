#pragma once

#include "covlaw/covpoly.hpp"
#include "covlaw/models.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace covlaw {

enum class Statistic { Trace, OpNorm, EtaEstimator, Tail };
enum class Reference { SemicircularAtN, SemicircularAtNref, ExactGaussian };

std::string to_string(Statistic s);
std::string to_string(Reference r);

struct ModelConfig {
    std::string kind = "gue";  // gue | weighted | band | fgf
    models::KernelSpec kernel;
    // fgf only
    models::FgfSpec fgf;
    double fgf_ramp = 0.0;
    double fgf_t = 0.0;
};

struct StrongOptions {
    std::vector<int> moment_orders{2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    /// Maximal number of monomials in (f*f)^m before switching to sampled moment roots.
    std::size_t term_budget = 20000;
    bool spectrum_dump = false;
};

struct EstimatorOptions {
    std::string i = "1", j = "1";
    std::string target = "random";  // identity | zero | random | base:<name>
    std::vector<int> m{4, 8, 16, 32, 64, 128, 256};
    int repetitions = 20;
};

struct TailOptions {
    std::vector<double> delta{0.0, 0.25, 0.5, 1.0, 1.5, 2.0};
    bool delta_in_sqrt_t = true;  // delta grid in units of ||T||^{1/2}
    double lipschitz = 1.0;       // statistic is lipschitz * (sum_i tr_n X_i^2)^{1/2}
};

struct RunConfig {
    std::string experiment = "run";
    std::optional<Statistic> statistic;
    Reference reference = Reference::SemicircularAtN;
    std::string polynomial_text = "x:1^2";
    CovPolynomial polynomial;
    std::vector<int> schedule{64, 128, 256, 512, 1024};
    int samples = 50;
    std::uint64_t seed = 0;
    int n_ref = 512;
    std::vector<int> bound_orders{1, 2, 3};
    ModelConfig model;
    models::BaseTuple base;
    StrongOptions strong;
    EstimatorOptions estimator;
    TailOptions tail;
};

/// Reads a TOML run description. Throws ConfigError naming the line or field.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text, const std::string& base_dir = ".");

/// The covariance of the configured model at level n.
DiscreteCovariance build_covariance(const ModelConfig& model, int n);

/// Reads a grid CSV (header s,t,i,j,value) into per-pair grid kernels.
std::vector<std::pair<std::pair<std::string, std::string>, models::GridKernel>>
read_grid_csv(const std::string& path);

}  // namespace covlaw
