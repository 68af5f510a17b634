#pragma once

#include "covlaw/covariance.hpp"
#include "covlaw/exec.hpp"

#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace covlaw::models {

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton iteration on P_order).
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int order);

/// Continuous piecewise-linear function given by breakpoints; zero outside them.
class PiecewiseLinear {
public:
    PiecewiseLinear() = default;
    PiecewiseLinear(std::vector<double> xs, std::vector<double> ys);

    double operator()(double x) const;
    /// Exact integral of f(x)^power over [a, b] (power 1 or 2).
    double integral(double a, double b, int power = 1) const;
    double sup_abs() const;
    const std::vector<double>& xs() const noexcept { return xs_; }
    const std::vector<double>& ys() const noexcept { return ys_; }

    static PiecewiseLinear constant_on_unit(double c);

private:
    std::vector<double> xs_, ys_;
};

struct ConstantKernel {
    double value = 0.0;
};

/// h(s,t) = profile(|s-t| / epsilon); the profile must vanish at r = 1, and h = 0 for |s-t| >= epsilon.
struct BandKernel {
    PiecewiseLinear profile;
    double epsilon = 1.0;
};

/// h(s,t) = coefficient * u(s)^power * v(t)^power.
struct SeparableKernel {
    double coefficient = 1.0;
    PiecewiseLinear u, v;
    int power = 1;
};

/// Values on a rectangular grid over [0,1]^2, bilinear in between.
struct GridKernel {
    std::vector<double> s_nodes, t_nodes;
    RealMatrix values;  // values(a, b) at (s_nodes[a], t_nodes[b])
};

using KernelTerm = std::variant<ConstantKernel, BandKernel, SeparableKernel, GridKernel>;

/// A sum of primitive terms.
struct KernelFunction {
    std::vector<KernelTerm> terms;

    double operator()(double s, double t) const;
    /// Exact integral over [s0,s1] x [t0,t1] (piecewise Gauss-Legendre of order `order`).
    double integral(double s0, double s1, double t0, double t1, int order = 4) const;
    /// Upper bound on sup |h| (exact for every primitive except sums of terms).
    double sup_abs() const;
};

/// Family (h_{i,j})_{i,j in F}; absent pairs are identically zero.
struct KernelSpec {
    std::vector<std::string> indices;
    std::map<std::pair<std::string, std::string>, KernelFunction> h;

    const KernelFunction* find(const std::string& i, const std::string& j) const;
    double operator()(const std::string& i, const std::string& j, double s, double t) const;
    /// Symmetry h_ij(s,t) = h_ji(t,s) and pointwise PSD on a probe grid.
    /// Throws InvariantViolation.
    void validate(int probe = 32) const;
};

struct DiscretizeOptions {
    int quadrature_order = 4;
};

/// eta_{i,j}(a)_{ss} = (1/n) sum_t H_{i,j}[s,t] a_tt with H = n^2 * (cell integral of h_{i,j}).
DiscreteCovariance discretize(const KernelSpec& kernel, int n, DiscretizeOptions opt = {},
                              Exec exec = Exec::Parallel);

/// The n x n table H_{i,j}[s,t] alone.
RealMatrix discretize_table(const KernelFunction& h, int n, DiscretizeOptions opt = {},
                            Exec exec = Exec::Parallel);

/// Independent GUE family: h_{i,j} = delta_{i=j}.
DiscreteCovariance gue(int n, std::vector<std::string> indices = {"1"});
KernelSpec gue_kernel(std::vector<std::string> indices = {"1"});

/// Single-index Gaussian band model with h(s,t) = profile(|s-t|/epsilon).
KernelSpec band_kernel(const PiecewiseLinear& profile, double epsilon, const std::string& index = "1");
DiscreteCovariance band(const PiecewiseLinear& profile, double epsilon, int n,
                        const std::string& index = "1");

/// Sum over (i,j) of sup|h_{i,j}| / n, the Choi-norm ceiling for the discretized model.
double choi_norm_ceiling(const KernelSpec& kernel, int n);

/// Exact cell-average discretization of a continuous function on [0,1].
Matrix discretize_function(const PiecewiseLinear& b, int n);

/// Named base functions b_omega and their level-n diagonal discretizations.
struct BaseTuple {
    std::map<std::string, PiecewiseLinear> functions;
    HermitianTuple discretize(int n) const;
};

// ---------------------------------------------------------------------------
// Interpolated free group factor models

using IntervalUnion = std::vector<std::pair<double, double>>;

double measure(const IntervalUnion& u);

struct FgfSpec {
    struct Entry {
        std::string index;
        IntervalUnion supp_f;
        IntervalUnion supp_g;  // must equal supp_f for J1
    };
    std::vector<Entry> j1;
    std::vector<Entry> j2;
};

struct FgfModel {
    KernelSpec kernel;
    double t = 0.0;
};

/// Continuous indicator of `u`: 1 inside, linear ramps of width `ramp` just inside each
/// interior endpoint, so the support is exactly the closure of `u`.
PiecewiseLinear smoothed_indicator(const IntervalUnion& u, double ramp);

/// Kernels h_ii = f_i(s)^2 f_i(t)^2 (J1) or f_i(s)^2 g_i(t)^2 + g_i(s)^2 f_i(t)^2 (J2) and the
/// parameter t = 1 + sum_J1 m(f)^2 + 2 sum_J2 m(f) m(g) computed from the given intervals.
FgfModel fgf_kernels(const FgfSpec& spec, double ramp);

}  // namespace covlaw::models
