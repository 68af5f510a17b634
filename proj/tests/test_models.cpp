#include "covlaw/errors.hpp"
#include "covlaw/models.hpp"

#include <doctest.h>

#include <cmath>

using namespace covlaw;
using namespace covlaw::models;

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2k-1 exactly") {
    for (int order = 1; order <= 10; ++order) {
        const auto [x, w] = gauss_legendre(order);
        REQUIRE(x.size() == static_cast<std::size_t>(order));
        for (int deg = 0; deg <= 2 * order - 1; ++deg) {
            double q = 0.0;
            for (int k = 0; k < order; ++k) q += w[k] * std::pow(x[k], deg);
            const double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
            CHECK(q == doctest::Approx(exact).epsilon(1e-13));
        }
    }
}

TEST_CASE("piecewise-linear functions") {
    const PiecewiseLinear f({0.0, 0.5, 1.0}, {0.0, 2.0, 0.0});
    CHECK(f(0.25) == doctest::Approx(1.0));
    CHECK(f(1.5) == 0.0);
    CHECK(f.integral(0.0, 1.0) == doctest::Approx(1.0));
    CHECK(f.integral(0.0, 1.0, 2) == doctest::Approx(4.0 / 3.0));
    CHECK(f.integral(0.25, 0.5) == doctest::Approx(0.375));
    CHECK(f.sup_abs() == 2.0);
    CHECK_THROWS_AS(PiecewiseLinear({0.0, 0.0}, {1.0, 1.0}), DomainError);
    CHECK(PiecewiseLinear::constant_on_unit(3.0).integral(0.0, 1.0) == doctest::Approx(3.0));
}

TEST_CASE("kernel integrals match midpoint sums") {
    KernelFunction h;
    h.terms.push_back(BandKernel{PiecewiseLinear({0.0, 1.0}, {1.0, 0.0}), 0.3});
    h.terms.push_back(SeparableKernel{0.5, PiecewiseLinear({0.0, 1.0}, {1.0, 2.0}), PiecewiseLinear({0.0, 1.0}, {2.0, 1.0}), 2});
    h.terms.push_back(ConstantKernel{0.25});
    const int m = 800;
    double mid = 0.0;
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) mid += h((a + 0.5) / m * 0.5, 0.2 + (b + 0.5) / m * 0.4);
    mid *= 0.5 * 0.4 / (double(m) * m);
    CHECK(h.integral(0.0, 0.5, 0.2, 0.6) == doctest::Approx(mid).epsilon(1e-5));
}

TEST_CASE("discretization: serial equals parallel") {
    const KernelSpec k = band_kernel(PiecewiseLinear({0.0, 0.6, 1.0}, {1.0, 1.0, 0.0}), 0.25);
    const KernelFunction& h = *k.find("1", "1");
    const RealMatrix a = discretize_table(h, 40, {}, Exec::Serial);
    const RealMatrix b = discretize_table(h, 40, {}, Exec::Parallel);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    // Cell averages: H[s,t] = n^2 * integral over the cell, bounded by sup h.
    CHECK(a.maxCoeff() <= 1.0 + 1e-14);
    CHECK(a(3, 3) == doctest::Approx(1.0));
}

TEST_CASE("band model geometry and norms") {
    const PiecewiseLinear profile({0.0, 1.0}, {1.0, 0.0});
    for (int n : {8, 20, 64}) {
        const auto eta = band(profile, 0.3, n);
        const RealMatrix& h = eta.kernel_table(0, 0);
        for (int s = 0; s < n; ++s)
            for (int t = 0; t < n; ++t) {
                const bool outside = (std::abs(s - t) - 1.0) / n >= 0.3 - 1e-12;
                CHECK((h(s, t) == 0.0) == outside);
            }
        CHECK(eta.choi_norm() <= choi_norm_ceiling(band_kernel(profile, 0.3), n) * (1 + 1e-12));
    }
    CHECK_THROWS_AS(band_kernel(PiecewiseLinear({0.0, 1.0}, {1.0, 1.0}), 0.3), DomainError);
}

TEST_CASE("GUE as a kernel model") {
    const auto eta = gue(6, {"a", "b"});
    CHECK(eta.choi_norm() == doctest::Approx(1.0 / 6));
    CHECK(eta.eta_one_norm() == doctest::Approx(1.0));
    CHECK(eta.apply(0, 1, Matrix::Identity(6, 6)).norm() == 0.0);
}

TEST_CASE("kernel validation") {
    KernelSpec k;
    k.indices = {"1", "2"};
    k.h[{"1", "2"}].terms.push_back(ConstantKernel{1.0});
    CHECK_THROWS_AS(k.validate(), InvariantViolation);  // missing mirror
    k.h[{"2", "1"}].terms.push_back(ConstantKernel{1.0});
    CHECK_THROWS_AS(k.validate(), InvariantViolation);  // zero diagonal, not PSD
    k.h[{"1", "1"}].terms.push_back(ConstantKernel{1.0});
    k.h[{"2", "2"}].terms.push_back(ConstantKernel{1.0});
    CHECK_NOTHROW(k.validate());
    k.h[{"1", "3"}].terms.push_back(ConstantKernel{1.0});
    CHECK_THROWS_AS(k.validate(), DomainError);
}

TEST_CASE("weighted choi norm ceiling") {
    KernelSpec k;
    k.indices = {"1", "2"};
    k.h[{"1", "1"}].terms.push_back(ConstantKernel{1.0});
    k.h[{"2", "2"}].terms.push_back(SeparableKernel{1.0, PiecewiseLinear({0.0, 1.0}, {0.5, 1.5}),
                                                    PiecewiseLinear({0.0, 1.0}, {0.5, 1.5}), 1});
    k.h[{"1", "2"}].terms.push_back(ConstantKernel{0.2});
    k.h[{"2", "1"}].terms.push_back(ConstantKernel{0.2});
    for (int n : {4, 16, 64}) {
        const auto eta = discretize(k, n);
        CHECK(eta.choi_norm() <= choi_norm_ceiling(k, n) * (1 + 1e-12));
        CHECK(choi_norm_ceiling(k, n) == doctest::Approx((1.0 + 2.25 + 0.4) / n));
    }
}

TEST_CASE("base function discretization") {
    const PiecewiseLinear f({0.0, 1.0}, {0.0, 1.0});
    const Matrix d = discretize_function(f, 4);
    for (int s = 0; s < 4; ++s) CHECK(d(s, s).real() == doctest::Approx((s + 0.5) / 4));
    CHECK((d - Matrix(d.diagonal().asDiagonal())).norm() == 0.0);
    BaseTuple b;
    b.functions["w"] = f;
    const HermitianTuple t = b.discretize(4);
    CHECK(t.indices() == std::vector<std::string>{"w"});
}

TEST_CASE("interpolated free group factor parameter") {
    FgfSpec a;
    a.j2.push_back({"1", {{0.0, 0.5}}, {{0.5, 1.0}}});
    CHECK(fgf_kernels(a, 0.01).t == 1.5);
    FgfSpec b;
    b.j1.push_back({"1", {{0.0, 1.0}}, {{0.0, 1.0}}});
    CHECK(fgf_kernels(b, 0.01).t == 2.0);
    FgfSpec c;
    c.j1.push_back({"1", {{0.0, 0.5}}, {{0.0, 0.5}}});
    c.j2.push_back({"2", {{0.0, 0.25}}, {{0.25, 1.0}}});
    CHECK(fgf_kernels(c, 0.01).t == doctest::Approx(1.0 + 0.25 + 2 * 0.25 * 0.75));
    FgfSpec d;
    d.j2.push_back({"1", {{0.0, 0.25}}, {{0.5, 1.0}}});
    CHECK_THROWS_AS(fgf_kernels(d, 0.01), DomainError);
    CHECK(measure({{0.0, 0.25}, {0.5, 0.75}}) == doctest::Approx(0.5));
}

TEST_CASE("smoothed indicators") {
    const PiecewiseLinear f = smoothed_indicator({{0.25, 0.5}}, 0.05);
    CHECK(f(0.2) == 0.0);
    CHECK(f(0.25) == 0.0);
    CHECK(f(0.375) == 1.0);
    CHECK(f(0.275) == doctest::Approx(0.5));
    CHECK(f(0.55) == 0.0);
    const PiecewiseLinear g = smoothed_indicator({{0.0, 1.0}}, 0.05);
    CHECK(g(0.0) == 1.0);
    CHECK(g(1.0) == 1.0);
}
