#include "covlaw/covpoly.hpp"
#include "covlaw/errors.hpp"
#include "covlaw/models.hpp"

#include <doctest.h>

#include <random>

using namespace covlaw;

namespace {

const Alphabet kAlpha = Alphabet::make({"u", "w"}, {"1", "2"});

struct Fixture {
    DiscreteCovariance eta;
    HermitianTuple b, x;
};

Fixture dense_fixture(std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    const int n = 3;
    std::vector<std::array<Matrix, 2>> kr;
    for (int k = 0; k < 3; ++k) kr.push_back({random_hermitian(n, gen) / 3.0, random_hermitian(n, gen) / 3.0});
    auto eta = DiscreteCovariance::from_maps(n, {"1", "2"}, [kr](int i, int j, const Matrix& a) {
        Matrix out = Matrix::Zero(a.rows(), a.cols());
        for (const auto& t : kr) out += t[i] * a * t[j];
        return out;
    });
    HermitianTuple b(n, {"u", "w"}, {random_hermitian(n, gen), random_hermitian(n, gen)});
    HermitianTuple x(n, {"1", "2"}, {random_hermitian(n, gen), random_hermitian(n, gen)});
    return {eta, b, x};
}

CovPolynomial random_poly(std::mt19937_64& gen, int depth) {
    std::uniform_int_distribution<int> pick(0, 9);
    auto atom = [&]() -> CovPolynomial {
        switch (pick(gen) % 6) {
            case 0: return CovPolynomial::base(kAlpha, "u");
            case 1: return CovPolynomial::base(kAlpha, "w", true);
            case 2: return CovPolynomial::x(kAlpha, "1");
            case 3: return CovPolynomial::x(kAlpha, "2");
            case 4: return CovPolynomial::scalar(kAlpha, Complex(0.5, -1.0));
            default: return CovPolynomial::x(kAlpha, "1", true);
        }
    };
    CovPolynomial f = atom();
    const int ops = 1 + pick(gen) % 3;
    for (int k = 0; k < ops; ++k) {
        CovPolynomial g = atom();
        if (depth > 0 && pick(gen) < 4) {
            const std::string i = pick(gen) % 2 ? "1" : "2", j = pick(gen) % 2 ? "1" : "2";
            g = apply_lambda(i, j, random_poly(gen, depth - 1));
        }
        f = pick(gen) < 6 ? f * g : f + g;
    }
    return f;
}

double max_abs(const Matrix& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("canonical form merges and prunes") {
    const auto x1 = CovPolynomial::x(kAlpha, "1");
    const auto u = CovPolynomial::base(kAlpha, "u");
    CHECK((x1 - x1).is_zero());
    CHECK((x1 + u) == (u + x1));
    CHECK((x1 + x1) == x1.scaled(2.0));
    CHECK((x1 * u + u * x1).terms().size() == 2);
    CHECK(x1.pow(0) == CovPolynomial::one(kAlpha));
    CHECK(x1.pow(3) == x1 * x1 * x1);
    CHECK(degree(x1.pow(3) + u) == 3);
}

TEST_CASE("alphabet checks") {
    CHECK_THROWS_AS(CovPolynomial::x(kAlpha, "3"), DomainError);
    CHECK_THROWS_AS(CovPolynomial::base(kAlpha, "v"), DomainError);
    CHECK_THROWS_AS(apply_lambda("1", "9", CovPolynomial::one(kAlpha)), DomainError);
    const Alphabet other = Alphabet::make({}, {"1"});
    CHECK_THROWS_AS(CovPolynomial::x(kAlpha, "1") + CovPolynomial::x(other, "1"), DomainError);
    CHECK_THROWS_AS(CovMonomial(1.0, {{}, {}, {}, {}, {}}, PairPartition({{1, 3}, {2, 4}}), {"1", "1", "1", "1"}),
                    DomainError);
}

TEST_CASE("algebra laws hold symbolically") {
    std::mt19937_64 gen(21);
    for (int trial = 0; trial < 40; ++trial) {
        const auto f = random_poly(gen, 2), g = random_poly(gen, 2), h = random_poly(gen, 1);
        CHECK((f * g) * h == f * (g * h));
        CHECK(f * (g + h) == f * g + f * h);
        CHECK((f + g) * h == f * h + g * h);
        CHECK(adjoint(adjoint(f)) == f);
        CHECK(adjoint(f * g) == adjoint(g) * adjoint(f));
        CHECK(multiply(f, g) == f * g);
        CHECK(depth(apply_lambda("1", "2", f)) == depth(f) + 1);
    }
}

TEST_CASE("text form round-trips") {
    std::mt19937_64 gen(22);
    for (int trial = 0; trial < 60; ++trial) {
        const auto f = random_poly(gen, 3);
        const std::string text = to_string(f);
        CAPTURE(text);
        CHECK(parse_polynomial(text, kAlpha) == f);
        CHECK(to_string(parse_polynomial(text, kAlpha)) == text);
    }
    CHECK(to_string(CovPolynomial(kAlpha)) == "0");
    CHECK(to_string(parse_polynomial("x:1 x:1 x:1")) == "x:1^3");
    CHECK(to_string(parse_polynomial("2 L[1,1](x:1^2) x:1^2")) == "2 L[1,1](x:1^2) x:1^2");
    CHECK(parse_polynomial("x:1 - x:1").is_zero());
    CHECK(parse_polynomial("(x:1 + b:w)^2") == parse_polynomial("x:1^2 + x:1 b:w + b:w x:1 + b:w^2"));
    CHECK(parse_polynomial("{0,1} b:w*") == CovPolynomial::base(Alphabet::make({"w"}, {}), "w", true).scaled(Complex(0, 1)));
}

TEST_CASE("parse errors carry the column") {
    auto message = [](const std::string& text) {
        try {
            parse_polynomial(text);
        } catch (const DomainError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("x:1 +").find("column") != std::string::npos);
    CHECK(message("L[1](x:1)").find("column") != std::string::npos);
    CHECK(message("y:1").find("column 1") != std::string::npos);
    CHECK_THROWS_AS(parse_polynomial("x:3", kAlpha), DomainError);
}

TEST_CASE("evaluation is a homomorphism") {
    std::mt19937_64 gen(23);
    const Fixture fx = dense_fixture(24);
    const EvalInputs in{&fx.b, &fx.x, &fx.eta};
    for (int trial = 0; trial < 40; ++trial) {
        const auto f = random_poly(gen, 2), g = random_poly(gen, 2);
        const Matrix ef = evaluate(f, in), eg = evaluate(g, in);
        CHECK(max_abs(evaluate(f + g, in) - (ef + eg)) < 1e-10);
        CHECK(max_abs(evaluate(f * g, in) - ef * eg) < 1e-10);
        CHECK(max_abs(evaluate(adjoint(f), in) - ef.adjoint()) < 1e-10);
        CHECK(max_abs(evaluate(apply_lambda("1", "2", f), in) - fx.eta.apply(0, 1, ef)) < 1e-10);
        CHECK(max_abs(evaluate(f, in, ReductionOrder::LargestFirst) - ef) < 1e-10);
        CHECK(std::abs(evaluate_trace(f, in) - normalized_trace(ef)) < 1e-10);
    }
}

TEST_CASE("evaluation with kernel covariances and diagonal base") {
    std::mt19937_64 gen(25);
    const int n = 12;
    const auto eta = models::band(models::PiecewiseLinear({0.0, 1.0}, {1.0, 0.0}), 0.5, n);
    models::BaseTuple base;
    base.functions["u"] = models::PiecewiseLinear({0.0, 1.0}, {-1.0, 1.0});
    base.functions["w"] = models::PiecewiseLinear({0.0, 1.0}, {2.0, 0.5});
    const HermitianTuple b = base.discretize(n);
    const HermitianTuple x(n, {"1"}, {random_hermitian(n, gen)});
    const Alphabet a = Alphabet::make({"u", "w"}, {"1"});
    const EvalInputs in{&b, &x, &eta};
    const auto f = parse_polynomial("b:u L[1,1](x:1 b:w x:1) x:1 + L[1,1](L[1,1](x:1^2) b:u)", a);
    const Matrix xm = x[0], u = b.at("u"), w = b.at("w");
    const Matrix want = u * eta.apply(0, 0, xm * w * xm) * xm + eta.apply(0, 0, eta.apply(0, 0, xm * xm) * u);
    CHECK(max_abs(evaluate(f, in) - want) < 1e-12);
    CHECK(std::abs(evaluate_trace(f, in) - normalized_trace(want)) < 1e-12);
}

TEST_CASE("missing inputs are reported") {
    const auto f = parse_polynomial("x:1 b:w");
    CHECK_THROWS_AS(evaluate(f, EvalInputs{}), DomainError);
    CHECK_THROWS_AS(evaluate(CovPolynomial::scalar(Alphabet{}, 2.0), EvalInputs{}), DomainError);
}
