#include "covlaw/covariance.hpp"
#include "covlaw/errors.hpp"
#include "covlaw/models.hpp"

#include <doctest.h>

#include <sstream>

using namespace covlaw;

namespace {

double max_abs(const Matrix& a) { return a.cwiseAbs().maxCoeff(); }

// eta(a) = sum_k a_k a a_k for random Hermitian a_k.
DiscreteCovariance random_cp(int n, int k, std::mt19937_64& gen, CovarianceFn* fn_out = nullptr) {
    std::vector<Matrix> kr;
    for (int a = 0; a < k; ++a) kr.push_back(random_hermitian(n, gen) / std::sqrt(double(n * k)));
    CovarianceFn fn = [kr](int, int, const Matrix& a) {
        Matrix out = Matrix::Zero(a.rows(), a.cols());
        for (const Matrix& x : kr) out += x * a * x;
        return out;
    };
    if (fn_out) *fn_out = fn;
    return DiscreteCovariance::from_maps(n, {"1"}, fn);
}

}  // namespace

TEST_CASE("GUE Choi matrix is I/n") {
    for (int n : {1, 2, 5}) {
        const auto eta = DiscreteCovariance::from_maps(
            n, {"1"}, [n](int, int, const Matrix& a) { return Matrix(a.trace() / double(n) * Matrix::Identity(n, n)); });
        const Matrix want = Matrix::Identity(n * n, n * n) / double(n);
        CHECK(max_abs(eta.choi() - want) < 1e-15);
        CHECK(eta.choi_norm() == doctest::Approx(1.0 / n));
        CHECK(eta.eta_one_norm() == doctest::Approx(1.0));
        const auto kernel = models::gue(n);
        CHECK(max_abs(kernel.choi() - want) < 1e-15);
        CHECK(kernel.choi_norm() == doctest::Approx(1.0 / n));
    }
}

TEST_CASE("invariant violations are reported") {
    const int n = 3;
    // a -> a^T is positive but not completely positive.
    CHECK_THROWS_AS(DiscreteCovariance::from_maps(n, {"1"}, [](int, int, const Matrix& a) { return Matrix(a.transpose()); }),
                    InvariantViolation);
    // a -> p a p^* with p = E_01 is completely positive but not trace-symmetric.
    Matrix p = Matrix::Zero(n, n);
    p(0, 1) = 1.0;
    CHECK_THROWS_AS(
        DiscreteCovariance::from_maps(n, {"1"}, [p](int, int, const Matrix& a) { return Matrix(p * a * p.adjoint()); }),
        InvariantViolation);
    CHECK_THROWS_AS(DiscreteCovariance::from_maps(n, {"1", "1"}, [](int, int, const Matrix& a) { return a; }), DomainError);
    RealMatrix bad = RealMatrix::Ones(n, n);
    bad(0, 0) = -1.0;
    CHECK_THROWS_AS(DiscreteCovariance::from_kernel_table(n, {"1"}, {bad}), InvariantViolation);
}

TEST_CASE("Kraus decomposition reconstructs the map") {
    std::mt19937_64 gen(11);
    for (int n : {2, 3, 4}) {
        for (int k : {1, 3}) {
            const auto eta = random_cp(n, k, gen);
            const auto kraus = kraus_decompose(eta);
            CHECK(kraus_reconstruction_residual(eta, kraus) < 1e-10);
            for (const HermitianTuple& t : kraus)
                for (const Matrix& a : t.matrices()) CHECK(hermitian_defect(a) < 1e-12);
        }
    }
}

TEST_CASE("tau-symmetry holds for applied maps") {
    std::mt19937_64 gen(12);
    const auto eta = random_cp(4, 2, gen);
    const Matrix a = random_matrix(4, gen), b = random_matrix(4, gen);
    const Complex lhs = normalized_trace(eta.apply(0, 0, a) * b);
    const Complex rhs = normalized_trace(a * eta.apply(0, 0, b));
    CHECK(std::abs(lhs - rhs) < 1e-12);
}

TEST_CASE("Choi round trip through serialization") {
    std::mt19937_64 gen(13);
    CovarianceFn fn;
    const auto eta = random_cp(3, 2, gen, &fn);
    std::stringstream js, bin;
    write_json(js, eta);
    write_binary(bin, eta);
    const auto a = read_json(js);
    const auto b = read_binary(bin);
    for (int s = 0; s < 3; ++s)
        for (int t = 0; t < 3; ++t) {
            const Matrix e = matrix_unit(3, s, t);
            CHECK(max_abs(a.apply(0, 0, e) - fn(0, 0, e)) < 1e-12);
            CHECK(max_abs(b.apply(0, 0, e) - fn(0, 0, e)) == 0.0);
        }
    std::stringstream garbage("nope");
    CHECK_THROWS_AS(read_binary(garbage), ConfigError);
}

TEST_CASE("kernel form agrees with the dense form") {
    const int n = 5;
    std::mt19937_64 gen(14);
    RealMatrix h(n, n);
    for (int s = 0; s < n; ++s)
        for (int t = 0; t < n; ++t) h(s, t) = 1.0 + 0.5 * std::cos(double(s + t)) + 0.1 * s * t;
    const auto kern = DiscreteCovariance::from_kernel_table(n, {"1"}, {h});
    const auto dense = DiscreteCovariance::from_maps(
        n, {"1"},
        [&](int, int, const Matrix& a) {
            Matrix out = Matrix::Zero(n, n);
            for (int s = 0; s < n; ++s)
                for (int t = 0; t < n; ++t) out(s, s) += h(s, t) * a(t, t) / double(n);
            return out;
        },
        BaseAlgebra::Diagonal);
    CHECK(kern.is_kernel());
    CHECK_FALSE(dense.is_kernel());
    CHECK(kern.base() == BaseAlgebra::Diagonal);
    CHECK(max_abs(kern.choi() - dense.choi()) < 1e-14);
    CHECK(kern.choi_norm() == doctest::Approx(dense.choi_norm()).epsilon(1e-12));
    CHECK(kern.eta_one_norm() == doctest::Approx(dense.eta_one_norm()).epsilon(1e-12));
    const Matrix a = random_matrix(n, gen);
    CHECK(max_abs(kern.apply(0, 0, a) - dense.apply(0, 0, a)) < 1e-13);
    const Vector d = kern.apply_diagonal(0, 0, a.diagonal());
    CHECK((d - kern.apply(0, 0, a).diagonal()).norm() < 1e-13);
    CHECK(kraus_reconstruction_residual(kern, kern.kraus()) < 1e-12);
}

TEST_CASE("restriction to a sub-family") {
    const auto eta = models::gue(3, {"a", "b", "c"});
    const auto sub = eta.restrict({2, 0});
    CHECK(sub.indices() == std::vector<std::string>{"c", "a"});
    CHECK(sub.index_of("a") == 1);
    CHECK_THROWS_AS(sub.index_of("b"), DomainError);
    const Matrix one = Matrix::Identity(3, 3);
    CHECK(max_abs(sub.apply(0, 1, one)) == 0.0);
    CHECK(max_abs(sub.apply("a", "a", one) - one) < 1e-15);
}

TEST_CASE("Choi cap for large kernel covariances") {
    const auto eta = models::gue(128);
    CHECK_FALSE(eta.choi_available());
    CHECK_THROWS_AS(eta.choi(), BudgetExceeded);
    CHECK(eta.choi_norm() == doctest::Approx(1.0 / 128));
}

TEST_CASE("Hermitian tuples") {
    Matrix a = Matrix::Identity(2, 2);
    a(0, 1) = Complex(0.0, 1.0);
    CHECK_THROWS_AS(HermitianTuple(2, {"1"}, {a}), DomainError);
    const HermitianTuple t(2, {"1"}, {Matrix::Identity(2, 2)});
    CHECK(t.contains("1"));
    CHECK_THROWS_AS(t.at("2"), DomainError);
}
