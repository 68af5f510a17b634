#include "covlaw/covariance.hpp"
#include "covlaw/models.hpp"
#include "covlaw/partitions.hpp"
#include "covlaw/rng.hpp"
#include "covlaw/sampler.hpp"

#include <doctest.h>

#include <cmath>

using namespace covlaw;

TEST_CASE("Philox4x32-10 known answers") {
    using A4 = std::array<std::uint32_t, 4>;
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("stream keys separate labels") {
    const SeedSpec base{1, "exp", 16, 0, 0};
    const StreamKey a(base), b(base.with_sample(1)), c(base.with_copy(1)), d(SeedSpec{1, "exq", 16, 0, 0});
    CHECK(a.normal_pair(0) == StreamKey(base).normal_pair(0));
    CHECK(a.normal_pair(0) != b.normal_pair(0));
    CHECK(a.normal_pair(0) != c.normal_pair(0));
    CHECK(a.normal_pair(0) != d.normal_pair(0));
    for (std::uint64_t k = 0; k < 1000; ++k) {
        const auto u = a.uniform_pair(k);
        CHECK(u[0] > 0.0);
        CHECK(u[0] < 1.0);
        CHECK(u[1] > 0.0);
        CHECK(u[1] < 1.0);
    }
}

TEST_CASE("normal stream moments") {
    NormalStream g(SeedSpec{3, "moments", 0, 0, 0});
    const int count = 400000;
    double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
    for (int k = 0; k < count; ++k) {
        const double x = g();
        s1 += x;
        s2 += x * x;
        s3 += x * x * x;
        s4 += x * x * x * x;
    }
    CHECK(std::abs(s1 / count) < 5.0 / std::sqrt(count));
    CHECK(std::abs(s2 / count - 1.0) < 5.0 * std::sqrt(2.0 / count));
    CHECK(std::abs(s3 / count) < 5.0 * std::sqrt(15.0 / count));
    CHECK(std::abs(s4 / count - 3.0) < 5.0 * std::sqrt(96.0 / count));
}

TEST_CASE("samples are Hermitian and deterministic") {
    const auto eta = models::band(models::PiecewiseLinear({0.0, 1.0}, {1.0, 0.0}), 0.4, 24);
    const SeedSpec seed{5, "det", 24, 3, 0};
    const HermitianTuple a = sample(eta, seed, Exec::Serial);
    const HermitianTuple b = sample(eta, seed, Exec::Parallel);
    CHECK((a[0] - b[0]).norm() == 0.0);
    CHECK((a[0] - a[0].adjoint()).norm() == 0.0);
    const HermitianTuple c = sample(eta, seed.with_sample(4));
    CHECK((a[0] - c[0]).norm() > 0.0);
}

namespace {

// Empirical E[X_i a X_j] over `count` samples of a sampler.
template <class Draw>
Matrix empirical(const Draw& draw, int count, int i, int j, const Matrix& a) {
    Matrix acc = Matrix::Zero(a.rows(), a.cols());
    for (int s = 0; s < count; ++s) {
        const HermitianTuple x = draw(s);
        acc += x[i] * a * x[j];
    }
    return acc / double(count);
}

}  // namespace

TEST_CASE("sampler reproduces the covariance in mean") {
    models::KernelSpec k;
    k.indices = {"1", "2"};
    k.h[{"1", "1"}].terms.push_back(models::ConstantKernel{1.0});
    k.h[{"2", "2"}].terms.push_back(models::SeparableKernel{1.0, models::PiecewiseLinear({0.0, 1.0}, {0.5, 1.5}),
                                                            models::PiecewiseLinear({0.0, 1.0}, {0.5, 1.5}), 1});
    k.h[{"1", "2"}].terms.push_back(models::ConstantKernel{0.3});
    k.h[{"2", "1"}].terms.push_back(models::ConstantKernel{0.3});
    const int n = 6;
    const auto eta = models::discretize(k, n);
    std::mt19937_64 gen(9);
    const Matrix a = random_hermitian(n, gen);
    const int count = 20000;
    for (auto [i, j] : {std::pair{0, 0}, std::pair{0, 1}, std::pair{1, 1}}) {
        const Matrix want = eta.apply(i, j, a);
        const Matrix kern = empirical([&](int s) { return sample_kernel(eta, SeedSpec{1, "mk", 6, std::uint64_t(s), 0}); },
                                      count, i, j, a);
        const Matrix kr = empirical([&](int s) { return sample_kraus(eta, SeedSpec{1, "mr", 6, std::uint64_t(s), 0}); },
                                    count, i, j, a);
        // Entries of X a X have O(1) variance; 20000 samples give errors around 0.01.
        CHECK((kern - want).cwiseAbs().maxCoeff() < 0.06);
        CHECK((kr - want).cwiseAbs().maxCoeff() < 0.06);
    }
}

TEST_CASE("dense covariances use the Kraus construction") {
    std::mt19937_64 gen(10);
    const Matrix p = random_hermitian(3, gen) / 3.0;
    const auto eta = DiscreteCovariance::from_maps(3, {"1"}, [p](int, int, const Matrix& a) { return Matrix(p * a * p); });
    const Matrix a = Matrix::Identity(3, 3);
    const Matrix emp = empirical([&](int s) { return sample(eta, SeedSpec{2, "dense", 3, std::uint64_t(s), 0}); }, 20000, 0, 0, a);
    CHECK((emp - eta.apply(0, 0, a)).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("partition families share copies within blocks") {
    const auto eta = models::gue(4, {"a", "b"});
    const PairPartition pi({{1, 3}, {2, 4}});
    const HermitianTuple x = sample_partition_family(eta, pi, {"a", "b", "a", "b"}, SeedSpec{4, "pf", 4, 0, 0});
    CHECK(x.indices() == std::vector<std::string>{"1", "2", "3", "4"});
    CHECK((x.at("1") - x.at("3")).norm() == 0.0);
    CHECK((x.at("2") - x.at("4")).norm() == 0.0);
    CHECK((x.at("1") - x.at("2")).norm() > 0.0);
}

TEST_CASE("independent copies") {
    const auto eta = models::gue(5);
    const SeedSpec seed{6, "copies", 5, 0, 0};
    const auto copies = sample_copies(eta, 3, seed, Exec::Parallel);
    const auto serial = sample_copies(eta, 3, seed, Exec::Serial);
    REQUIRE(copies.size() == 3);
    for (int t = 0; t < 3; ++t) {
        CHECK((copies[t][0] - sample(eta, seed.with_copy(t))[0]).norm() == 0.0);
        CHECK((copies[t][0] - serial[t][0]).norm() == 0.0);
    }
    CHECK((copies[0][0] - copies[1][0]).norm() > 0.0);
}
