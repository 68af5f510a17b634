#include "covlaw/sampler.hpp"

#include "covlaw/errors.hpp"

#include <cmath>

namespace covlaw {

namespace {

// Copies the strict upper triangle into the lower one and zeroes the diagonal's imaginary part.
void hermitize_from_upper(Matrix& x) {
    const Eigen::Index n = x.rows();
    for (Eigen::Index s = 0; s < n; ++s) {
        x(s, s) = Complex(x(s, s).real(), 0.0);
        for (Eigen::Index t = s + 1; t < n; ++t) x(t, s) = std::conj(x(s, t));
    }
}

}  // namespace

HermitianTuple sample_kraus(const DiscreteCovariance& eta, const SeedSpec& seed) {
    const int n = eta.n();
    const int m = eta.index_count();
    const auto& kraus = eta.kraus();
    const StreamKey key(seed);
    std::vector<Matrix> xs(m, Matrix::Zero(n, n));
    for (std::size_t k = 0; k < kraus.size(); ++k) {
        const double g = key.normal_pair(k / 2)[k % 2];
        for (int i = 0; i < m; ++i) xs[i].noalias() += g * kraus[k][i];
    }
    for (auto& x : xs) hermitize_from_upper(x);
    return HermitianTuple(n, eta.indices(), std::move(xs), 0.0);
}

HermitianTuple sample_kernel(const DiscreteCovariance& eta, const SeedSpec& seed, Exec exec) {
    if (!eta.is_kernel()) throw DomainError("entrywise sampling needs a kernel covariance");
    const int n = eta.n();
    const int m = eta.index_count();
    const StreamKey key(seed);
    std::vector<Matrix> xs(m, Matrix::Zero(n, n));
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

    if (m == 1) {
        const RealMatrix& h = eta.kernel_table(0, 0);
        Matrix& x = xs[0];
#pragma omp parallel for schedule(dynamic, 8) if (exec == Exec::Parallel)
        for (int s = 0; s < n; ++s) {
            for (int t = s; t < n; ++t) {
                const double sd = std::sqrt(std::max(0.0, h(s, t)) / n);
                if (sd == 0.0) continue;
                const auto g = key.normal_pair(static_cast<std::uint64_t>(s) * n + t);
                x(s, t) = s == t ? Complex(sd * g[0], 0.0)
                                 : Complex(sd * g[0] * inv_sqrt2, sd * g[1] * inv_sqrt2);
            }
        }
    } else {
        const auto& factors = eta.cell_factors();
#pragma omp parallel for schedule(dynamic, 8) if (exec == Exec::Parallel)
        for (int s = 0; s < n; ++s) {
            RealVector re(m), im(m);
            for (int t = s; t < n; ++t) {
                const RealMatrix& l = factors[static_cast<std::size_t>(s) * n + t];
                if (l.isZero(0.0)) continue;
                const std::uint64_t base = (static_cast<std::uint64_t>(s) * n + t) * m;
                for (int k = 0; k < m; ++k) {
                    const auto g = key.normal_pair(base + k);
                    re[k] = g[0];
                    im[k] = g[1];
                }
                const RealVector a = l * re;
                if (s == t) {
                    for (int i = 0; i < m; ++i) xs[i](s, s) = Complex(a[i], 0.0);
                } else {
                    const RealVector b = l * im;
                    for (int i = 0; i < m; ++i) xs[i](s, t) = Complex(a[i], b[i]) * inv_sqrt2;
                }
            }
        }
    }
    for (auto& x : xs) hermitize_from_upper(x);
    return HermitianTuple(n, eta.indices(), std::move(xs), 0.0);
}

HermitianTuple sample(const DiscreteCovariance& eta, const SeedSpec& seed, Exec exec) {
    if (eta.is_kernel()) return sample_kernel(eta, seed, exec);
    return sample_kraus(eta, seed);
}

HermitianTuple sample_partition_family(const DiscreteCovariance& eta, const PairPartition& pi,
                                       const std::vector<std::string>& indices,
                                       const SeedSpec& seed) {
    if (static_cast<int>(indices.size()) != pi.length())
        throw DomainError("index tuple length " + std::to_string(indices.size()) +
                          " does not match partition length " + std::to_string(pi.length()));
    const int l = pi.length();
    std::vector<Matrix> slots(l);
    std::vector<std::string> names(l);
    for (int p = 0; p < l; ++p) names[p] = std::to_string(p + 1);
    for (std::size_t b = 0; b < pi.size(); ++b) {
        const auto [r, s] = pi.blocks()[b];
        const HermitianTuple copy = sample(eta, seed.with_copy(b));
        slots[r - 1] = copy.at(indices[r - 1]);
        slots[s - 1] = copy.at(indices[s - 1]);
    }
    return HermitianTuple(eta.n(), std::move(names), std::move(slots), 0.0);
}

std::vector<HermitianTuple> sample_copies(const DiscreteCovariance& eta, int m, const SeedSpec& seed,
                                          Exec exec) {
    if (m < 1) throw DomainError("copy count must be at least 1");
    std::vector<HermitianTuple> out(m);
    for (int t = 0; t < m; ++t) out[t] = sample(eta, seed.with_copy(t), exec);
    return out;
}

}  // namespace covlaw
