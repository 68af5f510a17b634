#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace covlaw {

/// Labels of one random stream. Distinct label tuples give independent streams;
/// equal tuples give identical draws regardless of thread scheduling.
struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::string experiment;
    std::uint64_t n = 0;
    std::uint64_t sample = 0;
    std::uint64_t copy = 0;

    SeedSpec with_sample(std::uint64_t s) const {
        SeedSpec c = *this;
        c.sample = s;
        return c;
    }
    SeedSpec with_copy(std::uint64_t k) const {
        SeedSpec c = *this;
        c.copy = k;
        return c;
    }
};

/// Philox4x32-10 counter-based generator: a pure function of (key, counter).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

std::uint64_t splitmix64(std::uint64_t x);

/// 128 bits derived from the label tuple: key words and the upper counter words.
class StreamKey {
public:
    explicit StreamKey(const SeedSpec& seed);

    /// Two independent standard normals addressed by `counter` (Box-Muller).
    std::array<double, 2> normal_pair(std::uint64_t counter) const;
    /// Two uniforms in (0,1) addressed by `counter`.
    std::array<double, 2> uniform_pair(std::uint64_t counter) const;

private:
    std::array<std::uint32_t, 2> key_{};
    std::uint32_t hi0_ = 0, hi1_ = 0;
};

/// Sequential view over a StreamKey.
class NormalStream {
public:
    explicit NormalStream(const SeedSpec& seed) : key_(seed) {}
    double operator()();

private:
    StreamKey key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace covlaw
