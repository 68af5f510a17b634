#include "covlaw/rng.hpp"

#include <cmath>
#include <numbers>

namespace covlaw {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

std::uint64_t hash_string(const std::string& s) {
    // FNV-1a, then mixed.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return splitmix64(h);
}

inline double to_unit_open(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;  // 53 bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kM0, c[0], hi0, lo0);
        mulhilo(kM1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kW0;
        k[1] += kW1;
    }
    return c;
}

StreamKey::StreamKey(const SeedSpec& seed) {
    std::uint64_t h = splitmix64(seed.master_seed);
    h = splitmix64(h ^ hash_string(seed.experiment));
    h = splitmix64(h ^ seed.n);
    h = splitmix64(h ^ (seed.sample * 0xD1B54A32D192ED03ULL));
    h = splitmix64(h ^ (seed.copy * 0x8CB92BA72F3D8DD7ULL));
    const std::uint64_t h2 = splitmix64(h ^ 0xA0761D6478BD642FULL);
    key_ = {static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    hi0_ = static_cast<std::uint32_t>(h2);
    hi1_ = static_cast<std::uint32_t>(h2 >> 32);
}

std::array<double, 2> StreamKey::uniform_pair(std::uint64_t counter) const {
    const auto r = philox4x32(
        {static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32), hi0_, hi1_}, key_);
    return {to_unit_open(r[0], r[1]), to_unit_open(r[2], r[3])};
}

std::array<double, 2> StreamKey::normal_pair(std::uint64_t counter) const {
    const auto [u1, u2] = uniform_pair(counter);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

double NormalStream::operator()() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const auto [a, b] = key_.normal_pair(counter_++);
    spare_ = b;
    has_spare_ = true;
    return a;
}

}  // namespace covlaw
