#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace geoknot {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// The 64-bit seed forms the key, the 64-bit stream id occupies the upper
/// counter words, and the lower counter words index 128-bit output blocks.
/// Two generators with equal (seed, stream, position) produce identical
/// sequences; copying the object captures the full state.
class CounterRng {
public:
    using result_type = std::uint32_t;

    CounterRng() = default;
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (index_ == 4) {
            buffer_ = philox({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                              static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                             key_);
            ++block_;
            index_ = 0;
        }
        return buffer_[index_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t hi = (*this)();
        return (hi << 32) | (*this)();
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n); n must be positive. Lemire's nearly-divisionless method.
    std::uint64_t below(std::uint64_t n) {
        if (n <= max()) {
            const auto bound = static_cast<std::uint32_t>(n);
            std::uint64_t m = std::uint64_t{(*this)()} * bound;
            auto low = static_cast<std::uint32_t>(m);
            if (low < bound) {
                const std::uint32_t threshold = static_cast<std::uint32_t>(-bound) % bound;
                while (low < threshold) {
                    m = std::uint64_t{(*this)()} * bound;
                    low = static_cast<std::uint32_t>(m);
                }
            }
            return m >> 32;
        }
        // Rare wide case: rejection on the top bits.
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t r = next_u64();
        while (r >= limit) r = next_u64();
        return r % n;
    }

    /// Standard normal deviate (Box-Muller, no caching so state stays a pure counter).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Independent generator derived from this one's key and stream and `tag`.
    CounterRng split(std::uint64_t tag) const {
        const std::uint64_t key = (std::uint64_t{key_[1]} << 32) | key_[0];
        return CounterRng(mix(key ^ mix(stream_ + 0x632BE59BD9B4E019ULL)), mix(tag ^ mix(stream_)));
    }

    std::uint64_t position() const { return block_ * 4 + index_ - 4; }

    friend bool operator==(const CounterRng&, const CounterRng&) = default;

    static std::array<std::uint32_t, 4> philox(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
        constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
        constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
            key[0] += kW0;
            key[1] += kW1;
        }
        return ctr;
    }

    /// SplitMix64 finalizer, used for deriving keys.
    static constexpr std::uint64_t mix(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::array<std::uint32_t, 2> key_{0, 0};
    std::uint64_t stream_ = 0;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int index_ = 4;
};

}  // namespace geoknot
