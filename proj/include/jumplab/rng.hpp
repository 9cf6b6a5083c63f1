#pragma once

// Counter-based random streams.
//
// Every stream is addressed by (master seed, replication, day, tag); the
// generator is Philox4x32-10, so any stream can be produced independently of
// every other one and results cannot depend on scheduling or thread count.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace jumplab {

/// Stream purposes. Distinct tags never share random numbers.
enum class StreamTag : std::uint32_t {
    Simulation = 1,
    Jumps = 2,
    Noise = 3,
    Pz2 = 4,
    Pz4 = 5,
    Generic = 99,
};

struct StreamKey {
    std::uint64_t seed = 0;
    std::uint32_t replication = 0;
    std::uint32_t day = 0;
};

namespace detail {

inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{m0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{m1} * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        key[0] += w0;
        key[1] += w1;
    }
    return ctr;
}

}  // namespace detail

/// A deterministic random stream; satisfies UniformRandomBitGenerator.
class RandomStream {
public:
    using result_type = std::uint64_t;

    RandomStream(StreamKey key, StreamTag tag)
        : key_{static_cast<std::uint32_t>(key.seed), static_cast<std::uint32_t>(key.seed >> 32)},
          ctr_{0u, key.day, key.replication, static_cast<std::uint32_t>(tag)} {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (pos_ >= 2) refill();
        return block_[pos_++];
    }

    /// Uniform on the open interval (0, 1).
    double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Exponential with the given mean.
    double exponential(double mean) { return -mean * std::log(uniform()); }

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer on [lo, hi].
    std::uint32_t uniform_int(std::uint32_t lo, std::uint32_t hi) {
        const std::uint64_t span = std::uint64_t{hi} - lo + 1;
        return lo + static_cast<std::uint32_t>(static_cast<double>(span) * uniform());
    }

private:
    void refill() {
        const auto out = detail::philox4x32_10(ctr_, key_);
        block_[0] = (std::uint64_t{out[0]} << 32) | out[1];
        block_[1] = (std::uint64_t{out[2]} << 32) | out[3];
        ++ctr_[0];
        pos_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> ctr_;
    std::array<std::uint64_t, 2> block_{};
    int pos_ = 2;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace jumplab
