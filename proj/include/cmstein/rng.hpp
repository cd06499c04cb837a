#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace cmstein {

using Seed = std::uint64_t;

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline void mulhilo32(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

} // namespace detail

/// Philox4x32 with 10 rounds (Salmon et al., SC'11). Pure function of
/// (counter, key).
inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t M0 = 0xD2511F53U, M1 = 0xCD9E8D57U;
    constexpr std::uint32_t W0 = 0x9E3779B9U, W1 = 0xBB67AE85U;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        detail::mulhilo32(M0, ctr[0], hi0, lo0);
        detail::mulhilo32(M1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

/// Counter-based random stream. The key is the master seed and the upper
/// half of the counter is a hash of the stream tags, so every
/// (seed, tags...) tuple names an independent, reproducible stream no
/// matter which thread consumes it.
///
/// Satisfies UniformRandomBitGenerator; integer and unit-interval draws are
/// implemented here so results do not depend on the standard library's
/// distribution implementations.
class RandomStream {
public:
    using result_type = std::uint64_t;

    RandomStream(Seed seed, std::initializer_list<std::uint64_t> tags)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {
        std::uint64_t h = 0x243F6A8885A308D3ULL;
        for (auto t : tags) h = detail::splitmix64(h ^ detail::splitmix64(t));
        stream_ = h;
    }

    explicit RandomStream(Seed seed) : RandomStream(seed, {}) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return next_u64(); }

    std::uint32_t next_u32() {
        if (pos_ == 4) refill();
        return buffer_[pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    /// Uniform on {0, ..., bound-1}; bound must be positive. Lemire's
    /// multiply-shift with rejection, exact.
    std::uint64_t uniform_below(std::uint64_t bound) {
        unsigned __int128 p = static_cast<unsigned __int128>(next_u64()) * bound;
        auto low = static_cast<std::uint64_t>(p);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                p = static_cast<unsigned __int128>(next_u64()) * bound;
                low = static_cast<std::uint64_t>(p);
            }
        }
        return static_cast<std::uint64_t>(p >> 64);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    std::uint64_t blocks_used() const { return block_; }

private:
    void refill() {
        const std::array<std::uint32_t, 4> ctr{
            static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
            static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
        buffer_ = philox4x32_10(ctr, key_);
        ++block_;
        pos_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_ = 0;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int pos_ = 4;
};

/// Stream purposes, used as the first tag so streams for different jobs
/// never collide.
enum class StreamTag : std::uint64_t {
    DegreeSequence = 1,
    Configuration = 2,
    Vertex = 3,
    Coupling = 4,
    Family = 5,
};

inline std::uint64_t tag(StreamTag t) { return static_cast<std::uint64_t>(t); }

} // namespace cmstein
