#ifndef G2HBT_RNG_HPP
#define G2HBT_RNG_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

// Counter-based random streams (Philox4x32-10). A variate is a pure function
// of (stream key, counter), so any slice of any stream can be generated on any
// thread in any order and still be bit-identical.

namespace g2hbt {

namespace detail {

struct PhiloxBlock {
    uint32_t x[4];
};

inline void philox_round(uint32_t ctr[4], const uint32_t key[2]) {
    constexpr uint64_t M0 = 0xD2511F53ull, M1 = 0xCD9E8D57ull;
    const uint64_t p0 = M0 * ctr[0];
    const uint64_t p1 = M1 * ctr[2];
    const uint32_t h0 = static_cast<uint32_t>(p0 >> 32), l0 = static_cast<uint32_t>(p0);
    const uint32_t h1 = static_cast<uint32_t>(p1 >> 32), l1 = static_cast<uint32_t>(p1);
    const uint32_t out[4] = {h1 ^ ctr[1] ^ key[0], l1, h0 ^ ctr[3] ^ key[1], l0};
    ctr[0] = out[0]; ctr[1] = out[1]; ctr[2] = out[2]; ctr[3] = out[3];
}

inline PhiloxBlock philox4x32(uint64_t key, uint64_t counter_hi, uint64_t counter_lo) {
    uint32_t ctr[4] = {static_cast<uint32_t>(counter_lo), static_cast<uint32_t>(counter_lo >> 32),
                       static_cast<uint32_t>(counter_hi), static_cast<uint32_t>(counter_hi >> 32)};
    uint32_t k[2] = {static_cast<uint32_t>(key), static_cast<uint32_t>(key >> 32)};
    constexpr uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        philox_round(ctr, k);
        k[0] += W0;
        k[1] += W1;
    }
    return PhiloxBlock{{ctr[0], ctr[1], ctr[2], ctr[3]}};
}

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

} // namespace detail

// Derive an independent stream key from a root seed and structural indices
// (pair setting, run, role within the run, ...).
inline uint64_t derive_stream(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t k = detail::splitmix64(seed ^ 0x6A09E667F3BCC909ull);
    k = detail::splitmix64(k ^ a);
    k = detail::splitmix64(k ^ b);
    k = detail::splitmix64(k ^ c);
    return k;
}

// One logical stream of standard normal variates, random-access by index.
// Box-Muller on two 53-bit uniforms from one Philox block; block i yields
// normals 2i and 2i+1.
class NormalStream {
public:
    explicit NormalStream(uint64_t key) : key_(key) {}

    double at(uint64_t index) const {
        const auto blk = detail::philox4x32(key_, 0, index >> 1);
        const uint64_t u0 = (static_cast<uint64_t>(blk.x[0]) << 32) | blk.x[1];
        const uint64_t u1 = (static_cast<uint64_t>(blk.x[2]) << 32) | blk.x[3];
        // (0,1) uniforms; never exactly 0 or 1
        const double a = (static_cast<double>(u0 >> 11) + 0.5) * 0x1.0p-53;
        const double b = (static_cast<double>(u1 >> 11) + 0.5) * 0x1.0p-53;
        const double radius = std::sqrt(-2.0 * std::log(a));
        const double angle = 6.283185307179586476925286766559 * b;
        return (index & 1) ? radius * std::sin(angle) : radius * std::cos(angle);
    }

    // Fill [first, first+out.size()) of the stream. Generates whole blocks, so
    // sequential fills and random access agree bit for bit.
    void fill(uint64_t first, std::span<double> out) const {
        uint64_t i = first;
        size_t written = 0;
        while (written < out.size()) {
            const auto blk = detail::philox4x32(key_, 0, i >> 1);
            const uint64_t u0 = (static_cast<uint64_t>(blk.x[0]) << 32) | blk.x[1];
            const uint64_t u1 = (static_cast<uint64_t>(blk.x[2]) << 32) | blk.x[3];
            const double a = (static_cast<double>(u0 >> 11) + 0.5) * 0x1.0p-53;
            const double b = (static_cast<double>(u1 >> 11) + 0.5) * 0x1.0p-53;
            const double radius = std::sqrt(-2.0 * std::log(a));
            const double angle = 6.283185307179586476925286766559 * b;
            const double z0 = radius * std::cos(angle);
            const double z1 = radius * std::sin(angle);
            if ((i & 1) == 0) {
                out[written++] = z0;
                if (written < out.size()) { out[written++] = z1; ++i; }
                ++i;
            } else {
                out[written++] = z1;
                ++i;
            }
        }
    }

    std::vector<double> take(uint64_t first, size_t count) const {
        std::vector<double> v(count);
        fill(first, std::span<double>(v));
        return v;
    }

    uint64_t key() const { return key_; }

private:
    uint64_t key_;
};

// Random-access uniform variate on (0, 1), one per counter value.
inline double uniform01(uint64_t key, uint64_t index) {
    const auto blk = detail::philox4x32(key, 1, index);
    const uint64_t u = (static_cast<uint64_t>(blk.x[0]) << 32) | blk.x[1];
    return (static_cast<double>(u >> 11) + 0.5) * 0x1.0p-53;
}

} // namespace g2hbt

#endif
