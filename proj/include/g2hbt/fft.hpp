#ifndef G2HBT_FFT_HPP
#define G2HBT_FFT_HPP

#include <complex>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace g2hbt::detail {

inline bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline size_t next_pow2(size_t n) {
    size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Twiddle factors for size n, computed directly per index (no recurrence
// drift). Cached per thread; the handful of sizes in play makes this cheap.
inline const std::vector<std::complex<double>>& twiddles(size_t n) {
    thread_local std::unordered_map<size_t, std::shared_ptr<std::vector<std::complex<double>>>> cache;
    auto& slot = cache[n];
    if (!slot) {
        auto tw = std::make_shared<std::vector<std::complex<double>>>(n / 2);
        const double step = -6.283185307179586476925286766559 / double(n);
        for (size_t k = 0; k < n / 2; ++k)
            (*tw)[k] = std::polar(1.0, step * double(k));
        slot = std::move(tw);
    }
    return *slot;
}

// In-place iterative radix-2 FFT. inverse = true applies the unscaled inverse
// transform; caller divides by n.
inline void fft(std::vector<std::complex<double>>& a, bool inverse) {
    const size_t n = a.size();
    if (!is_pow2(n)) throw std::invalid_argument("fft: length must be a power of two");
    if (n < 2) return;

    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    const auto& tw = twiddles(n);
    for (size_t len = 2; len <= n; len <<= 1) {
        const size_t stride = n / len;
        for (size_t i = 0; i < n; i += len) {
            for (size_t k = 0; k < len / 2; ++k) {
                std::complex<double> w = tw[k * stride];
                if (inverse) w = std::conj(w);
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
            }
        }
    }
}

} // namespace g2hbt::detail

#endif
