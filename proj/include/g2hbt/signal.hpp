#ifndef G2HBT_SIGNAL_HPP
#define G2HBT_SIGNAL_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "g2hbt/errors.hpp"
#include "g2hbt/fft.hpp"
#include "g2hbt/gaussian_state.hpp"
#include "g2hbt/rng.hpp"

// Seeded synthesis of homodyne detector records for the split-and-measure
// interferometer: white Gaussian quadrature records at an oversampled rate,
// brick-wall top-hat filtering, shot-noise recalibration, decimation.
//
// Gaussian states have positive Wigner functions, so sampling the quadrature
// records as classical Gaussian processes reproduces the homodyne outcome
// statistics exactly.

namespace g2hbt {

struct SeedLineage {
    uint64_t root_seed = 0;
    uint32_t run_index = 0;
    std::string stage; // "raw", "filtered", "acquired", ...
};

// Uniformly sampled real-valued detector record. band_omega > 0 marks a
// record known to be band-limited to [-band_omega, band_omega] rad/s.
struct TimeSeries {
    std::vector<double> samples;
    double sample_rate = 1.0; // samples/s
    char quadrature = '+';
    char arm = 'b';
    double band_omega = 0.0; // 0 = not band-limited (white to Nyquist)
    SeedLineage lineage;

    void validate() const {
        if (samples.empty()) throw std::invalid_argument("TimeSeries: empty");
        if (!(sample_rate > 0.0)) throw std::invalid_argument("TimeSeries: sample_rate must be > 0");
        for (double x : samples)
            if (!std::isfinite(x)) throw std::invalid_argument("TimeSeries: non-finite sample");
    }

    double mean() const {
        double s = 0.0;
        for (double x : samples) s += x;
        return s / double(samples.size());
    }

    double raw_second_moment() const {
        double s = 0.0;
        for (double x : samples) s += x * x;
        return s / double(samples.size());
    }

    double variance() const {
        const double m = mean();
        double s = 0.0;
        for (double x : samples) s += (x - m) * (x - m);
        return s / double(samples.size());
    }
};

// One acquisition configuration. n_samples is the per-run post-DSP record
// length. oversample M: synthesis runs at M * base_rate, the top-hat band is
// base_rate/2 Hz. decimate_factor d in {1..M} (power of two; 0 = use M) sets
// the retained rate M*base_rate/d: d = M gives the flat-to-Nyquist record
// whose integer lags sit at Omega*tau = k*pi; d = 1 keeps the oversampled
// grid with lag spacing pi/M for tau-resolved curves.
struct HbtRunConfig {
    GaussianState state;
    char quad_b = '+';
    char quad_c = '+';
    size_t n_samples = 100000;
    size_t n_runs = 10;
    uint32_t oversample = 2;
    uint32_t decimate_factor = 0;
    uint64_t seed = 42;
    double eta = 1.0;
    double base_rate = 120000.0;
    double dark_variance = 0.0; // optional per-detector additive white noise

    uint32_t effective_decimation() const { return decimate_factor == 0 ? oversample : decimate_factor; }

    void validate() const {
        if (quad_b != '+' && quad_b != '-') throw std::invalid_argument("HbtRunConfig: quad_b must be '+' or '-'");
        if (quad_c != '+' && quad_c != '-') throw std::invalid_argument("HbtRunConfig: quad_c must be '+' or '-'");
        if (n_samples < 10000) throw std::invalid_argument("HbtRunConfig: n_samples must be >= 10^4");
        if (n_runs < 1) throw std::invalid_argument("HbtRunConfig: n_runs must be >= 1");
        if (oversample < 2 || !detail::is_pow2(oversample) || oversample > 64)
            throw std::invalid_argument("HbtRunConfig: oversample must be a power of two in [2, 64]");
        const uint32_t d = effective_decimation();
        if (d < 1 || d > oversample || !detail::is_pow2(d))
            throw std::invalid_argument("HbtRunConfig: decimate_factor must be a power of two in [1, oversample]");
        if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("HbtRunConfig: eta must lie in [0, 1]");
        if (!(base_rate > 0.0)) throw std::invalid_argument("HbtRunConfig: base_rate must be > 0");
        if (!(dark_variance >= 0.0)) throw std::invalid_argument("HbtRunConfig: dark_variance must be >= 0");
    }

    double synth_rate() const { return base_rate * double(oversample); }
    double post_rate() const { return synth_rate() / double(effective_decimation()); }
    // One-sided band edge of the measurement filter, rad/s.
    double band_omega() const { return 3.14159265358979323846 * base_rate; }
    FilterSpec filter() const { return FilterSpec(band_omega()); }
};

// One acquisition: paired post-DSP (H1, H2) records per run, for a single
// quadrature setting (quad_b on arm b, quad_c on arm c).
struct QuadPairDataset {
    HbtRunConfig config;
    std::vector<std::pair<TimeSeries, TimeSeries>> runs;

    void validate() const {
        if (runs.empty()) throw std::invalid_argument("QuadPairDataset: no runs");
        for (const auto& [h1, h2] : runs)
            if (h1.samples.size() != h2.samples.size())
                throw std::invalid_argument("QuadPairDataset: H1/H2 length mismatch");
    }
};

namespace detail {

// role tags for stream derivation
inline constexpr uint64_t kRoleSignal = 1, kRoleVacuum = 2, kRoleArmB = 3, kRoleArmC = 4,
                          kRoleDarkB = 5, kRoleDarkC = 6;

inline uint64_t pair_code(char qb, char qc) {
    return (qb == '+' ? 0ull : 1ull) * 2ull + (qc == '+' ? 0ull : 1ull) + 1ull;
}

} // namespace detail

// Raw (pre-DSP) record pair at the synthesis rate. With equal quadrature
// labels the two arms share one signal and one vacuum realization:
//   H1 = (Xa + Xv)/sqrt(2), H2 = (Xa - Xv)/sqrt(2),
// giving cross-arm covariance (V-1)/2. With different labels the arm records
// are independent Gaussians of variance (V^i+1)/2 and (V^j+1)/2. Streams are
// keyed by (seed, pair, run, role); re-synthesis is bit-identical.
inline std::pair<TimeSeries, TimeSeries> synth_raw_pair(const HbtRunConfig& config,
                                                        uint32_t run_index,
                                                        size_t length_override = 0) {
    config.validate();
    const GaussianState seen = attenuate(config.state, config.eta);
    const size_t n = length_override ? length_override
                                     : size_t(config.n_samples) * config.effective_decimation();
    const uint64_t pair = detail::pair_code(config.quad_b, config.quad_c);
    const double rate = config.synth_rate();

    auto make_series = [&](char arm, char quad) {
        TimeSeries ts;
        ts.sample_rate = rate;
        ts.quadrature = quad;
        ts.arm = arm;
        ts.lineage = {config.seed, run_index, "raw"};
        ts.samples.resize(n);
        return ts;
    };

    TimeSeries h1 = make_series('b', config.quad_b);
    TimeSeries h2 = make_series('c', config.quad_c);

    const double inv_sqrt2 = 0.70710678118654752440;
    auto quad_var = [&](char q) { return q == '+' ? seen.v_plus : seen.v_minus; };
    auto quad_mean = [&](char q) { return q == '+' ? 2.0 * seen.alpha : 0.0; };

    if (config.quad_b == config.quad_c) {
        const double sd = std::sqrt(quad_var(config.quad_b));
        const double mean = quad_mean(config.quad_b);
        NormalStream sig(derive_stream(config.seed, pair, run_index, detail::kRoleSignal));
        NormalStream vac(derive_stream(config.seed, pair, run_index, detail::kRoleVacuum));
        std::vector<double> xa = sig.take(0, n), xv = vac.take(0, n);
        for (size_t t = 0; t < n; ++t) {
            const double a = mean + sd * xa[t];
            h1.samples[t] = (a + xv[t]) * inv_sqrt2;
            h2.samples[t] = (a - xv[t]) * inv_sqrt2;
        }
    } else {
        // No cross-quadrature correlations: each arm gets its own signal and
        // vacuum realization.
        NormalStream sb(derive_stream(config.seed, pair, run_index, detail::kRoleArmB));
        NormalStream sc(derive_stream(config.seed, pair, run_index, detail::kRoleArmC));
        const double sd_b = std::sqrt(0.5 * (quad_var(config.quad_b) + 1.0));
        const double sd_c = std::sqrt(0.5 * (quad_var(config.quad_c) + 1.0));
        const double mean_b = quad_mean(config.quad_b) * inv_sqrt2;
        const double mean_c = quad_mean(config.quad_c) * inv_sqrt2;
        std::vector<double> zb = sb.take(0, n), zc = sc.take(0, n);
        for (size_t t = 0; t < n; ++t) {
            h1.samples[t] = mean_b + sd_b * zb[t];
            h2.samples[t] = mean_c + sd_c * zc[t];
        }
    }

    if (config.dark_variance > 0.0) {
        const double sd = std::sqrt(config.dark_variance);
        NormalStream db(derive_stream(config.seed, pair, run_index, detail::kRoleDarkB));
        NormalStream dc(derive_stream(config.seed, pair, run_index, detail::kRoleDarkC));
        std::vector<double> nb = db.take(0, n), nc = dc.take(0, n);
        for (size_t t = 0; t < n; ++t) {
            h1.samples[t] += sd * nb[t];
            h2.samples[t] += sd * nc[t];
        }
    }
    return {std::move(h1), std::move(h2)};
}

// Brick-wall low-pass: transform, zero every bin above the band edge, invert.
// Output variance shrinks by the kept-bin fraction; the autocorrelation of
// filtered white noise is sinc(Omega tau) up to spectral leakage O(1/n).
inline TimeSeries tophat_filter(const TimeSeries& series, const FilterSpec& band) {
    const size_t n = series.samples.size();
    if (!detail::is_pow2(n))
        throw std::invalid_argument("tophat_filter: length must be a power of two");
    const double nyquist = 3.14159265358979323846 * series.sample_rate;
    if (!(band.omega < nyquist))
        throw std::invalid_argument("tophat_filter: band edge must be below Nyquist");

    // bins k and n-k carry |omega_k| = 2*pi*k*rate/n
    const size_t keep = size_t(std::floor(band.omega * double(n) /
                                          (2.0 * 3.14159265358979323846 * series.sample_rate)));
    std::vector<std::complex<double>> spec(series.samples.begin(), series.samples.end());
    detail::fft(spec, false);
    for (size_t k = keep + 1; k <= n - keep - 1; ++k) spec[k] = 0.0;
    detail::fft(spec, true);

    TimeSeries out = series;
    out.band_omega = band.omega;
    out.lineage.stage = "filtered";
    const double inv_n = 1.0 / double(n);
    for (size_t t = 0; t < n; ++t) out.samples[t] = spec[t].real() * inv_n;
    return out;
}

// Filter H1 and H2 in one pass by packing them into a single complex FFT.
// Returns the kept-bin count so the caller can recalibrate.
inline size_t tophat_filter_pair(TimeSeries& h1, TimeSeries& h2, const FilterSpec& band) {
    const size_t n = h1.samples.size();
    if (h2.samples.size() != n) throw std::invalid_argument("tophat_filter_pair: length mismatch");
    if (!detail::is_pow2(n))
        throw std::invalid_argument("tophat_filter_pair: length must be a power of two");
    const double nyquist = 3.14159265358979323846 * h1.sample_rate;
    if (!(band.omega < nyquist))
        throw std::invalid_argument("tophat_filter_pair: band edge must be below Nyquist");

    const size_t keep = size_t(std::floor(band.omega * double(n) /
                                          (2.0 * 3.14159265358979323846 * h1.sample_rate)));
    std::vector<std::complex<double>> z(n);
    for (size_t t = 0; t < n; ++t) z[t] = {h1.samples[t], h2.samples[t]};
    detail::fft(z, false);
    for (size_t k = keep + 1; k <= n - keep - 1; ++k) z[k] = 0.0;
    detail::fft(z, true);
    const double inv_n = 1.0 / double(n);
    for (size_t t = 0; t < n; ++t) {
        h1.samples[t] = z[t].real() * inv_n;
        h2.samples[t] = z[t].imag() * inv_n;
    }
    h1.band_omega = h2.band_omega = band.omega;
    h1.lineage.stage = h2.lineage.stage = "filtered";
    return 2 * keep + 1;
}

// Keep every factor-th sample. Refuses to alias: the input must be known
// band-limited below the new Nyquist (factor 1 is always the identity).
inline TimeSeries decimate(const TimeSeries& series, uint32_t factor) {
    if (factor < 1) throw std::invalid_argument("decimate: factor must be >= 1");
    if (factor == 1) return series;
    const double new_nyquist = 3.14159265358979323846 * series.sample_rate / double(factor);
    if (series.band_omega <= 0.0)
        throw AliasingRejected("decimate: input not band-limited (no top-hat applied)");
    if (series.band_omega > new_nyquist * (1.0 + 1e-12))
        throw AliasingRejected("decimate: band edge exceeds post-decimation Nyquist");

    TimeSeries out;
    out.sample_rate = series.sample_rate / double(factor);
    out.quadrature = series.quadrature;
    out.arm = series.arm;
    out.band_omega = series.band_omega;
    out.lineage = series.lineage;
    out.samples.reserve(series.samples.size() / factor);
    for (size_t t = 0; t < series.samples.size(); t += factor)
        out.samples.push_back(series.samples[t]);
    return out;
}

// Full per-run DSP chain. The stochastic part is synthesized mean-free,
// filtered, rescaled by sqrt(total/kept) to restore vacuum (shot-noise)
// units, decimated, truncated to n_samples; the deterministic carrier mean
// is reapplied afterwards so calibration does not touch it.
inline std::pair<TimeSeries, TimeSeries> acquire_run(const HbtRunConfig& config,
                                                     uint32_t run_index) {
    config.validate();
    const GaussianState seen = attenuate(config.state, config.eta);
    const uint32_t d = config.effective_decimation();
    const size_t raw_len = detail::next_pow2(config.n_samples * size_t(d));

    auto [h1, h2] = synth_raw_pair(config, run_index, raw_len);

    const double inv_sqrt2 = 0.70710678118654752440;
    const double mean_b = (config.quad_b == '+') ? 2.0 * seen.alpha * inv_sqrt2 : 0.0;
    const double mean_c = (config.quad_c == '+') ? 2.0 * seen.alpha * inv_sqrt2 : 0.0;
    for (auto& x : h1.samples) x -= mean_b;
    for (auto& x : h2.samples) x -= mean_c;

    const size_t kept = tophat_filter_pair(h1, h2, config.filter());
    const double scale = std::sqrt(double(raw_len) / double(kept));
    for (auto& x : h1.samples) x *= scale;
    for (auto& x : h2.samples) x *= scale;

    TimeSeries d1 = decimate(h1, d), d2 = decimate(h2, d);
    d1.samples.resize(config.n_samples);
    d2.samples.resize(config.n_samples);
    for (auto& x : d1.samples) x += mean_b;
    for (auto& x : d2.samples) x += mean_c;
    d1.lineage.stage = d2.lineage.stage = "acquired";
    return {std::move(d1), std::move(d2)};
}

inline QuadPairDataset acquire(const HbtRunConfig& config) {
    config.validate();
    QuadPairDataset ds;
    ds.config = config;
    ds.runs.reserve(config.n_runs);
    for (uint32_t r = 0; r < config.n_runs; ++r) ds.runs.push_back(acquire_run(config, r));
    ds.validate();
    return ds;
}

} // namespace g2hbt

#endif
