#ifndef G2HBT_ESTIMATOR_HPP
#define G2HBT_ESTIMATOR_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "g2hbt/errors.hpp"
#include "g2hbt/fock.hpp"
#include "g2hbt/gaussian_state.hpp"
#include "g2hbt/rng.hpp"
#include "g2hbt/signal.hpp"

// Reconstruction of g2(tau) from the four quadrature-pair acquisitions via
// the quadrature-moment formula
//
//   g2(tau) = [ sum_ij m4[i][j](tau) - 2 sum_{k,i} m2[k][i] + 4 ]
//             / [ (m2[b][+] + m2[b][-] - 2) (m2[c][+] + m2[c][-] - 2) ]
//
// with raw (non-centered) second moments; the displacement enters through the
// record means. The -2/+4 constants are vacuum-commutator corrections and are
// never fitted.

namespace g2hbt {

// Per-run raw moments for one pair setting.
struct RunMoments {
    std::vector<double> m4; // per lag: <h1(t+k)^2 h2(t)^2>
    double m2_b = 0.0;      // <h1^2>
    double m2_c = 0.0;      // <h2^2>
    double mean_b = 0.0;
    double mean_c = 0.0;
    size_t n = 0;
};

// Lagged moment estimates for one pair setting across runs.
struct MomentEstimates {
    HbtRunConfig config;
    std::vector<size_t> lags;
    std::vector<RunMoments> runs;
};

struct G2Point {
    double tau_omega = 0.0;
    double g2 = 0.0;
    double ci68_low = 0.0;
    double ci68_high = 0.0;
};

struct G2Curve {
    std::vector<G2Point> points;
    GaussianState state;      // as configured (pre-attenuation)
    double eta = 1.0;
    uint64_t seed = 0;
    size_t n_samples = 0;     // per run
    size_t n_runs = 0;
    uint32_t oversample = 2;
    uint32_t decimation = 2;
    std::vector<std::string> warnings;
};

struct EstimatorOptions {
    double denom_threshold = 1e-3;     // DenominatorVanishing guard on (sum m2 - 2)
    double nbar_warn_threshold = 0.02; // near-vacuum ill-conditioning warning
    bool bootstrap_ci = false;         // non-default alternative to between-run SE
    uint32_t bootstrap_reps = 200;
    std::function<void(const std::string&)> warn;
};

inline RunMoments compute_run_moments(const TimeSeries& h1, const TimeSeries& h2,
                                      const std::vector<size_t>& lags) {
    const size_t n = h1.samples.size();
    if (h2.samples.size() != n) throw std::invalid_argument("compute_run_moments: length mismatch");
    RunMoments rm;
    rm.n = n;
    rm.m4.reserve(lags.size());
    for (size_t k : lags) {
        if (k >= n / 10)
            throw LagOutOfRange("lag " + std::to_string(k) + " exceeds record length / 10");
        double acc = 0.0;
        const double* a = h1.samples.data();
        const double* b = h2.samples.data();
        for (size_t t = 0; t + k < n; ++t) {
            const double x = a[t + k], y = b[t];
            acc += (x * x) * (y * y);
        }
        rm.m4.push_back(acc / double(n - k));
    }
    double s2b = 0.0, s2c = 0.0, sb = 0.0, sc = 0.0;
    for (size_t t = 0; t < n; ++t) {
        s2b += h1.samples[t] * h1.samples[t];
        s2c += h2.samples[t] * h2.samples[t];
        sb += h1.samples[t];
        sc += h2.samples[t];
    }
    rm.m2_b = s2b / double(n);
    rm.m2_c = s2c / double(n);
    rm.mean_b = sb / double(n);
    rm.mean_c = sc / double(n);
    return rm;
}

inline MomentEstimates lagged_moments(const QuadPairDataset& dataset,
                                      const std::vector<size_t>& lags) {
    dataset.validate();
    MomentEstimates est;
    est.config = dataset.config;
    est.lags = lags;
    est.runs.reserve(dataset.runs.size());
    for (const auto& [h1, h2] : dataset.runs)
        est.runs.push_back(compute_run_moments(h1, h2, lags));
    return est;
}

// The four pair settings, indexed [i][j] with 0 = '+', 1 = '-'; i is the arm-b
// quadrature, j the arm-c quadrature.
struct FourPairMoments {
    std::array<std::array<MomentEstimates, 2>, 2> pair;

    const MomentEstimates& at(char i, char j) const {
        return pair[i == '+' ? 0 : 1][j == '+' ? 0 : 1];
    }
    MomentEstimates& at(char i, char j) {
        return pair[i == '+' ? 0 : 1][j == '+' ? 0 : 1];
    }
};

namespace detail {

struct PooledMoments {
    std::vector<std::array<std::array<double, 2>, 2>> m4; // [lag][i][j]
    double m2_b[2] = {0, 0}; // [quad]
    double m2_c[2] = {0, 0};
};

// Average the run moments of one "run slice" selection (identity selection =
// all runs) into Eq-ready pooled values.
template <typename RunPick>
inline PooledMoments pool_moments(const FourPairMoments& four, size_t n_lags, size_t n_runs,
                                  RunPick pick) {
    PooledMoments p;
    p.m4.assign(n_lags, {{{0.0, 0.0}, {0.0, 0.0}}});
    const char quads[2] = {'+', '-'};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const auto& est = four.at(quads[i], quads[j]);
            double w = 0.0;
            for (size_t r = 0; r < n_runs; ++r) {
                const size_t rr = pick(r);
                for (size_t k = 0; k < n_lags; ++k) p.m4[k][i][j] += est.runs[rr].m4[k];
                p.m2_b[i] += est.runs[rr].m2_b;
                p.m2_c[j] += est.runs[rr].m2_c;
                w += 1.0;
            }
            for (size_t k = 0; k < n_lags; ++k) p.m4[k][i][j] /= w;
        }
    // each arm/quad m2 accumulated over exactly two datasets x n_runs
    for (int q = 0; q < 2; ++q) {
        p.m2_b[q] /= double(2 * n_runs);
        p.m2_c[q] /= double(2 * n_runs);
    }
    return p;
}

inline double g2_of_pooled(const PooledMoments& p, size_t lag_idx, double denom_threshold) {
    const double db = p.m2_b[0] + p.m2_b[1] - 2.0;
    const double dc = p.m2_c[0] + p.m2_c[1] - 2.0;
    if (db <= denom_threshold || dc <= denom_threshold)
        throw DenominatorVanishing(
            "arm second-moment sum minus 2 is " + std::to_string(std::min(db, dc)) +
            " (<= " + std::to_string(denom_threshold) + "): near-vacuum input, g2 undefined");
    double num = 4.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) num += p.m4[lag_idx][i][j];
    num -= 2.0 * (p.m2_b[0] + p.m2_b[1] + p.m2_c[0] + p.m2_c[1]);
    return num / (db * dc);
}

} // namespace detail

// Assemble the g2(tau) curve. Point estimates use run-pooled moments; the 68%
// interval is +-1 between-run standard error of the per-run g2 values
// (bootstrap over runs as the non-default alternative).
inline G2Curve g2_from_moments(const FourPairMoments& four, const EstimatorOptions& opts = {}) {
    const auto& ref = four.at('+', '+');
    const size_t n_lags = ref.lags.size();
    const size_t n_runs = ref.runs.size();
    const char quads[2] = {'+', '-'};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const auto& est = four.at(quads[i], quads[j]);
            if (est.lags != ref.lags || est.runs.size() != n_runs)
                throw std::invalid_argument("g2_from_moments: pair settings disagree on lags/runs");
        }

    const auto& cfg = ref.config;
    {
        const GaussianState seen = attenuate(cfg.state, cfg.eta);
        if (seen.mean_photons() < opts.nbar_warn_threshold && opts.warn)
            opts.warn("near-vacuum input (mean photon number " +
                      std::to_string(seen.mean_photons()) +
                      "): g2 estimate is ill-conditioned, expect a wide confidence interval");
    }

    const auto pooled =
        detail::pool_moments(four, n_lags, n_runs, [](size_t r) { return r; });

    // per-run point estimates for the error analysis; a run whose own
    // denominator collapses is excluded from the spread, loudly
    std::vector<std::vector<double>> per_run(n_lags);
    size_t dropped_runs = 0;
    for (size_t r = 0; r < n_runs && n_runs > 1; ++r) {
        const auto single = detail::pool_moments(four, n_lags, 1, [r](size_t) { return r; });
        try {
            std::vector<double> vals(n_lags);
            for (size_t k = 0; k < n_lags; ++k)
                vals[k] = detail::g2_of_pooled(single, k, opts.denom_threshold);
            for (size_t k = 0; k < n_lags; ++k) per_run[k].push_back(vals[k]);
        } catch (const DenominatorVanishing&) {
            ++dropped_runs;
        }
    }
    if (n_runs > 1 && dropped_runs > 0) {
        if (opts.warn)
            opts.warn(std::to_string(dropped_runs) + " of " + std::to_string(n_runs) +
                      " runs had near-vanishing denominators; the interval from the "
                      "remaining runs understates the uncertainty");
        if (per_run[0].size() < 2)
            throw DenominatorVanishing(
                "fewer than two runs with usable denominators: no interval can be quoted");
    }

    auto ci_half_width = [&](size_t k) -> double {
        if (n_runs < 2) return 0.0;
        if (!opts.bootstrap_ci) {
            const auto& vals = per_run[k];
            if (vals.size() < 2) return 0.0;
            double m = 0.0;
            for (double g : vals) m += g;
            m /= double(vals.size());
            double ss = 0.0;
            for (double g : vals) ss += (g - m) * (g - m);
            return std::sqrt(ss / double(vals.size() - 1) / double(vals.size()));
        }
        // bootstrap over runs
        std::vector<double> reps;
        reps.reserve(opts.bootstrap_reps);
        for (uint32_t b = 0; b < opts.bootstrap_reps; ++b) {
            std::vector<size_t> idx(n_runs);
            for (size_t r = 0; r < n_runs; ++r) {
                const auto blk = detail::philox4x32(derive_stream(cfg.seed, 0xB007u, b), 0, r);
                idx[r] = blk.x[0] % n_runs;
            }
            const auto bp = detail::pool_moments(four, n_lags, n_runs,
                                                 [&](size_t r) { return idx[r]; });
            try {
                reps.push_back(detail::g2_of_pooled(bp, k, opts.denom_threshold));
            } catch (const DenominatorVanishing&) {
            }
        }
        if (reps.size() < 10)
            throw DenominatorVanishing("bootstrap resamples collapse: denominator too close to zero");
        double m = 0.0;
        for (double g : reps) m += g;
        m /= double(reps.size());
        double ss = 0.0;
        for (double g : reps) ss += (g - m) * (g - m);
        return std::sqrt(ss / double(reps.size() - 1));
    };

    G2Curve curve;
    curve.state = cfg.state;
    curve.eta = cfg.eta;
    curve.seed = cfg.seed;
    curve.n_samples = cfg.n_samples;
    curve.n_runs = n_runs;
    curve.oversample = cfg.oversample;
    curve.decimation = cfg.effective_decimation();
    for (size_t k = 0; k < n_lags; ++k) {
        G2Point pt;
        pt.tau_omega = cfg.band_omega() * double(ref.lags[k]) / cfg.post_rate();
        pt.g2 = detail::g2_of_pooled(pooled, k, opts.denom_threshold);
        const double hw = ci_half_width(k);
        pt.ci68_low = pt.g2 - hw;
        pt.ci68_high = pt.g2 + hw;
        curve.points.push_back(pt);
    }
    return curve;
}

// Acquire all four pair settings for one configuration and estimate. Runs are
// processed one at a time; nothing larger than a single run is retained.
inline G2Curve measure_g2(const HbtRunConfig& base, const std::vector<size_t>& lags,
                          const EstimatorOptions& opts = {}) {
    base.validate();
    FourPairMoments four;
    const char quads[2] = {'+', '-'};
    for (char i : quads)
        for (char j : quads) {
            HbtRunConfig cfg = base;
            cfg.quad_b = i;
            cfg.quad_c = j;
            MomentEstimates est;
            est.config = cfg;
            est.lags = lags;
            est.runs.reserve(cfg.n_runs);
            for (uint32_t r = 0; r < cfg.n_runs; ++r) {
                auto [h1, h2] = acquire_run(cfg, r);
                est.runs.push_back(compute_run_moments(h1, h2, lags));
            }
            four.at(i, j) = std::move(est);
        }
    return g2_from_moments(four, opts);
}

// Recovered input-state parameters (as seen by the interferometer, i.e. after
// the configured attenuation):
//   alpha = mean(X+ records) * sqrt(2)/2, pooled over arms, sign from arm b;
//   V^i   = 2 * centered variance of the quadrature-i records - 1, pooled.
// Arms recovering incompatible values (> 5 SE apart) raise CalibrationMismatch.
inline GaussianState recover_input_state(const FourPairMoments& four) {
    const char quads[2] = {'+', '-'};

    struct Acc {
        std::vector<double> vals;
        void add(double v) { vals.push_back(v); }
        double mean() const {
            double s = 0.0;
            for (double v : vals) s += v;
            return s / double(vals.size());
        }
        double se() const {
            if (vals.size() < 2) return 0.0;
            const double m = mean();
            double ss = 0.0;
            for (double v : vals) ss += (v - m) * (v - m);
            return std::sqrt(ss / double(vals.size() - 1) / double(vals.size()));
        }
    };

    Acc var_b[2], var_c[2], mean_b, mean_c;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const auto& est = four.at(quads[i], quads[j]);
            for (const auto& run : est.runs) {
                var_b[i].add(run.m2_b - run.mean_b * run.mean_b);
                var_c[j].add(run.m2_c - run.mean_c * run.mean_c);
                if (quads[i] == '+') mean_b.add(run.mean_b);
                if (quads[j] == '+') mean_c.add(run.mean_c);
            }
        }

    auto check = [](const Acc& a, const Acc& b, const char* what) {
        const double se = std::sqrt(a.se() * a.se() + b.se() * b.se());
        if (se > 0.0 && std::abs(a.mean() - b.mean()) > 5.0 * se)
            throw CalibrationMismatch(std::string("arms b and c disagree on ") + what +
                                      " by more than 5 SE");
    };
    check(var_b[0], var_c[0], "V+");
    check(var_b[1], var_c[1], "V-");
    check(mean_b, mean_c, "displacement");

    const double vp = 2.0 * 0.5 * (var_b[0].mean() + var_c[0].mean()) - 1.0;
    const double vm = 2.0 * 0.5 * (var_b[1].mean() + var_c[1].mean()) - 1.0;
    const double mu = 0.5 * (mean_b.mean() + mean_c.mean());
    double alpha = mu * std::sqrt(2.0) / 2.0;
    if (mean_b.mean() < 0.0) alpha = -std::abs(alpha);

    // sampled variances can dip below the Heisenberg floor; nudge inside
    const double vp_c = std::max(vp, 1e-6);
    const double vm_c = (vp_c * vm < 1.0) ? 1.0 / vp_c : vm;
    return GaussianState(vp_c, vm_c, alpha);
}

struct LossPoint {
    double eta = 1.0;
    G2Curve curve; // single tau = 0 point
};

// Repeat the full acquisition and estimate at each transmission. Each eta gets
// an independently derived seed. The g2 point estimates should agree (loss
// invariance) while the intervals widen as eta falls.
inline std::vector<LossPoint> loss_sweep(const GaussianState& state,
                                         const std::vector<double>& etas,
                                         HbtRunConfig base,
                                         const EstimatorOptions& opts = {}) {
    std::vector<LossPoint> out;
    out.reserve(etas.size());
    for (size_t e = 0; e < etas.size(); ++e) {
        if (!(etas[e] > 0.0 && etas[e] <= 1.0))
            throw std::invalid_argument("loss_sweep: eta must lie in (0, 1]");
        HbtRunConfig cfg = base;
        cfg.state = state;
        cfg.eta = etas[e];
        cfg.seed = derive_stream(base.seed, 0x10550000ull + e);
        LossPoint pt;
        pt.eta = etas[e];
        pt.curve = measure_g2(cfg, {0}, opts);
        out.push_back(std::move(pt));
    }
    return out;
}

} // namespace g2hbt

#endif
