#ifndef G2HBT_GAUSSIAN_STATE_HPP
#define G2HBT_GAUSSIAN_STATE_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "g2hbt/errors.hpp"

// Single-mode Gaussian states at a sideband and the closed-form second-order
// coherence g2(tau) they produce behind a top-hat measurement filter.
//
// Conventions (fixed project-wide):
//   X+ = a + a^dag, X- = -i(a - a^dag); vacuum variance 1 in both quadratures.
//   alpha is real; <X+> = 2*alpha, <X-> = 0.
//   r > 0 squeezes the amplitude quadrature: V+ = exp(-2r).

namespace g2hbt {

// sinc(x) = sin(x)/x, sinc(0) = 1. Series for small |x| avoids the 0/0 and
// the cancellation in sin(x)/x when x underflows the division.
inline double sinc(double x) {
    const double ax = std::abs(x);
    if (ax < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0));
    }
    return std::sin(x) / x;
}

// Measurement filter: top-hat over [-omega, omega]. The temporal mode overlap
// (and the filtered-field commutator) at lag tau is sinc(omega*tau).
struct FilterSpec {
    enum class Shape { TopHat };

    double omega = 1.0; // one-sided band edge, rad/s
    Shape shape = Shape::TopHat;

    explicit FilterSpec(double band_edge = 1.0) : omega(band_edge) {
        if (!(omega > 0.0) || !std::isfinite(omega))
            throw std::invalid_argument("FilterSpec: omega must be positive and finite");
    }
};

inline double filter_commutator(const FilterSpec& filter, double tau) {
    return sinc(filter.omega * tau);
}

// Single-mode Gaussian state: quadrature variances (vacuum = 1) and a real
// displacement. Construction enforces V+, V- > 0 and the Heisenberg bound
// V+ * V- >= 1 (tolerance 1e-12).
struct GaussianState {
    double v_plus = 1.0;
    double v_minus = 1.0;
    double alpha = 0.0;

    GaussianState() = default;

    GaussianState(double vp, double vm, double a) : v_plus(vp), v_minus(vm), alpha(a) {
        if (!std::isfinite(vp) || !std::isfinite(vm) || !std::isfinite(a))
            throw std::invalid_argument("GaussianState: parameters must be finite");
        if (!(vp > 0.0) || !(vm > 0.0))
            throw std::invalid_argument("GaussianState: variances must be positive");
        if (vp * vm < 1.0 - 1e-12)
            throw std::invalid_argument(
                "GaussianState: V+ * V- = " + std::to_string(vp * vm) +
                " violates the Heisenberg bound");
    }

    double purity() const { return v_plus * v_minus; } // 1 iff pure

    // <a^dag a> = (V+ + V- - 2)/4 + alpha^2
    double mean_photons() const { return (v_plus + v_minus - 2.0) / 4.0 + alpha * alpha; }

    bool is_vacuum(double tol = 1e-12) const { return mean_photons() <= tol; }
};

inline GaussianState vacuum_state() { return GaussianState(1.0, 1.0, 0.0); }

// D(alpha) S(r) |0>: V+ = exp(-2r), V- = exp(2r), mean 2*alpha on X+.
inline GaussianState displaced_squeezed(double r, double alpha) {
    if (!std::isfinite(r) || !std::isfinite(alpha))
        throw std::invalid_argument("displaced_squeezed: r and alpha must be finite");
    return GaussianState(std::exp(-2.0 * r), std::exp(2.0 * r), alpha);
}

// White-noise displacement of the amplitude quadrature only (thermal bias).
inline GaussianState bias_thermal(const GaussianState& state, double noise_variance) {
    if (!(noise_variance >= 0.0))
        throw std::invalid_argument("bias_thermal: noise variance must be >= 0");
    return GaussianState(state.v_plus + noise_variance, state.v_minus, state.alpha);
}

// Beamsplitter loss with transmission eta: V -> eta*V + (1-eta), alpha -> sqrt(eta)*alpha.
// Vacuum is the fixed point; eta = 1 is the identity.
inline GaussianState attenuate(const GaussianState& state, double eta) {
    if (!(eta >= 0.0 && eta <= 1.0))
        throw std::invalid_argument("attenuate: eta must lie in [0, 1]");
    return GaussianState(eta * state.v_plus + (1.0 - eta),
                         eta * state.v_minus + (1.0 - eta),
                         std::sqrt(eta) * state.alpha);
}

// Options for the general-state evaluator. The denominator D = 2 - V+ - V- - 4a^2
// equals -4*nbar; |D| below the threshold triggers the warning hook.
struct EvalOptions {
    double ill_cond_threshold = 1e-6;
    std::function<void(const std::string&)> warn; // optional
};

// g2(0) of the pure state D(alpha)S(r)|0>:
//   1 + [sinh^2(r) cosh(2r) - 2 alpha^2 sinh(r) e^{-r}] / (alpha^2 + sinh^2 r)^2.
// The sinh*e^{-r} term is the analytically combined form of
// sinh^2(r)*(2a^2 - 2a^2 coth r); it stays finite through r -> 0.
inline double g2_zero_pure(double r, double alpha) {
    const double sh = std::sinh(r);
    const double denom = alpha * alpha + sh * sh;
    if (denom <= 0.0)
        throw UndefinedG2("g2 undefined for the vacuum (r = 0, alpha = 0)");
    const double num = sh * sh * std::cosh(2.0 * r) -
                       2.0 * alpha * alpha * sh * std::exp(-r);
    return 1.0 + num / (denom * denom);
}

// g2(tau) of the pure state, s = sinc(Omega*tau):
//   [ (a^2 - s sinh(2r)/2)^2 + 2(1+s) a^2 sinh^2 r + (1+s^2) sinh^4 r ] / (sinh^2 r + a^2)^2
inline double g2_tau_pure(double r, double alpha, const FilterSpec& filter, double tau) {
    const double sh = std::sinh(r);
    const double a2 = alpha * alpha;
    const double denom = sh * sh + a2;
    if (denom <= 0.0)
        throw UndefinedG2("g2 undefined for the vacuum (r = 0, alpha = 0)");
    const double s = filter_commutator(filter, tau);
    const double t0 = a2 - 0.5 * s * std::sinh(2.0 * r);
    const double num = t0 * t0 + 2.0 * (1.0 + s) * a2 * sh * sh +
                       (1.0 + s * s) * sh * sh * sh * sh;
    return num / (denom * denom);
}

// g2(tau) for an arbitrary single-mode Gaussian state, s = sinc(Omega*tau):
//   1 + [ 16 s (V+ - 1) a^2 + 2 s^2 (2 + (V- - 2)V- + (V+ - 2)V+) ] / D^2,
//   D = 2 - V+ - V- - 4 a^2.
// Invariant under attenuate(): every numerator term and D^2 scale as eta^2.
inline double g2_tau_gaussian(const GaussianState& state, const FilterSpec& filter,
                              double tau, const EvalOptions& opts = {}) {
    const double vp = state.v_plus, vm = state.v_minus, a2 = state.alpha * state.alpha;
    const double D = 2.0 - vp - vm - 4.0 * a2;
    if (D == 0.0 || state.mean_photons() <= 0.0)
        throw UndefinedG2("g2 undefined for vacuum input (zero mean photon number)");
    if (std::abs(D) < opts.ill_cond_threshold && opts.warn)
        opts.warn("ill-conditioned g2 evaluation: |D| = " + std::to_string(std::abs(D)) +
                  " below threshold " + std::to_string(opts.ill_cond_threshold));
    const double s = filter_commutator(filter, tau);
    const double num = 16.0 * s * (vp - 1.0) * a2 +
                       2.0 * s * s * (2.0 + (vm - 2.0) * vm + (vp - 2.0) * vp);
    return 1.0 + num / (D * D);
}

inline double g2_zero_gaussian(const GaussianState& state, const EvalOptions& opts = {}) {
    return g2_tau_gaussian(state, FilterSpec(1.0), 0.0, opts);
}

// argmin over alpha >= 0 of g2(0) for fixed variances, by golden-section search
// to |delta alpha| <= 1e-6. Requires amplitude squeezing (V+ < 1); otherwise
// g2(0) is monotone in alpha and there is no interior minimum.
inline double optimal_displacement(double v_plus, double v_minus) {
    if (!(v_plus < 1.0))
        throw NoMinimum("optimal_displacement: needs V+ < 1 (g2 monotone in alpha otherwise)");
    if (v_plus * v_minus < 1.0 - 1e-12)
        throw std::invalid_argument("optimal_displacement: V+ * V- must be >= 1");

    auto g2_at = [&](double a) {
        return g2_zero_gaussian(GaussianState(v_plus, v_minus, a));
    };

    // Coarse geometric scan to bracket the minimum, then golden section.
    double best_a = 1e-3, best_g = g2_at(best_a);
    for (double a = 2e-3; a <= 8.0; a *= 1.25) {
        const double g = g2_at(a);
        if (g < best_g) { best_g = g; best_a = a; }
    }
    double lo = best_a / 1.6, hi = best_a * 1.6;

    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    double gc = g2_at(c), gd = g2_at(d);
    while (hi - lo > 1e-7) {
        if (gc < gd) {
            hi = d; d = c; gd = gc;
            c = hi - gr * (hi - lo); gc = g2_at(c);
        } else {
            lo = c; c = d; gc = gd;
            d = lo + gr * (hi - lo); gd = g2_at(d);
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace g2hbt

#endif
