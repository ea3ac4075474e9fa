#ifndef G2HBT_FOCK_HPP
#define G2HBT_FOCK_HPP

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "g2hbt/errors.hpp"
#include "g2hbt/gaussian_state.hpp"

// Brute-force verification engines, kept independent of the closed forms in
// gaussian_state.hpp: a truncated photon-number-basis evaluation of g2 for
// pure states, and a Gaussian fourth-moment (Isserlis) evaluation of the
// beamsplitter form for arbitrary Gaussian states.

namespace g2hbt {

// State vector in the number basis, c_0..c_N. Truncation is adequate when the
// top coefficient carries < 1e-12 of the (normalized) weight.
struct FockVector {
    std::vector<std::complex<double>> amplitudes;

    size_t truncation() const { return amplitudes.empty() ? 0 : amplitudes.size() - 1; }

    double norm_sq() const {
        double s = 0.0;
        for (const auto& c : amplitudes) s += std::norm(c);
        return s;
    }

    double mean_photons() const {
        double s = 0.0;
        for (size_t n = 1; n < amplitudes.size(); ++n) s += double(n) * std::norm(amplitudes[n]);
        return s;
    }
};

namespace detail {

inline void check_truncation(FockVector& psi) {
    const double norm = psi.norm_sq();
    if (!(norm > 0.0))
        throw TruncationInsufficient("fock construction produced a null vector");
    const double tail = std::norm(psi.amplitudes.back()) / norm;
    if (tail >= 1e-12)
        throw TruncationInsufficient(
            "fock truncation N = " + std::to_string(psi.truncation()) +
            " insufficient: |c_N|^2 = " + std::to_string(tail));
    const double inv = 1.0 / std::sqrt(norm);
    for (auto& c : psi.amplitudes) c *= inv;
}

// v <- exp(G) v for a dense (N+1)x(N+1) generator, by scaling-and-squaring of
// the Taylor series applied to the vector.
inline void expm_apply(const std::vector<double>& gen, size_t dim,
                       std::vector<std::complex<double>>& v) {
    double norm1 = 0.0; // max column abs sum
    for (size_t j = 0; j < dim; ++j) {
        double s = 0.0;
        for (size_t i = 0; i < dim; ++i) s += std::abs(gen[i * dim + j]);
        norm1 = std::max(norm1, s);
    }
    int squarings = 0;
    double scale = 1.0;
    while (norm1 * scale > 0.5) { scale *= 0.5; ++squarings; }

    std::vector<std::complex<double>> term(dim), next(dim);
    const int reps = 1 << squarings;
    for (int rep = 0; rep < reps; ++rep) {
        term = v;
        for (int k = 1; k <= 40; ++k) {
            for (size_t i = 0; i < dim; ++i) {
                std::complex<double> acc = 0.0;
                const double* row = gen.data() + i * dim;
                for (size_t j = 0; j < dim; ++j) acc += row[j] * term[j];
                next[i] = acc * (scale / double(k));
            }
            term.swap(next);
            double tn = 0.0, vn = 0.0;
            for (size_t i = 0; i < dim; ++i) {
                v[i] += term[i];
                tn += std::norm(term[i]);
                vn += std::norm(v[i]);
            }
            if (tn <= 1e-34 * vn) break;
        }
    }
}

} // namespace detail

// Coefficients of D(alpha) S(r) |0> from the eigenvalue relation
//   (cosh r * a + sinh r * a^dag) |psi> = alpha e^r |psi>,
// i.e. c_{n+1} = (alpha e^r c_n - sinh r sqrt(n) c_{n-1}) / (cosh r sqrt(n+1)).
inline FockVector fock_displaced_squeezed(double r, double alpha, size_t trunc = 60) {
    if (trunc < 20)
        throw std::invalid_argument("fock_displaced_squeezed: truncation must be >= 20");
    if (std::abs(r) > 2.0 || std::abs(alpha) > 3.0)
        throw std::invalid_argument("fock_displaced_squeezed: outside validity domain |r| <= 2, |alpha| <= 3");

    FockVector psi;
    psi.amplitudes.assign(trunc + 1, 0.0);
    const double ch = std::cosh(r), sh = std::sinh(r), ae = alpha * std::exp(r);
    psi.amplitudes[0] = 1.0;
    for (size_t n = 0; n < trunc; ++n) {
        const std::complex<double> prev = (n >= 1) ? psi.amplitudes[n - 1] : 0.0;
        psi.amplitudes[n + 1] =
            (ae * psi.amplitudes[n] - sh * std::sqrt(double(n)) * prev) /
            (ch * std::sqrt(double(n + 1)));
    }
    detail::check_truncation(psi);
    return psi;
}

// Same state by exponentiating the displacement and squeeze generators in the
// truncated basis: |psi> = exp(alpha (a^dag - a)) exp(r/2 (a^2 - a^dag^2)) |0>.
// Slower; used to cross-check the recursion.
inline FockVector fock_displaced_squeezed_expm(double r, double alpha, size_t trunc = 60) {
    if (trunc < 20)
        throw std::invalid_argument("fock_displaced_squeezed_expm: truncation must be >= 20");
    const size_t dim = trunc + 1;

    std::vector<double> squeeze_gen(dim * dim, 0.0), disp_gen(dim * dim, 0.0);
    for (size_t n = 0; n + 1 < dim; ++n) {
        const double f = std::sqrt(double(n + 1));
        disp_gen[(n + 1) * dim + n] += alpha * f;  // alpha * a^dag
        disp_gen[n * dim + (n + 1)] -= alpha * f;  // -alpha * a
    }
    for (size_t n = 0; n + 2 < dim; ++n) {
        const double f = std::sqrt(double(n + 1)) * std::sqrt(double(n + 2));
        squeeze_gen[n * dim + (n + 2)] += 0.5 * r * f;  // r/2 * a^2
        squeeze_gen[(n + 2) * dim + n] -= 0.5 * r * f;  // -r/2 * a^dag^2
    }

    FockVector psi;
    psi.amplitudes.assign(dim, 0.0);
    psi.amplitudes[0] = 1.0;
    detail::expm_apply(squeeze_gen, dim, psi.amplitudes);
    detail::expm_apply(disp_gen, dim, psi.amplitudes);
    detail::check_truncation(psi);
    return psi;
}

// g2(0) = <n(n-1)> / <n>^2 evaluated directly in the number basis.
inline double g2_fock(const FockVector& psi) {
    double nbar = 0.0, pairs = 0.0;
    for (size_t n = 1; n < psi.amplitudes.size(); ++n) {
        const double p = std::norm(psi.amplitudes[n]);
        nbar += double(n) * p;
        pairs += double(n) * double(n - 1) * p;
    }
    if (nbar <= 1e-12)
        throw UndefinedG2("g2_fock: mean photon number is zero");
    return pairs / (nbar * nbar);
}

// Second-order moments of (Xb+, Xb-, Xc+, Xc-) at times t and t+tau for the
// beamsplitter outputs b = (a+v)/sqrt(2), c = (a-v)/sqrt(2). Variable order:
// [Xb+, Xb-, Xc+, Xc-] at t, then the same four at t+tau.
struct MomentTable {
    std::array<double, 8> mean{};
    std::array<std::array<double, 8>, 8> cov{};

    // Cholesky feasibility check (tolerance for semidefinite directions).
    bool positive_semidefinite(double tol = 1e-9) const {
        std::array<std::array<double, 8>, 8> a = cov;
        for (int i = 0; i < 8; ++i) {
            for (int j = 0; j <= i; ++j) {
                double s = a[i][j];
                for (int k = 0; k < j; ++k) s -= a[i][k] * a[j][k];
                if (i == j) {
                    if (s < -tol) return false;
                    a[i][i] = std::sqrt(std::max(s, 0.0));
                } else {
                    a[i][j] = (a[j][j] > tol) ? s / a[j][j] : 0.0;
                }
            }
        }
        return true;
    }
};

// Build the table from the state and filter. Quadrature records are jointly
// Gaussian with autocorrelation V^i * sinc(Omega tau) (vacuum: sinc itself);
// cross-quadrature covariances vanish for these states.
inline MomentTable moment_table(const GaussianState& state, const FilterSpec& filter, double tau) {
    MomentTable t;
    const double s = filter_commutator(filter, tau);
    const double v[2] = {state.v_plus, state.v_minus};
    const double arm_mean = std::sqrt(2.0) * state.alpha; // <Xb+> = <Xc+> = 2a/sqrt(2)

    // index: arm b quadrature q -> 2*0+q ... arm c -> 2*1+... laid out as
    // [b+, b-, c+, c-]; time block offset 4.
    for (int time = 0; time < 2; ++time) {
        t.mean[4 * time + 0] = arm_mean;
        t.mean[4 * time + 2] = arm_mean;
    }
    auto set = [&](int p, int q, double val) { t.cov[p][q] = val; t.cov[q][p] = val; };
    for (int q = 0; q < 2; ++q) {
        const double same_arm = 0.5 * (v[q] + 1.0); // (V+1)/2
        const double cross_arm = 0.5 * (v[q] - 1.0); // (V-1)/2
        for (int ta = 0; ta < 2; ++ta)
            for (int tb = 0; tb < 2; ++tb) {
                const double lag = (ta == tb) ? 1.0 : s;
                set(4 * ta + q, 4 * tb + q, same_arm * lag);          // b with b
                set(4 * ta + 2 + q, 4 * tb + 2 + q, same_arm * lag);  // c with c
                set(4 * ta + q, 4 * tb + 2 + q, cross_arm * lag);     // b with c
            }
    }
    return t;
}

namespace detail {

// <x^2 y^2> for jointly Gaussian (x, y): full non-central Isserlis expansion,
// mean terms written out.
inline double gaussian_m4(double mx, double my, double sxx, double syy, double sxy) {
    return mx * mx * my * my + mx * mx * syy + my * my * sxx + 4.0 * mx * my * sxy +
           sxx * syy + 2.0 * sxy * sxy;
}

} // namespace detail

// g2(tau) assembled from the quadrature-moment formula with every fourth
// moment expanded by the Gaussian moment theorem. Derivation-independent of
// g2_tau_gaussian.
inline double g2_isserlis(const GaussianState& state, const FilterSpec& filter, double tau) {
    const MomentTable t = moment_table(state, filter, tau);

    // x = Xb^i(t+tau) (indices 4,5), y = Xc^j(t) (indices 2,3)
    double num = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const int x = 4 + i, y = 2 + j;
            num += detail::gaussian_m4(t.mean[x], t.mean[y], t.cov[x][x], t.cov[y][y],
                                       t.cov[x][y]);
        }
    double m2_sum = 0.0, m2_b = 0.0, m2_c = 0.0;
    for (int q = 0; q < 2; ++q) {
        const double mb = t.cov[q][q] + t.mean[q] * t.mean[q];
        const double mc = t.cov[2 + q][2 + q] + t.mean[2 + q] * t.mean[2 + q];
        m2_b += mb;
        m2_c += mc;
        m2_sum += mb + mc;
    }
    num += -2.0 * m2_sum + 4.0;
    const double den = (m2_b - 2.0) * (m2_c - 2.0);
    if (den <= 0.0)
        throw UndefinedG2("g2_isserlis: denominator vanishes (vacuum input)");
    return num / den;
}

// Predicted raw moments for one pair setting; the ground truth the simulated
// records are tested against.
inline double predicted_m2(const GaussianState& state, char quad) {
    const double v = (quad == '+') ? state.v_plus : state.v_minus;
    const double mean = (quad == '+') ? std::sqrt(2.0) * state.alpha : 0.0;
    return 0.5 * (v + 1.0) + mean * mean;
}

inline double predicted_m4(const GaussianState& state, char quad_b, char quad_c,
                           const FilterSpec& filter, double tau) {
    const double vb = (quad_b == '+') ? state.v_plus : state.v_minus;
    const double vc = (quad_c == '+') ? state.v_plus : state.v_minus;
    const double mb = (quad_b == '+') ? std::sqrt(2.0) * state.alpha : 0.0;
    const double mc = (quad_c == '+') ? std::sqrt(2.0) * state.alpha : 0.0;
    const double cross = (quad_b == quad_c)
                             ? 0.5 * (vb - 1.0) * filter_commutator(filter, tau)
                             : 0.0;
    return detail::gaussian_m4(mb, mc, 0.5 * (vb + 1.0), 0.5 * (vc + 1.0), cross);
}

} // namespace g2hbt

#endif
