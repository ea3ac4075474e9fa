#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "g2hbt/fock.hpp"
#include "g2hbt/gaussian_state.hpp"
#include "g2hbt/rng.hpp"
#include "g2hbt/scenario.hpp"

using namespace g2hbt;

namespace {
constexpr double pi = 3.14159265358979323846;
const FilterSpec unit_band(1.0);

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }
} // namespace

TEST_CASE("fock_displaced_squeezed basics") {
    // vacuum
    const FockVector vac = fock_displaced_squeezed(0.0, 0.0, 40);
    CHECK(std::abs(vac.amplitudes[0]) == doctest::Approx(1.0).epsilon(1e-14));
    for (size_t n = 1; n < vac.amplitudes.size(); ++n)
        CHECK(std::abs(vac.amplitudes[n]) < 1e-14);

    // coherent closed form c_n = e^{-1/2} / sqrt(n!)
    const FockVector coh = fock_displaced_squeezed(0.0, 1.0, 60);
    double fact = 1.0;
    for (size_t n = 0; n < 12; ++n) {
        if (n > 0) fact *= double(n);
        const double expect = std::exp(-0.5) / std::sqrt(fact);
        CHECK(std::abs(coh.amplitudes[n].real() - expect) < 1e-12);
        CHECK(std::abs(coh.amplitudes[n].imag()) < 1e-14);
    }

    // squeezed vacuum populates even levels only
    const FockVector sq = fock_displaced_squeezed(0.3, 0.0, 60);
    for (size_t n = 1; n < sq.amplitudes.size(); n += 2)
        CHECK(std::abs(sq.amplitudes[n]) < 1e-14);
    CHECK(std::abs(sq.amplitudes[2]) > 0.1);
    // c2/c0 = -tanh(r)/sqrt(2)
    CHECK(sq.amplitudes[2].real() / sq.amplitudes[0].real() ==
          doctest::Approx(-std::tanh(0.3) / std::sqrt(2.0)).epsilon(1e-12));

    CHECK(sq.norm_sq() == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("fock preconditions and truncation adequacy") {
    CHECK_THROWS_AS(fock_displaced_squeezed(0.1, 0.1, 10), std::invalid_argument);
    CHECK_THROWS_AS(fock_displaced_squeezed(2.5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(fock_displaced_squeezed(0.0, 3.5), std::invalid_argument);
    // strong squeezing at small truncation leaves real tail weight
    CHECK_THROWS_AS(fock_displaced_squeezed(2.0, 0.0, 60), TruncationInsufficient);
    CHECK_NOTHROW(fock_displaced_squeezed(0.5, 1.0, 60));
}

TEST_CASE("recursion and generator-exponential constructions agree") {
    for (double r : {0.1, 0.3, -0.25})
        for (double a : {0.0, 0.5, 1.2}) {
            const FockVector rec = fock_displaced_squeezed(r, a, 48);
            const FockVector exp = fock_displaced_squeezed_expm(r, a, 48);
            // global phase fixed by positive c0 in both constructions
            for (size_t n = 0; n < rec.amplitudes.size(); ++n)
                CHECK(std::abs(rec.amplitudes[n] - exp.amplitudes[n]) < 1e-10);
        }
}

TEST_CASE("g2_fock examples") {
    CHECK(g2_fock(fock_displaced_squeezed(0.0, 1.0)) == doctest::Approx(1.0).epsilon(1e-12));

    FockVector one;
    one.amplitudes.assign(30, 0.0);
    one.amplitudes[1] = 1.0;
    CHECK(g2_fock(one) == 0.0);

    FockVector two;
    two.amplitudes.assign(30, 0.0);
    two.amplitudes[2] = 1.0;
    CHECK(g2_fock(two) == doctest::Approx(0.5).epsilon(1e-14));

    FockVector vac;
    vac.amplitudes.assign(30, 0.0);
    vac.amplitudes[0] = 1.0;
    CHECK_THROWS_AS(g2_fock(vac), UndefinedG2);
}

TEST_CASE("oracle agreement: fock vs pure closed form") {
    double worst = 0.0;
    for (double r = 0.02; r <= 0.5 + 1e-9; r += 0.04)
        for (double a = 0.0; a <= 1.0 + 1e-9; a += 0.1)
            worst = std::max(worst,
                             rel_diff(g2_fock(fock_displaced_squeezed(r, a)), g2_zero_pure(r, a)));
    CHECK(worst < 1e-6);
}

TEST_CASE("moment table structure") {
    const GaussianState s(3.0, 1.2, 0.4);
    const MomentTable t = moment_table(s, unit_band, 0.7);

    CHECK(t.mean[0] == doctest::Approx(std::sqrt(2.0) * 0.4).epsilon(1e-14));
    CHECK(t.mean[1] == 0.0);
    CHECK(t.cov[0][0] == doctest::Approx(0.5 * (3.0 + 1.0)).epsilon(1e-14));
    CHECK(t.cov[1][1] == doctest::Approx(0.5 * (1.2 + 1.0)).epsilon(1e-14));
    // same-time cross-arm covariance (V-1)/2
    CHECK(t.cov[0][2] == doctest::Approx(0.5 * (3.0 - 1.0)).epsilon(1e-14));
    // lagged covariances carry sinc
    const double s_lag = sinc(0.7);
    CHECK(t.cov[0][4] == doctest::Approx(0.5 * 4.0 * s_lag).epsilon(1e-14));
    CHECK(t.cov[0][6] == doctest::Approx(0.5 * 2.0 * s_lag).epsilon(1e-14));
    // no cross-quadrature terms
    CHECK(t.cov[0][1] == 0.0);
    CHECK(t.cov[0][3] == 0.0);
    CHECK(t.cov[0][5] == 0.0);
    // symmetric positive semidefinite
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) CHECK(t.cov[i][j] == t.cov[j][i]);
    CHECK(t.positive_semidefinite());
}

TEST_CASE("moment tables are PSD over random states and lags") {
    const uint64_t key = derive_stream(77, 1);
    for (int i = 0; i < 100; ++i) {
        const GaussianState s = random_state(key, uint64_t(i));
        for (double to : {0.0, 0.4, pi / 2, pi, 5.0})
            CHECK(moment_table(s, unit_band, to).positive_semidefinite());
    }
}

TEST_CASE("g2_isserlis examples") {
    CHECK(g2_isserlis(GaussianState(1, 1, 0.8), unit_band, 0.45) ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(g2_isserlis(GaussianState(3, 3, 0), unit_band, 0.0) ==
          doctest::Approx(2.0).epsilon(1e-13));
    CHECK_THROWS_AS(g2_isserlis(vacuum_state(), unit_band, 0.0), UndefinedG2);
}

TEST_CASE("oracle agreement: isserlis vs general closed form") {
    const uint64_t key = derive_stream(314, 159);
    double worst = 0.0;
    for (int i = 0; i < 400; ++i) {
        const GaussianState s = random_state(key, uint64_t(i));
        for (double to : {0.0, 0.3, 1.1, pi / 2, 2.9, pi, 7.1})
            worst = std::max(worst, rel_diff(g2_isserlis(s, unit_band, to),
                                             g2_tau_gaussian(s, unit_band, to)));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("single-mode and beamsplitter forms are equivalent (pure states)") {
    for (double r : {0.05, 0.2, 0.45})
        for (double a : {0.0, 0.3, 0.9}) {
            const double g_direct = g2_fock(fock_displaced_squeezed(r, a));
            const double g_split = g2_isserlis(displaced_squeezed(r, a), unit_band, 0.0);
            CHECK(rel_diff(g_split, g_direct) < 1e-6);
        }
}

TEST_CASE("loss invariance through the oracle path") {
    const uint64_t key = derive_stream(2718, 28);
    for (int i = 0; i < 100; ++i) {
        const GaussianState s = random_state(key, uint64_t(i));
        const double eta = 0.1 + 0.9 * uniform01(key, 800 + uint64_t(i));
        const GaussianState att = attenuate(s, eta);
        if (att.mean_photons() < 1e-3) continue;
        const double g0 = g2_isserlis(s, unit_band, 0.6);
        const double g1 = g2_isserlis(att, unit_band, 0.6);
        CHECK(rel_diff(g1, g0) < 1e-10);
    }
}

TEST_CASE("predicted pair moments match the isserlis assembly inputs") {
    const GaussianState s(0.902, 1.137, 0.257);
    // m2 of a '+' arm record: (V+ + 1)/2 + 2 alpha^2
    CHECK(predicted_m2(s, '+') ==
          doctest::Approx(0.5 * (0.902 + 1.0) + 2.0 * 0.257 * 0.257).epsilon(1e-14));
    CHECK(predicted_m2(s, '-') == doctest::Approx(0.5 * (1.137 + 1.0)).epsilon(1e-14));
    // cross-quadrature pairs have no covariance term
    const double m4_mixed = predicted_m4(s, '+', '-', unit_band, 0.0);
    const double mb2 = 2.0 * 0.257 * 0.257;
    CHECK(m4_mixed == doctest::Approx((0.5 * 1.902 + mb2) * 0.5 * 2.137 -
                                      0.0 * 0.0).epsilon(1e-12));
}
