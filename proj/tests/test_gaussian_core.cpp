#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

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

TEST_CASE("GaussianState construction enforces invariants") {
    CHECK_NOTHROW(GaussianState(1.0, 1.0, 0.0));
    CHECK_NOTHROW(GaussianState(0.5, 2.0, 0.3));
    CHECK_THROWS_AS(GaussianState(0.5, 1.0, 0.0), std::invalid_argument); // purity 0.5
    CHECK_THROWS_AS(GaussianState(-1.0, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(GaussianState(1.0, 0.0, 0.0), std::invalid_argument);

    const GaussianState s(12.80, 1.039, 0.258);
    CHECK(s.purity() == doctest::Approx(12.80 * 1.039));
    CHECK(s.mean_photons() == doctest::Approx((12.80 + 1.039 - 2.0) / 4.0 + 0.258 * 0.258));
    CHECK(vacuum_state().is_vacuum());
    CHECK_FALSE(s.is_vacuum());
}

TEST_CASE("displaced_squeezed") {
    const GaussianState vac = displaced_squeezed(0.0, 0.0);
    CHECK(vac.v_plus == 1.0);
    CHECK(vac.v_minus == 1.0);
    CHECK(vac.alpha == 0.0);

    const GaussianState coh = displaced_squeezed(0.0, 0.5);
    CHECK(coh.v_plus == 1.0);
    CHECK(coh.alpha == 0.5);

    // r = -ln(0.902)/2 reproduces the prepared amplitude variance
    const GaussianState sq = displaced_squeezed(0.0516, 0.257);
    CHECK(sq.v_plus == doctest::Approx(std::exp(-2.0 * 0.0516)).epsilon(1e-15));
    CHECK(sq.v_plus == doctest::Approx(0.902).epsilon(1e-3));
    CHECK(sq.v_minus == doctest::Approx(std::exp(2.0 * 0.0516)).epsilon(1e-15));
    CHECK(sq.purity() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("bias_thermal") {
    CHECK(bias_thermal(vacuum_state(), 0.0).v_plus == 1.0);
    const GaussianState b = bias_thermal(vacuum_state(), 11.80);
    CHECK(b.v_plus == doctest::Approx(12.80));
    CHECK(b.v_minus == 1.0);
    CHECK(b.alpha == 0.0);
    CHECK(bias_thermal(vacuum_state(), 2.0).v_plus == 3.0);
    CHECK_THROWS_AS(bias_thermal(vacuum_state(), -0.1), std::invalid_argument);
}

TEST_CASE("attenuate") {
    const GaussianState s(0.894, 1.139, 0.255);
    const GaussianState id = attenuate(s, 1.0);
    CHECK(id.v_plus == s.v_plus);
    CHECK(id.v_minus == s.v_minus);
    CHECK(id.alpha == s.alpha);

    const GaussianState half = attenuate(s, 0.5);
    CHECK(half.v_plus == doctest::Approx(0.947).epsilon(1e-12));
    CHECK(half.v_minus == doctest::Approx(1.0695).epsilon(1e-12));
    CHECK(half.alpha == doctest::Approx(0.255 / std::sqrt(2.0)).epsilon(1e-12));

    const GaussianState v = attenuate(vacuum_state(), 0.37);
    CHECK(v.v_plus == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(v.v_minus == doctest::Approx(1.0).epsilon(1e-15));

    CHECK_THROWS_AS(attenuate(s, 1.2), std::invalid_argument);
    CHECK_THROWS_AS(attenuate(s, -0.1), std::invalid_argument);
}

TEST_CASE("filter_commutator is sinc") {
    CHECK(filter_commutator(unit_band, 0.0) == 1.0);
    CHECK(std::abs(filter_commutator(unit_band, pi)) < 1e-15);
    CHECK(filter_commutator(unit_band, pi / 2.0) == doctest::Approx(2.0 / pi).epsilon(1e-14));
    const FilterSpec wide(2.5e5);
    CHECK(filter_commutator(wide, pi / 2.5e5) == doctest::Approx(0.0).epsilon(1e-12));

    // series fallback equals sin(x)/x where both are well-conditioned
    for (double x : {0.2e-4, 0.5e-4, 0.99e-4})
        CHECK(std::abs(filter_commutator(unit_band, x) - std::sin(x) / x) < 1e-15);
}

TEST_CASE("g2_zero_pure") {
    CHECK(g2_zero_pure(0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));

    const double sh = std::sinh(0.5);
    CHECK(g2_zero_pure(0.5, 0.0) ==
          doctest::Approx(3.0 + 1.0 / (sh * sh)).epsilon(1e-12)); // 6.6827
    CHECK(g2_zero_pure(0.0516, 0.287) < 1.0); // anti-bunching region
    CHECK(g2_zero_pure(0.0516, 0.287) == doctest::Approx(0.25354601614971506).epsilon(1e-12));

    CHECK_THROWS_AS(g2_zero_pure(0.0, 0.0), UndefinedG2);

    // r -> 0 limit is tame: no coth blow-up
    CHECK(std::isfinite(g2_zero_pure(1e-12, 0.3)));
    CHECK(g2_zero_pure(1e-12, 0.3) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("g2_tau_pure") {
    // sinc zero collapses the formula to a perfect-square ratio = 1
    CHECK(g2_tau_pure(0.3, 0.4, unit_band, pi) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g2_tau_pure(0.3, 0.4, unit_band, 2.0 * pi) == doctest::Approx(1.0).epsilon(1e-12));

    CHECK(rel_diff(g2_tau_pure(0.05, 0.25, unit_band, 0.0), g2_zero_pure(0.05, 0.25)) < 1e-12);

    // intermediate delay, checked against the fourth-moment oracle; for this
    // state the linear sinc term pulls g2 below 1 between tau = 0 and the
    // first zero (g2 is quadratic in sinc, not a monotone interpolation)
    const double g_mid = g2_tau_pure(0.2, 0.3, unit_band, pi / 2.0);
    const double g_zero = g2_zero_pure(0.2, 0.3);
    CHECK(g_zero > 1.0);
    CHECK(g_mid < 1.0);
    CHECK(rel_diff(g_mid, g2_isserlis(displaced_squeezed(0.2, 0.3), unit_band, pi / 2.0)) <
          1e-10);

    CHECK_THROWS_AS(g2_tau_pure(0.0, 0.0, unit_band, 0.3), UndefinedG2);
}

TEST_CASE("g2_tau_gaussian closed forms") {
    // coherent flatline, exact
    for (double to : {0.0, 0.3, 1.0, 2.5, pi, 7.7})
        CHECK(g2_tau_gaussian(GaussianState(1, 1, 0.7), unit_band, to) == 1.0);

    CHECK(g2_zero_gaussian(GaussianState(3, 3, 0)) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(g2_zero_gaussian(GaussianState(3, 1, 0)) == doctest::Approx(3.0).epsilon(1e-13));

    CHECK(g2_zero_gaussian(GaussianState(12.80, 1.039, 0.258)) ==
          doctest::Approx(2.986186987769777).epsilon(1e-12));
    CHECK(g2_zero_gaussian(GaussianState(0.902, 1.137, 0.257)) ==
          doctest::Approx(0.4907000422295371).epsilon(1e-12));

    CHECK_THROWS_AS(g2_zero_gaussian(vacuum_state()), UndefinedG2);
}

TEST_CASE("g2_tau_gaussian ill-conditioning warning") {
    int warned = 0;
    EvalOptions opts;
    opts.warn = [&](const std::string&) { ++warned; };

    g2_zero_gaussian(GaussianState(1.0 + 2e-7, 1.0, 0.0), opts);
    CHECK(warned == 1);

    g2_zero_gaussian(GaussianState(3, 1, 0), opts);
    CHECK(warned == 1); // well-conditioned state does not warn
}

TEST_CASE("pure/general agreement on displaced squeezed states") {
    for (double r = -0.8; r <= 0.8; r += 0.16) {
        if (std::abs(r) < 1e-12) continue;
        for (double a = 0.0; a <= 1.2; a += 0.3)
            for (double to : {0.0, 0.7, pi / 2, 2.0, pi}) {
                const double gp = g2_tau_pure(r, a, unit_band, to);
                const double gg = g2_tau_gaussian(displaced_squeezed(r, a), unit_band, to);
                CHECK(rel_diff(gp, gg) < 1e-12);
            }
    }
}

TEST_CASE("loss invariance (randomized)") {
    const uint64_t key = derive_stream(123, 45);
    for (int i = 0; i < 300; ++i) {
        const GaussianState s = random_state(key, uint64_t(i));
        const double eta = 0.05 + 0.95 * uniform01(key, 5000 + uint64_t(i));
        const GaussianState att = attenuate(s, eta);
        if (att.mean_photons() < 1e-3) continue;
        for (double to : {0.0, 0.9, pi / 2}) {
            const double g0 = g2_tau_gaussian(s, unit_band, to);
            const double g1 = g2_tau_gaussian(att, unit_band, to);
            CHECK(rel_diff(g1, g0) < 1e-10);
        }
    }
}

TEST_CASE("sinc-zero normalization for every state") {
    const uint64_t key = derive_stream(9, 9);
    for (int i = 0; i < 200; ++i) {
        const GaussianState s = random_state(key, uint64_t(i));
        for (int k = 1; k <= 3; ++k)
            CHECK(std::abs(g2_tau_gaussian(s, unit_band, k * pi) - 1.0) < 1e-10);
    }
}

TEST_CASE("squeezed-vacuum identity over r in (0, 2]") {
    for (double r = 0.05; r <= 2.0 + 1e-12; r += 0.05) {
        const double sh = std::sinh(r);
        const double expect = 3.0 + 1.0 / (sh * sh);
        CHECK(rel_diff(g2_zero_pure(r, 0.0), expect) < 1e-10);
    }
}

TEST_CASE("thermal identities hold for all V > 1") {
    for (double v = 1.1; v < 40.0; v *= 1.7) {
        CHECK(std::abs(g2_zero_gaussian(GaussianState(v, v, 0)) - 2.0) < 1e-12);
        CHECK(std::abs(g2_zero_gaussian(GaussianState(v, 1, 0)) - 3.0) < 1e-12);
    }
}

TEST_CASE("large-alpha limit approaches 1 monotonically") {
    // anti-bunched branch: g2 < 1, rising toward 1 beyond the minimum
    double prev = g2_zero_gaussian(GaussianState(0.902, 1.137, 0.5));
    for (double a : {1.0, 2.0, 4.0, 8.0}) {
        const double g = g2_zero_gaussian(GaussianState(0.902, 1.137, a));
        CHECK(g > prev);
        CHECK(g < 1.0);
        prev = g;
    }
    CHECK(prev == doctest::Approx(1.0).epsilon(1e-2));

    // bunched branch: g2 > 1, falling toward 1
    prev = g2_zero_gaussian(GaussianState(3, 1, 0.5));
    for (double a : {1.0, 2.0, 4.0, 8.0}) {
        const double g = g2_zero_gaussian(GaussianState(3, 1, a));
        CHECK(g < prev);
        CHECK(g > 1.0);
        prev = g;
    }
}

TEST_CASE("optimal_displacement") {
    // independent oracle: stationarity of (p u + q)/(A - u)^2 in u = 4 alpha^2
    auto closed_form = [](double vp, double vm) {
        const double S = (vp - 1) * (vp - 1) + (vm - 1) * (vm - 1);
        return std::sqrt((vp + vm - 2.0) + S / (1.0 - vp)) / 2.0;
    };

    const double a1 = optimal_displacement(0.902, 1.137);
    CHECK(a1 > 0.2);
    CHECK(a1 < 0.35);
    CHECK(a1 == doctest::Approx(closed_form(0.902, 1.137)).epsilon(2e-5));

    const double a2 = optimal_displacement(0.890, 1.129);
    CHECK(a2 == doctest::Approx(0.25).epsilon(0.1)); // near 0.25
    CHECK(a2 == doctest::Approx(closed_form(0.890, 1.129)).epsilon(2e-5));
    CHECK(g2_zero_gaussian(GaussianState(0.890, 1.129, a2)) ==
          doctest::Approx(0.2649).epsilon(1e-3));

    CHECK_THROWS_AS(optimal_displacement(1.2, 1.3), NoMinimum);
    CHECK_THROWS_AS(optimal_displacement(1.0, 1.0), NoMinimum);

    // weak pure squeezing: the optimal displacement collapses with epsilon
    double prev = 1e9;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
        const double a = optimal_displacement(1.0 - eps, 1.0 / (1.0 - eps));
        CHECK(a < prev);
        prev = a;
    }
    CHECK(prev < 0.02);
}
