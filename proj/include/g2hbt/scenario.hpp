#ifndef G2HBT_SCENARIO_HPP
#define G2HBT_SCENARIO_HPP

#include <atomic>
#include <limits>
#include <cmath>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "g2hbt/estimator.hpp"
#include "g2hbt/fock.hpp"
#include "g2hbt/gaussian_state.hpp"
#include "g2hbt/io.hpp"
#include "g2hbt/signal.hpp"

// Scenario presets and the self-check suites behind the `scenario` and
// `verify` subcommands. Every emitted file embeds the fully resolved config;
// sweep points are independently seeded, so worker count never changes bytes.

namespace g2hbt {

inline constexpr double kPi = 3.14159265358979323846;

// Prepared states exercised by the canned scenarios.
namespace presets {

// weakly squeezed + displaced: anti-bunched at tau = 0
inline const GaussianState antibunch_tau{0.902, 1.137, 0.257};
// coherent reference beam
inline const GaussianState coherent_tau{1.0, 1.0, 0.5};
// strongly biased thermal state for the tau-decay curve
inline const GaussianState thermal_tau{14.60, 1.025, 0.258};

// displacement sweeps: (V+, V-) pairs
inline const GaussianState sweep_squeezed{0.902, 1.137, 0.0};
inline const GaussianState sweep_near_pure{0.890, 1.129, 0.0};
inline const GaussianState sweep_coherent{1.0, 1.0, 0.0};
inline const GaussianState sweep_thermal{12.80, 1.039, 0.0};

// near-vacuum squeezed state: super-bunched, ill-conditioned
inline const GaussianState superbunch{0.901, 1.136, 0.001};
// loss-test state and transmissions
inline const GaussianState loss_state{0.894, 1.139, 0.255};
inline constexpr double loss_eta_high = 0.86;
inline constexpr double loss_eta_low = 0.43;

} // namespace presets

struct ScenarioConfig {
    std::string scenario;       // fig3 | fig4 | superbunch | loss
    GaussianState state;        // used by free-form runs; presets override
    size_t samples = 100000;    // per run, post-DSP
    size_t runs = 10;
    uint64_t seed = 42;
    double eta = 1.0;
    uint32_t oversample = 8;    // tau-resolved default
    uint32_t decimate_factor = 1;
    double tau_max = 3.0 * kPi; // in tau*Omega units
    size_t tau_steps = 24;
    double alpha_max = 0.65;    // fig4 sweep extent
    size_t alpha_steps = 13;
    std::string out_dir = "out";
    std::string format = "csv";
    unsigned threads = 1;

    HbtRunConfig run_config() const {
        HbtRunConfig rc;
        rc.state = state;
        rc.n_samples = samples;
        rc.n_runs = runs;
        rc.oversample = oversample;
        rc.decimate_factor = decimate_factor;
        rc.seed = seed;
        rc.eta = eta;
        return rc;
    }

    ConfigMap to_map() const {
        ConfigMap m;
        m["scenario.name"] = scenario;
        m["state.v_plus"] = fmt_double(state.v_plus);
        m["state.v_minus"] = fmt_double(state.v_minus);
        m["state.alpha"] = fmt_double(state.alpha);
        m["sim.samples"] = std::to_string(samples);
        m["sim.runs"] = std::to_string(runs);
        m["sim.seed"] = std::to_string(seed);
        m["sim.eta"] = fmt_double(eta);
        m["sim.oversample"] = std::to_string(oversample);
        m["sim.decimate"] = std::to_string(decimate_factor);
        m["grid.tau_max"] = fmt_double(tau_max);
        m["grid.tau_steps"] = std::to_string(tau_steps);
        m["grid.alpha_max"] = fmt_double(alpha_max);
        m["grid.alpha_steps"] = std::to_string(alpha_steps);
        // output location is delivery detail, not provenance: embedding it
        // would break byte-identical re-runs into a different directory
        m["output.format"] = format;
        return m;
    }

    static const std::set<std::string>& known_keys() {
        static const std::set<std::string> keys = {
            "scenario.name", "state.v_plus", "state.v_minus", "state.alpha", "state.r",
            "sim.samples", "sim.runs", "sim.seed", "sim.eta", "sim.oversample", "sim.decimate",
            "grid.tau_max", "grid.tau_steps", "grid.alpha_max", "grid.alpha_steps",
            "output.dir", "output.format"};
        return keys;
    }

    // Overlay values from a config map; unknown keys are an error.
    void apply(const ConfigMap& m) {
        for (const auto& [k, v] : m)
            if (!known_keys().count(k))
                throw std::invalid_argument("config: unknown key '" + k + "'");
        double vp = state.v_plus, vm = state.v_minus, a = state.alpha;
        bool has_r = false;
        double r = 0.0;
        auto want = [&](const char* k) { return m.count(k) ? &m.at(k) : nullptr; };
        if (auto* v = want("scenario.name")) scenario = *v;
        if (auto* v = want("state.v_plus")) vp = std::stod(*v);
        if (auto* v = want("state.v_minus")) vm = std::stod(*v);
        if (auto* v = want("state.alpha")) a = std::stod(*v);
        if (auto* v = want("state.r")) { r = std::stod(*v); has_r = true; }
        if (auto* v = want("sim.samples")) samples = std::stoull(*v);
        if (auto* v = want("sim.runs")) runs = std::stoull(*v);
        if (auto* v = want("sim.seed")) seed = std::stoull(*v);
        if (auto* v = want("sim.eta")) eta = std::stod(*v);
        if (auto* v = want("sim.oversample")) oversample = uint32_t(std::stoul(*v));
        if (auto* v = want("sim.decimate")) decimate_factor = uint32_t(std::stoul(*v));
        if (auto* v = want("grid.tau_max")) tau_max = std::stod(*v);
        if (auto* v = want("grid.tau_steps")) tau_steps = std::stoull(*v);
        if (auto* v = want("grid.alpha_max")) alpha_max = std::stod(*v);
        if (auto* v = want("grid.alpha_steps")) alpha_steps = std::stoull(*v);
        if (auto* v = want("output.dir")) out_dir = *v;
        if (auto* v = want("output.format")) format = *v;
        state = has_r ? displaced_squeezed(r, a) : GaussianState(vp, vm, a);
    }
};

namespace detail {

template <typename F>
inline void parallel_for(size_t n, unsigned threads, F&& body) {
    if (threads <= 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    const unsigned workers = std::min<unsigned>(threads, unsigned(n));
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    body(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    // rethrow the lowest-index failure so scheduling cannot change behavior
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace detail

// Analytic curve over a tau*Omega grid; zero-width intervals.
inline G2Curve analytic_curve(const GaussianState& state, double tau_omega_max,
                              size_t steps, const EvalOptions& opts = {}) {
    G2Curve curve;
    curve.state = state;
    const FilterSpec filter(1.0); // tau carries tau*Omega directly
    for (size_t j = 0; j <= steps; ++j) {
        const double to = steps == 0 ? 0.0 : tau_omega_max * double(j) / double(steps);
        G2Point pt;
        pt.tau_omega = to;
        pt.g2 = g2_tau_gaussian(state, filter, to, opts);
        pt.ci68_low = pt.ci68_high = pt.g2;
        curve.points.push_back(pt);
    }
    return curve;
}

// Simulated curve: acquires the four pair settings and estimates over the lag
// grid implied by tau_max and the oversample/decimation setting.
inline G2Curve simulate_curve(const ScenarioConfig& sc, const GaussianState& state,
                              uint64_t seed) {
    HbtRunConfig rc = sc.run_config();
    rc.state = state;
    rc.seed = seed;
    const double step = kPi * double(rc.effective_decimation()) / double(rc.oversample);
    const size_t k_max = size_t(std::floor(sc.tau_max / step + 1e-9));
    std::vector<size_t> lags(k_max + 1);
    for (size_t k = 0; k <= k_max; ++k) lags[k] = k;

    EstimatorOptions opts;
    std::vector<std::string> warnings;
    opts.warn = [&](const std::string& w) { warnings.push_back(w); };
    G2Curve curve = measure_g2(rc, lags, opts);
    curve.warnings = std::move(warnings);
    return curve;
}

struct ScenarioResult {
    std::string name;
    std::vector<std::string> files;
    std::vector<std::string> warnings;
    std::vector<G2Curve> curves;            // simulated
    std::vector<G2Curve> analytic;          // matching analytic overlays
    std::vector<std::string> curve_labels;
};

namespace detail {

inline void emit_curve_pair(const std::filesystem::path& dir, const std::string& stem,
                            const G2Curve& sim, const G2Curve& ana, const ConfigMap& prov,
                            ScenarioResult& result) {
    const std::string sim_name = stem + "_sim.csv";
    const std::string ana_name = stem + "_analytic.csv";
    write_text_file(dir / sim_name, g2curve_csv(sim, prov));
    write_text_file(dir / ana_name, g2curve_csv(ana, prov));
    double analytic_zero = ana.points.empty() ? 0.0 : ana.points.front().g2;
    write_text_file(dir / (stem + "_summary.json"),
                    summary_json(sim, analytic_zero, sim_name, prov).dump(2) + "\n");
    result.files.insert(result.files.end(), {sim_name, ana_name, stem + "_summary.json"});
    result.curves.push_back(sim);
    result.analytic.push_back(ana);
    result.curve_labels.push_back(stem);
    for (const auto& w : sim.warnings) result.warnings.push_back(stem + ": " + w);
}

} // namespace detail

// fig3: g2(tau*Omega) curves for the three tau-resolved states.
inline ScenarioResult run_fig3(const ScenarioConfig& sc) {
    std::filesystem::create_directories(sc.out_dir);
    ScenarioResult result;
    result.name = "fig3";
    const std::vector<std::pair<std::string, GaussianState>> curves = {
        {"fig3_i", presets::antibunch_tau},
        {"fig3_ii", presets::coherent_tau},
        {"fig3_iii", presets::thermal_tau},
    };
    std::vector<ScenarioResult> partial(curves.size());
    detail::parallel_for(curves.size(), sc.threads, [&](size_t c) {
        const auto& [stem, state] = curves[c];
        const uint64_t seed = derive_stream(sc.seed, 0xF160000ull + c);
        ScenarioConfig local = sc;
        local.scenario = "fig3";
        local.state = state;
        ConfigMap prov = local.to_map();
        prov["sim.seed"] = std::to_string(seed);
        const G2Curve sim = simulate_curve(sc, state, seed);
        const size_t fine = std::max<size_t>(sc.tau_steps * 4, 96);
        const G2Curve ana = analytic_curve(state, sc.tau_max, fine);
        detail::emit_curve_pair(sc.out_dir, stem, sim, ana, prov, partial[c]);
    });
    for (auto& p : partial) {
        result.files.insert(result.files.end(), p.files.begin(), p.files.end());
        result.warnings.insert(result.warnings.end(), p.warnings.begin(), p.warnings.end());
        result.curves.insert(result.curves.end(), p.curves.begin(), p.curves.end());
        result.analytic.insert(result.analytic.end(), p.analytic.begin(), p.analytic.end());
        result.curve_labels.insert(result.curve_labels.end(), p.curve_labels.begin(),
                                   p.curve_labels.end());
    }
    write_text_file(std::filesystem::path(sc.out_dir) / "fig3.config",
                    config_to_text(sc.to_map()));
    result.files.push_back("fig3.config");
    return result;
}

struct SweepPoint {
    double alpha = 0.0;
    double g2 = 0.0;
    double ci68_low = 0.0;
    double ci68_high = 0.0;
    double g2_analytic = 0.0;
};

struct SweepResult {
    std::string label;
    GaussianState base; // alpha = 0
    std::vector<SweepPoint> points;
    std::vector<std::string> warnings;
};

// g2(0) vs displacement for one variance pair. Sweep points get independent
// seeds and may run on a worker pool; assembly is by index.
inline SweepResult displacement_sweep(const ScenarioConfig& sc, const std::string& label,
                                      const GaussianState& base, uint64_t seed,
                                      bool skip_alpha_zero) {
    SweepResult sweep;
    sweep.label = label;
    sweep.base = base;
    const size_t n = sc.alpha_steps + 1;
    sweep.points.assign(n, {});
    std::vector<std::vector<std::string>> warn(n);
    detail::parallel_for(n, sc.threads, [&](size_t p) {
        double a = sc.alpha_max * double(p) / double(sc.alpha_steps);
        if (p == 0 && skip_alpha_zero) a = sc.alpha_max * 0.5 / double(sc.alpha_steps);
        const GaussianState state(base.v_plus, base.v_minus, a);
        HbtRunConfig rc = sc.run_config();
        rc.state = state;
        rc.oversample = 2;      // tau = 0 only: flat-band records
        rc.decimate_factor = 2;
        rc.seed = derive_stream(seed, 0xA1F40000ull + p);
        EstimatorOptions opts;
        opts.warn = [&](const std::string& w) { warn[p].push_back(w); };
        SweepPoint& pt = sweep.points[p];
        pt.alpha = a;
        pt.g2_analytic = g2_zero_gaussian(state);
        try {
            const G2Curve curve = measure_g2(rc, {0}, opts);
            pt.g2 = curve.points[0].g2;
            pt.ci68_low = curve.points[0].ci68_low;
            pt.ci68_high = curve.points[0].ci68_high;
        } catch (const DenominatorVanishing& e) {
            // near-vacuum sweep point: no usable estimate; marked, not silent
            pt.g2 = pt.ci68_low = pt.ci68_high = std::numeric_limits<double>::quiet_NaN();
            warn[p].push_back("alpha = " + fmt_double(a) + ": " + e.what());
        }
    });
    for (auto& w : warn)
        sweep.warnings.insert(sweep.warnings.end(), w.begin(), w.end());
    return sweep;
}

inline std::string sweep_csv(const SweepResult& sweep, const ConfigMap& prov) {
    std::string out = provenance_comment(prov);
    out += "alpha,g2,ci68_low,ci68_high,g2_analytic\n";
    for (const auto& pt : sweep.points)
        out += fmt_double(pt.alpha) + "," + fmt_double(pt.g2) + "," + fmt_double(pt.ci68_low) +
               "," + fmt_double(pt.ci68_high) + "," + fmt_double(pt.g2_analytic) + "\n";
    return out;
}

struct Fig4Result {
    std::vector<SweepResult> sweeps;
    std::vector<std::string> files;
    std::vector<std::string> warnings;
};

// fig4: g2(0) vs alpha for the four variance pairs.
inline Fig4Result run_fig4(const ScenarioConfig& sc) {
    std::filesystem::create_directories(sc.out_dir);
    Fig4Result result;
    const std::vector<std::tuple<std::string, GaussianState, bool>> sweeps = {
        {"fig4_i", presets::sweep_squeezed, false},
        {"fig4_ii", presets::sweep_near_pure, false},
        {"fig4_iii", presets::sweep_coherent, true}, // alpha = 0 is the vacuum
        {"fig4_iv", presets::sweep_thermal, false},
    };
    for (size_t i = 0; i < sweeps.size(); ++i) {
        const auto& [label, base, skip_zero] = sweeps[i];
        const uint64_t seed = derive_stream(sc.seed, 0xF1640000ull + i);
        SweepResult sweep = displacement_sweep(sc, label, base, seed, skip_zero);
        ScenarioConfig local = sc;
        local.scenario = "fig4";
        local.state = base;
        ConfigMap prov = local.to_map();
        prov["sim.seed"] = std::to_string(seed);
        write_text_file(std::filesystem::path(sc.out_dir) / (label + "_sim.csv"),
                        sweep_csv(sweep, prov));
        // analytic overlay on a fine alpha grid
        std::string ana = provenance_comment(prov);
        ana += "alpha,g2_analytic\n";
        const size_t fine = std::max<size_t>(sc.alpha_steps * 8, 104);
        for (size_t j = (skip_zero ? 1 : 0); j <= fine; ++j) {
            const double a = sc.alpha_max * double(j) / double(fine);
            const GaussianState st(base.v_plus, base.v_minus, a);
            if (st.mean_photons() <= 0.0) continue;
            ana += fmt_double(a) + "," + fmt_double(g2_zero_gaussian(st)) + "\n";
        }
        write_text_file(std::filesystem::path(sc.out_dir) / (label + "_analytic.csv"), ana);
        result.files.insert(result.files.end(), {label + "_sim.csv", label + "_analytic.csv"});
        for (const auto& w : sweep.warnings) result.warnings.push_back(label + ": " + w);
        result.sweeps.push_back(std::move(sweep));
    }
    write_text_file(std::filesystem::path(sc.out_dir) / "fig4.config",
                    config_to_text(sc.to_map()));
    result.files.push_back("fig4.config");
    return result;
}

struct SuperbunchResult {
    G2Curve curve;
    double analytic = 0.0;
    std::vector<std::string> files;
    std::vector<std::string> warnings;
};

// Near-vacuum squeezed state: a single tau = 0 estimate with the
// ill-conditioning warning surfaced.
inline SuperbunchResult run_superbunch(const ScenarioConfig& sc) {
    std::filesystem::create_directories(sc.out_dir);
    SuperbunchResult result;
    HbtRunConfig rc = sc.run_config();
    rc.state = presets::superbunch;
    rc.oversample = 2;
    rc.decimate_factor = 2;
    rc.seed = derive_stream(sc.seed, 0x50B0ull);
    EstimatorOptions opts;
    opts.warn = [&](const std::string& w) { result.warnings.push_back(w); };
    result.curve = measure_g2(rc, {0}, opts);
    result.curve.warnings = result.warnings;
    result.analytic = g2_zero_gaussian(presets::superbunch);

    ScenarioConfig local = sc;
    local.scenario = "superbunch";
    local.state = presets::superbunch;
    ConfigMap prov = local.to_map();
    prov["sim.seed"] = std::to_string(rc.seed);
    write_text_file(std::filesystem::path(sc.out_dir) / "superbunch_sim.csv",
                    g2curve_csv(result.curve, prov));
    write_text_file(std::filesystem::path(sc.out_dir) / "superbunch_summary.json",
                    summary_json(result.curve, result.analytic, "superbunch_sim.csv", prov)
                            .dump(2) +
                        "\n");
    write_text_file(std::filesystem::path(sc.out_dir) / "superbunch.config",
                    config_to_text(local.to_map()));
    result.files = {"superbunch_sim.csv", "superbunch_summary.json", "superbunch.config"};
    return result;
}

struct LossResult {
    std::vector<LossPoint> points;
    double analytic = 0.0;
    std::vector<std::string> files;
    std::vector<std::string> warnings;
};

// Loss test: same state estimated behind two transmissions.
inline LossResult run_loss(const ScenarioConfig& sc) {
    std::filesystem::create_directories(sc.out_dir);
    LossResult result;
    HbtRunConfig rc = sc.run_config();
    rc.oversample = 2;
    rc.decimate_factor = 2;
    EstimatorOptions opts;
    opts.warn = [&](const std::string& w) { result.warnings.push_back(w); };
    result.points =
        loss_sweep(presets::loss_state, {presets::loss_eta_high, presets::loss_eta_low}, rc, opts);
    result.analytic = g2_zero_gaussian(presets::loss_state);

    ScenarioConfig local = sc;
    local.scenario = "loss";
    local.state = presets::loss_state;
    ConfigMap prov = local.to_map();
    std::string csv = provenance_comment(prov);
    csv += "eta,g2,ci68_low,ci68_high,g2_analytic\n";
    for (const auto& pt : result.points) {
        const auto& p0 = pt.curve.points[0];
        csv += fmt_double(pt.eta) + "," + fmt_double(p0.g2) + "," + fmt_double(p0.ci68_low) +
               "," + fmt_double(p0.ci68_high) + "," + fmt_double(result.analytic) + "\n";
    }
    write_text_file(std::filesystem::path(sc.out_dir) / "loss_sim.csv", csv);
    nlohmann::ordered_json j;
    j["scenario"] = "loss";
    j["state"] = state_json(presets::loss_state);
    j["analytic_g2"] = result.analytic;
    nlohmann::ordered_json pts = nlohmann::ordered_json::array();
    for (const auto& pt : result.points) {
        const auto& p0 = pt.curve.points[0];
        pts.push_back({{"eta", pt.eta},
                       {"g2", p0.g2},
                       {"ci68", {p0.ci68_low, p0.ci68_high}},
                       {"seed", pt.curve.seed}});
    }
    j["points"] = pts;
    nlohmann::ordered_json cfg;
    for (const auto& [k, v] : prov) cfg[k] = v;
    j["config"] = cfg;
    write_text_file(std::filesystem::path(sc.out_dir) / "loss_summary.json", j.dump(2) + "\n");
    write_text_file(std::filesystem::path(sc.out_dir) / "loss.config",
                    config_to_text(local.to_map()));
    result.files = {"loss_sim.csv", "loss_summary.json", "loss.config"};
    return result;
}

// ---------------------------------------------------------------------------
// verify: the oracle-equivalence and identity suites as a release gate.
// ---------------------------------------------------------------------------

struct VerifySuite {
    std::string name;
    size_t cases = 0;
    double max_err = 0.0;
    double tolerance = 0.0;
    bool pass = true;
};

// Random valid state: squeezed-thermal with independent excess noise in each
// quadrature; near-vacuum draws (nbar < 0.01) are rejected because the
// relative-comparison budget degenerates with the 1/nbar^2 amplification.
inline GaussianState random_state(uint64_t key, uint64_t index) {
    for (uint64_t salt = 0;; ++salt) {
        const double r = -1.0 + 2.0 * uniform01(key, index * 8 + salt * 4 + 0);
        const double nu1 = 1.0 + 3.0 * uniform01(key, index * 8 + salt * 4 + 1);
        const double nu2 = 1.0 + 3.0 * uniform01(key, index * 8 + salt * 4 + 2);
        const double alpha = -1.5 + 3.0 * uniform01(key, index * 8 + salt * 4 + 3);
        const GaussianState s(nu1 * std::exp(-2.0 * r), nu2 * std::exp(2.0 * r), alpha);
        if (s.mean_photons() >= 0.01) return s;
    }
}

// perturb: offset added to the closed-form side of the Isserlis comparison;
// a nonzero value must be detected (sensitivity proof for the gate).
inline std::vector<VerifySuite> run_verify(bool fine_grid, double perturb = 0.0) {
    std::vector<VerifySuite> suites;
    const FilterSpec unit(1.0);
    const uint64_t key = derive_stream(20260808ull, 0xC0FFEEull);

    auto record = [&](const std::string& name, size_t cases, double max_err, double tol) {
        suites.push_back({name, cases, max_err, tol, max_err <= tol});
    };

    const size_t n_states = fine_grid ? 2000 : 400;
    const std::vector<double> tau_grid = {0.0,  0.3,  0.7,  1.2, kPi / 2.0, 2.2,
                                          kPi,  4.0,  5.5,  2.0 * kPi, 8.0, 3.0 * kPi};

    { // exact identities
        double err = 0.0;
        size_t cases = 0;
        for (double a : {0.1, 0.5, 1.0, 2.0})
            for (double to : tau_grid) {
                err = std::max(err, std::abs(g2_tau_gaussian(GaussianState(1, 1, a), unit, to) - 1.0));
                ++cases;
            }
        for (double v : {1.5, 2.0, 3.0, 7.0, 12.8}) {
            err = std::max(err, std::abs(g2_zero_gaussian(GaussianState(v, v, 0)) - 2.0));
            err = std::max(err, std::abs(g2_zero_gaussian(GaussianState(v, 1, 0)) - 3.0));
            cases += 2;
        }
        record("identity.coherent_thermal", cases, err, 1e-12);
    }
    { // squeezed-vacuum closed form
        double err = 0.0;
        size_t cases = 0;
        for (double r = 0.05; r <= 2.0; r += 0.05) {
            const double sh = std::sinh(r);
            const double expect = 3.0 + 1.0 / (sh * sh);
            err = std::max(err, std::abs(g2_zero_pure(r, 0.0) - expect) / expect);
            ++cases;
        }
        record("identity.squeezed_vacuum", cases, err, 1e-10);
    }
    { // g2 = 1 at sinc zeros for every state
        double err = 0.0;
        size_t cases = 0;
        for (size_t i = 0; i < n_states / 4; ++i) {
            const GaussianState s = random_state(key, 7000 + i);
            for (int k = 1; k <= 3; ++k) {
                err = std::max(err, std::abs(g2_tau_gaussian(s, unit, k * kPi) - 1.0));
                ++cases;
            }
        }
        record("identity.sinc_zeros", cases, err, 1e-10);
    }
    { // pure-state form vs general form
        double err = 0.0;
        size_t cases = 0;
        for (double r = -0.8; r <= 0.8; r += 0.1) {
            if (std::abs(r) < 1e-9) continue;
            for (double a = 0.0; a <= 1.0; a += 0.125)
                for (double to : tau_grid) {
                    const double gp = g2_tau_pure(r, a, unit, to);
                    const double gg = g2_tau_gaussian(displaced_squeezed(r, a), unit, to);
                    err = std::max(err, std::abs(gp - gg) / std::max(1.0, std::abs(gp)));
                    ++cases;
                }
        }
        record("oracle.pure_vs_general", cases, err, 1e-12);
    }
    { // Isserlis fourth-moment assembly vs closed form
        double err = 0.0;
        size_t cases = 0;
        for (size_t i = 0; i < n_states; ++i) {
            const GaussianState s = random_state(key, i);
            for (double to : tau_grid) {
                const double gi = g2_isserlis(s, unit, to);
                const double gg = g2_tau_gaussian(s, unit, to) + perturb;
                err = std::max(err, std::abs(gi - gg) / std::max(1.0, std::abs(gg)));
                ++cases;
            }
        }
        record("oracle.isserlis_vs_general", cases, err, 1e-10);
    }
    { // truncated Fock evaluation vs pure closed form
        double err = 0.0;
        size_t cases = 0;
        for (double r = 0.02; r <= 0.5 + 1e-9; r += (fine_grid ? 0.03 : 0.06))
            for (double a = 0.0; a <= 1.0 + 1e-9; a += (fine_grid ? 0.1 : 0.2)) {
                const double gf = g2_fock(fock_displaced_squeezed(r, a));
                const double gz = g2_zero_pure(r, a);
                err = std::max(err, std::abs(gf - gz) / std::max(1.0, std::abs(gz)));
                ++cases;
            }
        record("oracle.fock_vs_pure", cases, err, 1e-6);
    }
    { // beamsplitter-moment route vs direct number-basis route (pure states)
        double err = 0.0;
        size_t cases = 0;
        for (double r = 0.05; r <= 0.5 + 1e-9; r += 0.09)
            for (double a = 0.0; a <= 1.0 + 1e-9; a += 0.25) {
                const double gi = g2_isserlis(displaced_squeezed(r, a), unit, 0.0);
                const double gf = g2_fock(fock_displaced_squeezed(r, a));
                err = std::max(err, std::abs(gi - gf) / std::max(1.0, std::abs(gf)));
                ++cases;
            }
        record("oracle.fock_vs_isserlis", cases, err, 1e-6);
    }
    { // loss invariance, closed form and oracle path
        double err = 0.0;
        size_t cases = 0;
        for (size_t i = 0; i < n_states; ++i) {
            const GaussianState s = random_state(key, 40000 + i);
            const double eta = 0.05 + 0.95 * uniform01(key, 90000 + i);
            const GaussianState att = attenuate(s, eta);
            if (att.mean_photons() < 1e-3) continue;
            for (double to : {0.0, 1.1, kPi / 2}) {
                const double g0 = g2_tau_gaussian(s, unit, to);
                const double g1 = g2_tau_gaussian(att, unit, to);
                const double g2i = g2_isserlis(att, unit, to);
                err = std::max(err, std::abs(g1 - g0) / std::max(1.0, std::abs(g0)));
                err = std::max(err, std::abs(g2i - g0) / std::max(1.0, std::abs(g0)));
                cases += 2;
            }
        }
        record("property.loss_invariance", cases, err, 1e-10);
    }
    return suites;
}

} // namespace g2hbt

#endif
