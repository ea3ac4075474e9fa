// g2hbt: second-order coherence of Gaussian sideband states through a
// homodyne split-detector simulation.
//
// Subcommands: analytic, simulate, estimate, scenario, oracle, verify.
// Exit codes: 0 success, 1 domain error (undefined g2, vanishing denominator),
// 2 usage error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "g2hbt/estimator.hpp"
#include "g2hbt/fock.hpp"
#include "g2hbt/gaussian_state.hpp"
#include "g2hbt/io.hpp"
#include "g2hbt/scenario.hpp"
#include "g2hbt/signal.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct StateFlags {
    double vplus = 1.0, vminus = 1.0, alpha = 0.0, r = 0.0;
    bool has_r = false;

    g2hbt::GaussianState resolve() const {
        return has_r ? g2hbt::displaced_squeezed(r, alpha)
                     : g2hbt::GaussianState(vplus, vminus, alpha);
    }
};

void add_state_flags(CLI::App* cmd, StateFlags& sf) {
    auto* vp = cmd->add_option("--vplus", sf.vplus, "amplitude-quadrature variance V+ (vacuum = 1)");
    auto* vm = cmd->add_option("--vminus", sf.vminus, "phase-quadrature variance V- (vacuum = 1)");
    auto* r = cmd->add_option("--r", sf.r, "squeezing parameter (alternative to --vplus/--vminus)");
    cmd->add_option("--alpha", sf.alpha, "real coherent displacement");
    r->excludes(vp)->excludes(vm);
    cmd->callback([&sf, r] { sf.has_r = r->count() > 0; });
}

std::string format_curve(const g2hbt::G2Curve& curve, const g2hbt::ConfigMap& prov,
                         const std::string& format, double analytic_zero) {
    if (format == "json") {
        ordered_json j = g2hbt::summary_json(curve, analytic_zero, "", prov);
        ordered_json pts = ordered_json::array();
        for (const auto& pt : curve.points)
            pts.push_back({{"tau_omega", pt.tau_omega},
                           {"g2", pt.g2},
                           {"ci68", {pt.ci68_low, pt.ci68_high}}});
        j["points"] = pts;
        return j.dump(2) + "\n";
    }
    return g2hbt::g2curve_csv(curve, prov);
}

void write_or_print(const std::string& out, const std::string& content) {
    if (out.empty() || out == "-") {
        std::cout << content;
    } else {
        g2hbt::write_text_file(out, content);
    }
}

const char* pair_stem(char i, char j) {
    if (i == '+') return j == '+' ? "pp" : "pm";
    return j == '+' ? "mp" : "mm";
}

g2hbt::ConfigMap dataset_config_map(const g2hbt::HbtRunConfig& cfg) {
    g2hbt::ConfigMap m;
    m["state.v_plus"] = g2hbt::fmt_double(cfg.state.v_plus);
    m["state.v_minus"] = g2hbt::fmt_double(cfg.state.v_minus);
    m["state.alpha"] = g2hbt::fmt_double(cfg.state.alpha);
    m["sim.samples"] = std::to_string(cfg.n_samples);
    m["sim.runs"] = std::to_string(cfg.n_runs);
    m["sim.seed"] = std::to_string(cfg.seed);
    m["sim.eta"] = g2hbt::fmt_double(cfg.eta);
    m["sim.oversample"] = std::to_string(cfg.oversample);
    m["sim.decimate"] = std::to_string(cfg.effective_decimation());
    m["sim.base_rate"] = g2hbt::fmt_double(cfg.base_rate);
    return m;
}

g2hbt::HbtRunConfig dataset_config_from_map(const g2hbt::ConfigMap& m) {
    g2hbt::HbtRunConfig cfg;
    cfg.state = g2hbt::GaussianState(std::stod(m.at("state.v_plus")),
                                     std::stod(m.at("state.v_minus")),
                                     std::stod(m.at("state.alpha")));
    cfg.n_samples = std::stoull(m.at("sim.samples"));
    cfg.n_runs = std::stoull(m.at("sim.runs"));
    cfg.seed = std::stoull(m.at("sim.seed"));
    cfg.eta = std::stod(m.at("sim.eta"));
    cfg.oversample = uint32_t(std::stoul(m.at("sim.oversample")));
    cfg.decimate_factor = uint32_t(std::stoul(m.at("sim.decimate")));
    if (m.count("sim.base_rate")) cfg.base_rate = std::stod(m.at("sim.base_rate"));
    return cfg;
}

std::vector<size_t> lag_grid(const g2hbt::HbtRunConfig& cfg, double tau_max) {
    const double step =
        g2hbt::kPi * double(cfg.effective_decimation()) / double(cfg.oversample);
    const size_t k_max = size_t(std::floor(tau_max / step + 1e-9));
    std::vector<size_t> lags(k_max + 1);
    for (size_t k = 0; k <= k_max; ++k) lags[k] = k;
    return lags;
}

// ---------------------------------------------------------------------------

int cmd_analytic(const StateFlags& sf, double omega, double tau_max, size_t tau_steps,
                 const std::string& out, const std::string& format) {
    const g2hbt::GaussianState state = sf.resolve();
    std::vector<std::string> warnings;
    g2hbt::EvalOptions eopts;
    eopts.warn = [&](const std::string& w) { warnings.push_back(w); };

    g2hbt::G2Curve curve = g2hbt::analytic_curve(state, tau_max, tau_steps, eopts);
    curve.warnings = warnings;
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

    g2hbt::ConfigMap prov;
    prov["state.v_plus"] = g2hbt::fmt_double(state.v_plus);
    prov["state.v_minus"] = g2hbt::fmt_double(state.v_minus);
    prov["state.alpha"] = g2hbt::fmt_double(state.alpha);
    prov["grid.tau_max"] = g2hbt::fmt_double(tau_max);
    prov["grid.tau_steps"] = std::to_string(tau_steps);
    prov["filter.omega"] = g2hbt::fmt_double(omega);
    write_or_print(out, format_curve(curve, prov, format, curve.points.front().g2));
    return 0;
}

int cmd_simulate(const StateFlags& sf, g2hbt::HbtRunConfig cfg, const std::string& out,
                 const std::string& format) {
    cfg.state = sf.resolve();
    cfg.validate();
    fs::create_directories(out);
    const g2hbt::ConfigMap prov = dataset_config_map(cfg);
    for (char i : {'+', '-'})
        for (char j : {'+', '-'}) {
            g2hbt::HbtRunConfig pc = cfg;
            pc.quad_b = i;
            pc.quad_c = j;
            for (uint32_t r = 0; r < pc.n_runs; ++r) {
                const auto [h1, h2] = g2hbt::acquire_run(pc, r);
                const std::string stem =
                    std::string(pair_stem(i, j)) + "_run" + std::to_string(r);
                g2hbt::write_g2ts(fs::path(out) / (stem + "_h1.g2ts"), h1);
                g2hbt::write_g2ts(fs::path(out) / (stem + "_h2.g2ts"), h2);
                if (format == "csv" || format == "both")
                    g2hbt::write_text_file(fs::path(out) / (stem + ".csv"),
                                           g2hbt::dataset_run_csv(h1, h2));
            }
        }
    g2hbt::write_text_file(fs::path(out) / "dataset.config", g2hbt::config_to_text(prov));
    std::cout << "wrote 4 pair settings x " << cfg.n_runs << " runs to " << out << "\n";
    return 0;
}

int cmd_estimate(const std::string& in, double tau_max, bool bootstrap,
                 const std::string& out, const std::string& format) {
    const g2hbt::ConfigMap prov = g2hbt::read_config_file(fs::path(in) / "dataset.config");
    const g2hbt::HbtRunConfig base = dataset_config_from_map(prov);
    const std::vector<size_t> lags = lag_grid(base, tau_max);

    g2hbt::FourPairMoments four;
    for (char i : {'+', '-'})
        for (char j : {'+', '-'}) {
            g2hbt::HbtRunConfig pc = base;
            pc.quad_b = i;
            pc.quad_c = j;
            g2hbt::MomentEstimates est;
            est.config = pc;
            est.lags = lags;
            for (uint32_t r = 0; r < pc.n_runs; ++r) {
                const std::string stem =
                    std::string(pair_stem(i, j)) + "_run" + std::to_string(r);
                const g2hbt::TimeSeries h1 = g2hbt::read_g2ts(fs::path(in) / (stem + "_h1.g2ts"));
                const g2hbt::TimeSeries h2 = g2hbt::read_g2ts(fs::path(in) / (stem + "_h2.g2ts"));
                est.runs.push_back(g2hbt::compute_run_moments(h1, h2, lags));
            }
            four.at(i, j) = std::move(est);
        }

    std::vector<std::string> warnings;
    g2hbt::EstimatorOptions opts;
    opts.bootstrap_ci = bootstrap;
    opts.warn = [&](const std::string& w) { warnings.push_back(w); };
    g2hbt::G2Curve curve = g2hbt::g2_from_moments(four, opts);
    curve.warnings = warnings;
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

    const double analytic = g2hbt::g2_zero_gaussian(base.state);
    if (out.empty() || out == "-") {
        std::cout << format_curve(curve, prov, format, analytic);
        return 0;
    }
    fs::create_directories(out);
    g2hbt::write_text_file(fs::path(out) / "g2_curve.csv", g2hbt::g2curve_csv(curve, prov));
    g2hbt::write_text_file(fs::path(out) / "summary.json",
                           g2hbt::summary_json(curve, analytic, "g2_curve.csv", prov).dump(2) +
                               "\n");
    std::cout << "g2(0) = " << curve.points.front().g2 << "  [" << curve.points.front().ci68_low
              << ", " << curve.points.front().ci68_high << "]  analytic " << analytic << "\n";
    return 0;
}

int cmd_scenario(g2hbt::ScenarioConfig sc) {
    if (sc.scenario == "fig3") {
        const g2hbt::ScenarioResult res = g2hbt::run_fig3(sc);
        for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
        for (size_t c = 0; c < res.curves.size(); ++c)
            std::printf("%s: g2(0) = %.4f [%.4f, %.4f]\n", res.curve_labels[c].c_str(),
                        res.curves[c].points.front().g2, res.curves[c].points.front().ci68_low,
                        res.curves[c].points.front().ci68_high);
        return 0;
    }
    if (sc.scenario == "fig4") {
        const g2hbt::Fig4Result res = g2hbt::run_fig4(sc);
        for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
        for (const auto& sweep : res.sweeps) {
            size_t best = sweep.points.size();
            for (size_t p = 0; p < sweep.points.size(); ++p) {
                if (std::isnan(sweep.points[p].g2)) continue;
                if (best == sweep.points.size() || sweep.points[p].g2 < sweep.points[best].g2)
                    best = p;
            }
            if (best == sweep.points.size())
                std::printf("%s: no usable sweep points\n", sweep.label.c_str());
            else
                std::printf("%s: min simulated g2(0) = %.4f at alpha = %.4f\n",
                            sweep.label.c_str(), sweep.points[best].g2,
                            sweep.points[best].alpha);
        }
        return 0;
    }
    if (sc.scenario == "superbunch") {
        const g2hbt::SuperbunchResult res = g2hbt::run_superbunch(sc);
        for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
        std::printf("superbunch: g2(0) = %.2f [%.2f, %.2f], analytic %.2f\n",
                    res.curve.points.front().g2, res.curve.points.front().ci68_low,
                    res.curve.points.front().ci68_high, res.analytic);
        return 0;
    }
    if (sc.scenario == "loss") {
        const g2hbt::LossResult res = g2hbt::run_loss(sc);
        for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
        for (const auto& pt : res.points)
            std::printf("eta = %.2f: g2(0) = %.4f [%.4f, %.4f]\n", pt.eta,
                        pt.curve.points.front().g2, pt.curve.points.front().ci68_low,
                        pt.curve.points.front().ci68_high);
        std::printf("analytic (loss-invariant): %.4f\n", res.analytic);
        return 0;
    }
    throw CLI::ValidationError("scenario", "unknown scenario '" + sc.scenario +
                                               "' (known: fig3, fig4, superbunch, loss)");
}

int cmd_oracle(const StateFlags& sf, size_t trunc, const std::string& format) {
    const g2hbt::GaussianState state = sf.resolve();
    const g2hbt::FilterSpec unit(1.0);

    const double g_general = g2hbt::g2_zero_gaussian(state);
    const double g_isserlis = g2hbt::g2_isserlis(state, unit, 0.0);

    std::optional<double> g_fock, g_pure;
    if (state.purity() <= 1.0 + 1e-9) {
        const double r = -0.5 * std::log(state.v_plus);
        g_pure = g2hbt::g2_zero_pure(r, state.alpha);
        g_fock = g2hbt::g2_fock(g2hbt::fock_displaced_squeezed(r, state.alpha, trunc));
    }

    if (format == "json") {
        ordered_json j;
        j["state"] = g2hbt::state_json(state);
        j["g2_general"] = g_general;
        j["g2_isserlis"] = g_isserlis;
        if (g_fock) j["g2_fock"] = *g_fock;
        if (g_pure) j["g2_pure"] = *g_pure;
        j["isserlis_vs_general"] = std::abs(g_isserlis - g_general);
        if (g_fock) j["fock_vs_general"] = std::abs(*g_fock - g_general);
        std::cout << j.dump(2) << "\n";
    } else {
        std::printf("state: V+ = %g, V- = %g, alpha = %g (purity %.6f)\n", state.v_plus,
                    state.v_minus, state.alpha, state.purity());
        std::printf("  closed form       g2(0) = %.12f\n", g_general);
        std::printf("  isserlis moments  g2(0) = %.12f   |diff| = %.3e\n", g_isserlis,
                    std::abs(g_isserlis - g_general));
        if (g_fock)
            std::printf("  fock (N = %zu)     g2(0) = %.12f   |diff| = %.3e\n", trunc, *g_fock,
                        std::abs(*g_fock - g_general));
    }
    return 0;
}

int cmd_verify(const std::string& grid, double perturb, const std::string& out,
               const std::string& format) {
    const auto suites = g2hbt::run_verify(grid == "fine", perturb);
    bool all_pass = true;
    ordered_json jsuites = ordered_json::array();
    for (const auto& s : suites) {
        all_pass = all_pass && s.pass;
        if (format != "json")
            std::printf("[%s] %-28s cases = %-5zu max_err = %.3e  tol = %.0e\n",
                        s.pass ? "pass" : "FAIL", s.name.c_str(), s.cases, s.max_err,
                        s.tolerance);
        jsuites.push_back({{"suite", s.name},
                           {"cases", s.cases},
                           {"max_err", s.max_err},
                           {"tolerance", s.tolerance},
                           {"pass", s.pass}});
    }
    ordered_json report;
    report["grid"] = grid;
    report["perturbation"] = perturb;
    report["suites"] = jsuites;
    report["pass"] = all_pass;
    if (format == "json") std::cout << report.dump(2) << "\n";
    if (!out.empty()) g2hbt::write_text_file(out, report.dump(2) + "\n");
    if (format != "json") std::printf("verify: %s\n", all_pass ? "PASS" : "FAIL");
    return all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"second-order coherence of Gaussian sideband states: analytic curves, "
                 "seeded split-detector simulation, moment estimator, scenario presets"};
    app.require_subcommand(1);

    // --- analytic ---
    auto* analytic = app.add_subcommand("analytic", "evaluate the closed-form g2(tau*Omega) curve");
    StateFlags an_state;
    add_state_flags(analytic, an_state);
    double an_omega = 1.0, an_tau_max = 3.0 * g2hbt::kPi;
    size_t an_steps = 96;
    std::string an_out, an_format = "csv";
    analytic->add_option("--omega", an_omega, "filter band edge (rad/s); curve abscissa is tau*Omega");
    analytic->add_option("--tau-max", an_tau_max, "grid extent in tau*Omega");
    analytic->add_option("--tau-steps", an_steps, "grid steps");
    analytic->add_option("--out", an_out, "output file ('-' = stdout)");
    analytic->add_option("--format", an_format, "csv | json")
        ->check(CLI::IsMember({"csv", "json"}));

    // --- simulate ---
    auto* simulate = app.add_subcommand("simulate", "synthesize and export the four pair datasets");
    StateFlags sim_state;
    add_state_flags(simulate, sim_state);
    g2hbt::HbtRunConfig sim_cfg;
    std::string sim_out = "dataset", sim_format = "bin";
    simulate->add_option("--samples", sim_cfg.n_samples, "post-DSP samples per run");
    simulate->add_option("--runs", sim_cfg.n_runs, "runs per pair setting");
    simulate->add_option("--seed", sim_cfg.seed, "root seed");
    simulate->add_option("--eta", sim_cfg.eta, "lumped detection efficiency in [0,1]");
    simulate->add_option("--oversample", sim_cfg.oversample, "oversampling factor M (power of two)");
    simulate->add_option("--decimate", sim_cfg.decimate_factor,
                         "decimation d in [1, M] (0 = full = M)");
    simulate->add_option("--base-rate", sim_cfg.base_rate, "post-DSP sample rate at d = M");
    simulate->add_option("--out", sim_out, "output directory");
    simulate->add_option("--format", sim_format, "bin | csv | both")
        ->check(CLI::IsMember({"bin", "csv", "both"}));

    // --- estimate ---
    auto* estimate = app.add_subcommand("estimate", "estimate g2(tau) from an exported dataset");
    std::string est_in, est_out, est_format = "csv";
    double est_tau_max = 3.0 * g2hbt::kPi;
    bool est_bootstrap = false;
    estimate->add_option("--in", est_in, "dataset directory (from simulate)")->required();
    estimate->add_option("--tau-max", est_tau_max, "lag-grid extent in tau*Omega");
    estimate->add_flag("--bootstrap", est_bootstrap, "bootstrap interval instead of run spread");
    estimate->add_option("--out", est_out, "output directory ('-' = stdout)");
    estimate->add_option("--format", est_format, "csv | json")
        ->check(CLI::IsMember({"csv", "json"}));

    // --- scenario ---
    auto* scenario = app.add_subcommand("scenario", "run a canned measurement scenario");
    g2hbt::ScenarioConfig sc;
    std::string sc_config_file;
    scenario->add_option("name", sc.scenario, "fig3 | fig4 | superbunch | loss")->required();
    scenario->add_option("--config", sc_config_file, "config file (flags override its values)");
    auto* o_samples = scenario->add_option("--samples", sc.samples, "post-DSP samples per run");
    auto* o_runs = scenario->add_option("--runs", sc.runs, "runs per pair setting");
    auto* o_seed = scenario->add_option("--seed", sc.seed, "root seed");
    auto* o_eta = scenario->add_option("--eta", sc.eta, "lumped detection efficiency");
    auto* o_over = scenario->add_option("--oversample", sc.oversample, "oversampling factor M");
    auto* o_decim = scenario->add_option("--decimate", sc.decimate_factor, "decimation in [1, M]");
    auto* o_tmax = scenario->add_option("--tau-max", sc.tau_max, "tau*Omega extent");
    auto* o_tsteps = scenario->add_option("--tau-steps", sc.tau_steps, "tau grid steps");
    auto* o_amax = scenario->add_option("--alpha-max", sc.alpha_max, "sweep extent");
    auto* o_asteps = scenario->add_option("--alpha-steps", sc.alpha_steps, "sweep steps");
    auto* o_out = scenario->add_option("--out", sc.out_dir, "output directory");
    scenario->add_option("--threads", sc.threads, "worker threads for sweep points");

    // --- oracle ---
    auto* oracle = app.add_subcommand("oracle", "cross-check g2(0) through every evaluation route");
    StateFlags or_state;
    add_state_flags(oracle, or_state);
    size_t or_trunc = 60;
    std::string or_format = "text";
    oracle->add_option("--trunc", or_trunc, "Fock-space truncation");
    oracle->add_option("--format", or_format, "text | json")
        ->check(CLI::IsMember({"text", "json"}));

    // --- verify ---
    auto* verify = app.add_subcommand("verify", "run the oracle-equivalence and identity suites");
    std::string v_grid = "coarse", v_out, v_format = "text";
    double v_perturb = 0.0;
    verify->add_option("--grid", v_grid, "coarse | fine")
        ->check(CLI::IsMember({"coarse", "fine"}));
    verify->add_option("--perturb", v_perturb,
                       "offset injected into one comparison side (sensitivity check)");
    verify->add_option("--out", v_out, "write the JSON report here");
    verify->add_option("--format", v_format, "text | json")
        ->check(CLI::IsMember({"text", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*analytic)
            return cmd_analytic(an_state, an_omega, an_tau_max, an_steps, an_out, an_format);
        if (*simulate) return cmd_simulate(sim_state, sim_cfg, sim_out, sim_format);
        if (*estimate)
            return cmd_estimate(est_in, est_tau_max, est_bootstrap, est_out, est_format);
        if (*scenario) {
            if (!sc_config_file.empty()) {
                g2hbt::ScenarioConfig from_file;
                from_file.scenario = sc.scenario;
                from_file.apply(g2hbt::read_config_file(sc_config_file));
                // flags given on the command line win over file values
                if (!o_samples->count()) sc.samples = from_file.samples;
                if (!o_runs->count()) sc.runs = from_file.runs;
                if (!o_seed->count()) sc.seed = from_file.seed;
                if (!o_eta->count()) sc.eta = from_file.eta;
                if (!o_over->count()) sc.oversample = from_file.oversample;
                if (!o_decim->count()) sc.decimate_factor = from_file.decimate_factor;
                if (!o_tmax->count()) sc.tau_max = from_file.tau_max;
                if (!o_tsteps->count()) sc.tau_steps = from_file.tau_steps;
                if (!o_amax->count()) sc.alpha_max = from_file.alpha_max;
                if (!o_asteps->count()) sc.alpha_steps = from_file.alpha_steps;
                if (!o_out->count() && !from_file.out_dir.empty()) sc.out_dir = from_file.out_dir;
                sc.state = from_file.state;
            }
            return cmd_scenario(sc);
        }
        if (*oracle) return cmd_oracle(or_state, or_trunc, or_format);
        if (*verify) return cmd_verify(v_grid, v_perturb, v_out, v_format);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const g2hbt::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
