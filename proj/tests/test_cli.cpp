#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "g2hbt/io.hpp"

// End-to-end checks of the installed command surface: exit codes, file
// outputs, provenance round trips, determinism across thread counts.

namespace fs = std::filesystem;

namespace {

const std::string cli = G2HBT_CLI_PATH;

struct RunResult {
    int exit_code = 0;
    std::string out;
};

RunResult run(const std::string& args) {
    const fs::path tmp = fs::temp_directory_path() / "g2hbt_cli_out.txt";
    const std::string cmd = cli + " " + args + " > " + tmp.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    std::ifstream f(tmp);
    std::stringstream ss;
    ss << f.rdbuf();
    return {WEXITSTATUS(rc), ss.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

} // namespace

TEST_CASE("analytic: coherent flatline to stdout") {
    const RunResult r = run("analytic --vplus 1 --vminus 1 --alpha 0.5 --tau-steps 8");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("tau_omega,g2,ci68_low,ci68_high") != std::string::npos);
    // every grid value is exactly 1
    std::istringstream lines(r.out);
    std::string line;
    size_t rows = 0;
    while (std::getline(lines, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 't') continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        CHECK(line.substr(c1 + 1, c2 - c1 - 1) == "1");
        ++rows;
    }
    CHECK(rows == 9);
}

TEST_CASE("analytic: vacuum exits 1, usage errors exit 2") {
    CHECK(run("analytic --vplus 1 --vminus 1 --alpha 0").exit_code == 1);
    CHECK(run("analytic --no-such-flag").exit_code == 2);
    CHECK(run("analytic --vplus 1 --vminus 1 --alpha 0.5 --format bogus").exit_code == 2);
    CHECK(run("nonsense-subcommand").exit_code == 2);
    // --r conflicts with --vplus
    CHECK(run("analytic --r 0.1 --vplus 0.9 --alpha 0.1").exit_code == 2);
}

TEST_CASE("analytic: --r form matches the variance form") {
    const RunResult a = run("analytic --r 0.0516 --alpha 0.257 --tau-steps 4");
    const RunResult b = run("analytic --vplus 0.9019465661281568 --vminus 1.1087131295291286 "
                            "--alpha 0.257 --tau-steps 4");
    CHECK(a.exit_code == 0);
    // numeric rows agree (provenance comments differ by construction route)
    auto rows = [](const std::string& s) {
        std::string out;
        std::istringstream in(s);
        std::string line;
        while (std::getline(in, line))
            if (!line.empty() && line[0] != '#') out += line + "\n";
        return out;
    };
    CHECK(rows(a.out) == rows(b.out));
}

TEST_CASE("oracle subcommand agrees across routes") {
    const RunResult r = run("oracle --r 0.2 --alpha 0.4 --format json");
    CHECK(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(std::abs(double(j["isserlis_vs_general"])) < 1e-10);
    CHECK(std::abs(double(j["fock_vs_general"])) < 1e-6);
}

TEST_CASE("simulate then estimate closes the loop") {
    TempDir ds("g2hbt_test_ds");
    TempDir est("g2hbt_test_est");
    const RunResult sim = run("simulate --vplus 3 --vminus 1 --alpha 0.3 --samples 20000 "
                              "--runs 4 --seed 11 --out " + ds.str());
    CHECK(sim.exit_code == 0);
    CHECK(fs::exists(ds.path / "dataset.config"));
    CHECK(fs::exists(ds.path / "pp_run0_h1.g2ts"));
    CHECK(fs::exists(ds.path / "mm_run3_h2.g2ts"));

    const RunResult er = run("estimate --in " + ds.str() + " --tau-max 6.3 --out " + est.str());
    CHECK(er.exit_code == 0);
    REQUIRE(fs::exists(est.path / "summary.json"));
    const auto j = nlohmann::json::parse(slurp(est.path / "summary.json"));
    const double g2 = j["g2_at_zero"];
    const double analytic = j["analytic_g2"];
    CHECK(analytic == doctest::Approx(2.9534616489514507).epsilon(1e-12));
    CHECK(std::abs(g2 - analytic) < 0.15);
    CHECK(j["config"]["sim.seed"] == "11");

    // curve csv has lag rows 0..2 (tau*Omega = 0, pi, 2*pi)
    const std::string csv = slurp(est.path / "g2_curve.csv");
    CHECK(csv.find("tau_omega,g2,") != std::string::npos);
}

TEST_CASE("scenario outputs are byte-identical across reruns and thread counts") {
    TempDir a("g2hbt_test_sc_a"), b("g2hbt_test_sc_b"), c("g2hbt_test_sc_c");
    const std::string args = "scenario superbunch --samples 10000 --runs 6 --seed 5 --out ";
    CHECK(run(args + a.str()).exit_code == 0);
    CHECK(run(args + b.str() + " --threads 2").exit_code == 0);
    for (const auto& entry : fs::directory_iterator(a.path)) {
        const auto name = entry.path().filename();
        CHECK(slurp(a.path / name) == slurp(b.path / name));
    }

    // and from the embedded config instead of flags
    const RunResult rc = run("scenario superbunch --config " + (a.path / "superbunch.config").string() +
                             " --out " + c.str());
    CHECK(rc.exit_code == 0);
    CHECK(slurp(a.path / "superbunch_sim.csv") == slurp(c.path / "superbunch_sim.csv"));
    CHECK(slurp(a.path / "superbunch_summary.json") == slurp(c.path / "superbunch_summary.json"));

    // a command-line flag wins over the config-file value
    TempDir d("g2hbt_test_sc_d");
    const RunResult rd = run("scenario superbunch --config " +
                             (a.path / "superbunch.config").string() + " --seed 6 --out " +
                             d.str());
    CHECK(rd.exit_code == 0);
    CHECK(slurp(a.path / "superbunch_sim.csv") != slurp(d.path / "superbunch_sim.csv"));
}

TEST_CASE("scenario: unknown name exits 2, superbunch warns") {
    CHECK(run("scenario fig99").exit_code == 2);
    TempDir d("g2hbt_test_sb");
    const RunResult r =
        run("scenario superbunch --samples 10000 --runs 6 --seed 5 --out " + d.str());
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("warning") != std::string::npos);
    CHECK(r.out.find("ill-conditioned") != std::string::npos);
    const auto j = nlohmann::json::parse(slurp(d.path / "superbunch_summary.json"));
    CHECK(j.contains("warnings"));
}

TEST_CASE("scenario loss emits widening intervals") {
    TempDir d("g2hbt_test_loss");
    const RunResult r =
        run("scenario loss --samples 20000 --runs 10 --seed 9 --out " + d.str());
    CHECK(r.exit_code == 0);
    const std::string csv = slurp(d.path / "loss_sim.csv");
    CHECK(csv.find("eta,g2,ci68_low,ci68_high,g2_analytic") != std::string::npos);
    const auto j = nlohmann::json::parse(slurp(d.path / "loss_summary.json"));
    REQUIRE(j["points"].size() == 2);
    const double hw0 = double(j["points"][0]["ci68"][1]) - double(j["points"][0]["ci68"][0]);
    const double hw1 = double(j["points"][1]["ci68"][1]) - double(j["points"][1]["ci68"][0]);
    CHECK(j["points"][0]["eta"] == 0.86);
    CHECK(j["points"][1]["eta"] == 0.43);
    CHECK(hw1 > hw0);
}

TEST_CASE("verify: clean pass, perturbation detected") {
    TempDir d("g2hbt_test_verify");
    const fs::path report = d.path / "report.json";
    CHECK(run("verify --grid coarse --out " + report.string()).exit_code == 0);
    const auto j = nlohmann::json::parse(slurp(report));
    CHECK(j["pass"] == true);
    CHECK(j["suites"].size() >= 7);

    CHECK(run("verify --grid coarse --perturb 1e-8").exit_code == 1);
    CHECK(run("verify --grid bogus").exit_code == 2);
}
