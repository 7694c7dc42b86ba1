// End-to-end tests for the qse command-line tool: exit codes, file formats,
// determinism across reruns, and agreement between the JSON summaries and the
// library functions they are derived from.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qse/approx.hpp"
#include "qse/oracle.hpp"
#include "qse/spectrum.hpp"

#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = QSE_CLI_PATH;

int run_cli(const std::string& args) {
    const int status = std::system((kCli + " " + args).c_str());
    REQUIRE(status >= 0);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("qse_cli_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing file: " << path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

json load_json(const fs::path& path) { return json::parse(slurp(path)); }

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        lines.push_back(line);
    }
    return lines;
}

std::vector<double> parse_csv_row(const std::string& line) {
    std::vector<double> row;
    std::istringstream in(line);
    std::string field;
    while (std::getline(in, field, ',')) {
        row.push_back(std::stod(field));
    }
    return row;
}

} // namespace

TEST_CASE("reruns with the same seed produce byte-identical outputs") {
    const fs::path a = fresh_dir("rerun_a");
    const fs::path b = fresh_dir("rerun_b");
    const std::string flags =
        "sample-rpse --spins 3 --samples 3000 --seed 7 --pop-hist 1 5 "
        "--write-samples --out-dir ";
    REQUIRE(run_cli(flags + a.string() + " > /dev/null") == 0);
    REQUIRE(run_cli(flags + b.string() + " > /dev/null") == 0);
    for (const char* name : {"summary.json", "entropy_hist.csv",
                             "entropy_per_spin_hist.csv", "pop_1_hist.csv",
                             "pop_5_hist.csv", "samples.csv"}) {
        CHECK_MESSAGE(slurp(a / name) == slurp(b / name), name);
    }
}

TEST_CASE("multi-chain runs are deterministic and split the sample budget") {
    const fs::path a = fresh_dir("chains_a");
    const fs::path b = fresh_dir("chains_b");
    const std::string flags =
        "sample-feee --spins 3 --eps 0.3 --samples 4001 --chains 2 --seed 11 "
        "--burn-in 2000 --thinning 5 --write-samples --out-dir ";
    REQUIRE(run_cli(flags + a.string() + " > /dev/null") == 0);
    REQUIRE(run_cli(flags + b.string() + " > /dev/null") == 0);
    CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
    CHECK(slurp(a / "samples.csv") == slurp(b / "samples.csv"));

    const json summary = load_json(a / "summary.json");
    const auto& per_chain = summary["measured"]["per_chain"];
    REQUIRE(per_chain.size() == 2);
    // The odd sample goes to the first chain.
    CHECK(per_chain[0]["kept"].get<std::uint64_t>() == 2001);
    CHECK(per_chain[1]["kept"].get<std::uint64_t>() == 2000);
    CHECK(summary["measured"]["entropy"]["count"].get<std::uint64_t>() == 4001);
    CHECK(lines_of(slurp(a / "samples.csv")).size() == 4001);
}

TEST_CASE("exit codes distinguish usage errors, domain errors, and success") {
    CHECK(run_cli("--help > /dev/null") == 0);
    CHECK(run_cli("--version > /dev/null") == 0);
    // No subcommand.
    CHECK(run_cli("> /dev/null 2>&1") == 1);
    // Unknown flag.
    CHECK(run_cli("sample-rpse --bogus 3 2> /dev/null") == 1);
    // Neither --dim nor --spins.
    CHECK(run_cli("sample-rpse --samples 10 2> /dev/null") == 1);
    // Both --dim and --spins.
    CHECK(run_cli("sample-rpse --dim 4 --spins 2 --samples 10 2> /dev/null") == 1);
    // Missing energy.
    CHECK(run_cli("sample-feee --spins 2 --samples 10 2> /dev/null") == 1);
    // Energy at/above the top of the spectrum (e_max = 2).
    CHECK(run_cli("sample-feee --spins 2 --energy 2.0 --samples 10 2> /dev/null") == 1);
    // Energy and eps are mutually exclusive.
    CHECK(run_cli("sample-feee --spins 2 --eps 0.25 --energy 0.5 --samples 10 "
                  "2> /dev/null") == 1);
    // IO failure surfaces as a domain error.
    CHECK(run_cli("spectrum --spectrum-file /nonexistent/qse_levels.txt "
                  "2> /dev/null") == 2);
    CHECK(run_cli("approx --spins 3 --eps 0.2 > /dev/null") == 0);
}

TEST_CASE("spectrum files round-trip exactly") {
    const fs::path dir = fresh_dir("spectrum_roundtrip");
    const fs::path levels = dir / "levels.txt";
    REQUIRE(run_cli("spectrum --spins 2 --freq 1 1.5 --out " + levels.string() +
                    " > " + (dir / "first.json").string()) == 0);
    REQUIRE(run_cli("spectrum --spectrum-file " + levels.string() + " > " +
                    (dir / "second.json").string()) == 0);

    const json first = load_json(dir / "first.json");
    const json second = load_json(dir / "second.json");
    CHECK(first["spectrum"]["dim"] == second["spectrum"]["dim"]);
    // Levels are written with enough digits that the round trip is bit exact.
    CHECK(first["levels"] == second["levels"]);
    CHECK(first["spectrum"]["constants"] == second["spectrum"]["constants"]);
    // Explicit level files carry no spin structure.
    CHECK(second["spectrum"]["n_spins"].is_null());
}

TEST_CASE("nonzero ground levels are shifted by default and rejected with --no-shift-origin") {
    const fs::path dir = fresh_dir("origin_policy");
    const fs::path shifted = dir / "shifted.txt";
    {
        std::ofstream out(shifted);
        out << "1.0\n2.0\n4.0\n";
    }
    const fs::path out_json = dir / "spectrum.json";
    REQUIRE(run_cli("spectrum --spectrum-file " + shifted.string() + " > " +
                    out_json.string() + " 2> /dev/null") == 0);
    const json j = load_json(out_json);
    CHECK(j["spectrum"]["shifted"].get<bool>());
    REQUIRE(j["levels"].size() == 3);
    CHECK(j["levels"][0].get<double>() == 0.0);
    CHECK(j["levels"][2].get<double>() == 3.0);

    CHECK(run_cli("spectrum --no-shift-origin --spectrum-file " + shifted.string() +
                  " > /dev/null 2> /dev/null") == 2);
}

TEST_CASE("sample and histogram files have the documented layout") {
    const fs::path dir = fresh_dir("formats");
    REQUIRE(run_cli("sample-rpse --dim 4 --samples 100 --seed 1 --bins 12 "
                    "--pop-hist 2 --write-samples --out-dir " +
                    dir.string() + " > /dev/null") == 0);

    const auto samples = lines_of(slurp(dir / "samples.csv"));
    REQUIRE(samples.size() == 100);
    for (const auto& line : samples) {
        const auto row = parse_csv_row(line);
        REQUIRE(row.size() == 4);
        double sum = 0.0;
        for (double p : row) {
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
            sum += p;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }

    const auto hist = lines_of(slurp(dir / "entropy_hist.csv"));
    REQUIRE(hist.size() == 13);
    CHECK(hist[0] == "bin_lo,bin_hi,count,density");
    std::uint64_t total = 0;
    for (std::size_t i = 1; i < hist.size(); ++i) {
        const auto row = parse_csv_row(hist[i]);
        REQUIRE(row.size() == 4);
        CHECK(row[0] < row[1]);
        total += static_cast<std::uint64_t>(row[2]);
    }
    CHECK(total <= 100);
    CHECK(fs::exists(dir / "pop_2_hist.csv"));
    // Per-spin output only exists when the dimension comes from a spin count.
    CHECK(!fs::exists(dir / "entropy_per_spin_hist.csv"));
}

TEST_CASE("summary predictions agree with the library") {
    const fs::path dir = fresh_dir("summary_checks");
    REQUIRE(run_cli("sample-feee --spins 2 --eps 0.25 --samples 2000 --seed 3 "
                    "--burn-in 2000 --out-dir " +
                    dir.string() + " > /dev/null") == 0);
    const json j = load_json(dir / "summary.json");
    CHECK(j["schema_version"].get<int>() == 1);
    CHECK(j["command"] == "sample-feee");

    const auto spectrum =
        qse::build_spin_spectrum(2, std::vector<double>{1.0, 1.0});
    const double energy = 0.25 * 2; // eps is energy per spin
    CHECK(j["config"]["energy"].get<double>() ==
          doctest::Approx(energy).epsilon(1e-15));
    CHECK(j["config"]["energy_per_spin"].get<double>() ==
          doctest::Approx(0.25).epsilon(1e-15));

    const auto mult = qse::solve_lagrange(spectrum, energy);
    CHECK(j["predicted"]["lagrange"]["lambda"].get<double>() ==
          doctest::Approx(mult.lambda).epsilon(1e-13));
    CHECK(j["predicted"]["lagrange"]["mu"].get<double>() ==
          doctest::Approx(mult.mu).epsilon(1e-13));
    CHECK(j["predicted"]["mean_entropy_approx_i"].get<double>() ==
          doctest::Approx(qse::mean_entropy_feee_i(spectrum, energy))
              .epsilon(1e-13));
    CHECK(j["predicted"]["mean_entropy_uniform_exact"].get<double>() ==
          doctest::Approx(qse::rpse_exact_mean_entropy(4)).epsilon(1e-13));

    CHECK(j["measured"]["entropy"]["count"].get<std::uint64_t>() == 2000);
    const double acceptance = j["measured"]["acceptance_rate"].get<double>();
    CHECK(acceptance > 0.0);
    CHECK(acceptance <= 1.0);
}

TEST_CASE("config files supply defaults and command-line flags win") {
    const fs::path dir = fresh_dir("config_file");
    const fs::path cfg = dir / "run.ini";
    {
        std::ofstream out(cfg);
        out << "[sample-rpse]\nspins=3\nsamples=1000\nseed=5\n";
    }
    const fs::path out_a = dir / "a";
    REQUIRE(run_cli("--config " + cfg.string() + " sample-rpse --out-dir " +
                    out_a.string() + " > /dev/null") == 0);
    const json a = load_json(out_a / "summary.json");
    CHECK(a["config"]["dim"].get<std::size_t>() == 8);
    CHECK(a["config"]["samples"].get<std::uint64_t>() == 1000);
    CHECK(a["config"]["seed"].get<std::uint64_t>() == 5);

    const fs::path out_b = dir / "b";
    REQUIRE(run_cli("--config " + cfg.string() + " sample-rpse --seed 9 --out-dir " +
                    out_b.string() + " > /dev/null") == 0);
    const json b = load_json(out_b / "summary.json");
    CHECK(b["config"]["seed"].get<std::uint64_t>() == 9);
}

TEST_CASE("validation self-checks pass at both levels") {
    CHECK(run_cli("validate --level quick > /dev/null") == 0);
    CHECK(run_cli("validate --level full > /dev/null") == 0);
}
