#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "../tools/cli.hpp"
#include "helmsense/numerics.hpp"

namespace fs = std::filesystem;

namespace {

std::string write_config(const std::string& name, const std::string& body) {
    const fs::path dir = fs::temp_directory_path() / "helmsense_cli_tests";
    fs::create_directories(dir);
    const fs::path path = dir / name;
    std::ofstream out(path);
    out << body;
    return path.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string outdir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "helmsense_cli_tests" / name;
    fs::remove_all(dir);
    return dir.string();
}

const char* base_config = R"({
  "problem": {
    "domain": {"kind": "interval", "a": -1.0, "b": 1.0},
    "k": 2.0,
    "gamma": 0.5,
    "preset": "tracking1d"
  },
  "perturbation": {
    "velocity": "bump1d",
    "s_grid": [0.1, 0.01, 0.001],
    "set": {"dim": 0, "point": [0.5]},
    "r_grid": [0.1, 0.05, 0.025],
    "bc": "dirichlet"
  },
  "discretization": {"h": 0.02, "levels": 3},
  "output": {"outdir": "OUTDIR"}
})";

std::string config_with_outdir(const std::string& name) {
    std::string body = base_config;
    const auto pos = body.find("OUTDIR");
    body.replace(pos, 6, outdir(name));
    return write_config(name + ".json", body);
}

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

}  // namespace

TEST_CASE("cli: missing config and malformed config exit with 2") {
    CHECK(helmsense::cli::run({"shape", "--config", "/nonexistent.json"}) == 2);
    const std::string bad = write_config("bad.json", "{ not json ");
    CHECK(helmsense::cli::run({"shape", "--config", bad}) == 2);
    CHECK(helmsense::cli::run({"frobnicate", "--config", bad}) == 2);
}

TEST_CASE("cli: increasing grid is rejected as a config error") {
    std::string body = base_config;
    const auto pos = body.find("[0.1, 0.05, 0.025]");
    body.replace(pos, 18, "[0.025, 0.05, 0.1]");
    const auto pos2 = body.find("OUTDIR");
    body.replace(pos2, 6, outdir("grid_fail"));
    const std::string path = write_config("increasing.json", body);
    CHECK(helmsense::cli::run({"topo-source", "--config", path}) == 2);
}

TEST_CASE("cli: resonant wavenumber exits with 3") {
    std::string body = base_config;
    const auto pos = body.find("\"k\": 2.0");
    body.replace(pos, 8, "\"k\": 1.5707963267948966");
    const auto pos2 = body.find("OUTDIR");
    body.replace(pos2, 6, outdir("resonant"));
    const std::string path = write_config("resonant.json", body);
    CHECK(helmsense::cli::run({"direct", "--config", path}) == 3);
}

TEST_CASE("cli: shape run writes csv and summary") {
    const std::string cfg = config_with_outdir("shape_run");
    const std::string dir = outdir("shape_run");
    REQUIRE(helmsense::cli::run({"shape", "--config", cfg}) == 0);
    const std::string csv = slurp(dir + "/shape.csv");
    CHECK(count_lines(csv) == 4);  // header + one row per s
    CHECK(csv.rfind("s,fd_quotient,abs_error,remainder,state_delta_h1", 0) == 0);
    const std::string summary = slurp(dir + "/summary.txt");
    CHECK(summary.find("dJ: ") != std::string::npos);
    CHECK(summary.find("verdict_fd_slope: pass") != std::string::npos);
    CHECK(summary.find("seed: ") != std::string::npos);
}

TEST_CASE("cli: shape with the zero velocity reports dJ = 0") {
    std::string body = base_config;
    auto pos = body.find("\"bump1d\"");
    body.replace(pos, 8, "\"zero\"");
    pos = body.find("OUTDIR");
    body.replace(pos, 6, outdir("shape_zero"));
    const std::string cfg = write_config("shape_zero.json", body);
    REQUIRE(helmsense::cli::run({"shape", "--config", cfg}) == 0);
    // dJ printed as exactly zero.
    const std::string summary = slurp(
        (fs::temp_directory_path() / "helmsense_cli_tests" / "shape_zero" / "summary.txt")
            .string());
    CHECK(summary.find("dJ: 0\n") != std::string::npos);
}

TEST_CASE("cli: topo-source with gamma = 1 reports a zero derivative") {
    std::string body = base_config;
    auto pos = body.find("\"gamma\": 0.5");
    body.replace(pos, 12, "\"gamma\": 1.0");
    pos = body.find("OUTDIR");
    body.replace(pos, 6, outdir("topo_gamma1"));
    const std::string cfg = write_config("topo_gamma1.json", body);
    REQUIRE(helmsense::cli::run({"topo-source", "--config", cfg}) == 0);
    const std::string summary =
        slurp((fs::temp_directory_path() / "helmsense_cli_tests" / "topo_gamma1" /
               "summary.txt")
                  .string());
    CHECK(summary.find("D_T_J: 0\n") != std::string::npos);
    CHECK(summary.find("verdict_corrector: bounded") != std::string::npos);
}

TEST_CASE("cli: oracle1d emits the series with a zero l1 column") {
    const std::string cfg = config_with_outdir("oracle_run");
    const std::string dir = outdir("oracle_run");
    REQUIRE(helmsense::cli::run({"oracle1d", "--config", cfg}) == 0);
    const std::string csv = slurp(dir + "/oracle1d.csv");
    CHECK(csv.rfind("r,l0,l1,R", 0) == 0);
    CHECK(count_lines(csv) == 4);
    // Every l1 entry is exactly zero.
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    while (std::getline(lines, line)) {
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        const auto c3 = line.find(',', c2 + 1);
        const double l1 = std::stod(line.substr(c2 + 1, c3 - c2 - 1));
        CHECK(std::abs(l1) <= 1e-10);
    }
    const std::string summary = slurp(dir + "/summary.txt");
    CHECK(summary.find("series_diverges: false") != std::string::npos);
}

TEST_CASE("cli: identical config produces byte-identical output") {
    const std::string cfg = config_with_outdir("determinism");
    const std::string dir = outdir("determinism");
    REQUIRE(helmsense::cli::run({"topo-hole", "--config", cfg}) == 0);
    const std::string first_csv = slurp(dir + "/topo-hole.csv");
    const std::string first_summary = slurp(dir + "/summary.txt");
    REQUIRE(helmsense::cli::run({"topo-hole", "--config", cfg}) == 0);
    CHECK(slurp(dir + "/topo-hole.csv") == first_csv);
    CHECK(slurp(dir + "/summary.txt") == first_summary);
    CHECK(count_lines(first_csv) == 4);
}

TEST_CASE("HELMSENSE_THREADS caps the worker count") {
    setenv("HELMSENSE_THREADS", "1", 1);
    CHECK(helmsense::worker_count() == 1);
    unsetenv("HELMSENSE_THREADS");
    CHECK(helmsense::worker_count() >= 1);
}

TEST_CASE("cli: convergence subcommand reports the P1 slopes") {
    const std::string cfg = config_with_outdir("conv_run");
    const std::string dir = outdir("conv_run");
    REQUIRE(helmsense::cli::run({"convergence", "--config", cfg, "--h", "0.125"}) == 0);
    const std::string summary = slurp(dir + "/summary.txt");
    CHECK(summary.find("eta_l2_slope: ") != std::string::npos);
    const std::string csv = slurp(dir + "/convergence.csv");
    CHECK(count_lines(csv) == 4);  // header + 3 levels
}
