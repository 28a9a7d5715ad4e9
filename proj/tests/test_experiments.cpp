#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ergodyn/experiments.hpp"

using namespace ergodyn;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "ergodyn_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace

TEST_CASE("config digest is stable and content sensitive") {
    json a{{"map", "f1"}, {"N", 64}};
    json b{{"map", "f1"}, {"N", 65}};
    CHECK(config_digest(a) == config_digest(a));
    CHECK(config_digest(a) != config_digest(b));
    CHECK(config_digest(a).size() == 16);
}

TEST_CASE("atomic writes create parent directories") {
    fs::path dir = fresh_dir("atomic");
    fs::path target = dir / "a" / "b" / "x.txt";
    write_file_atomic(target, "payload");
    CHECK(slurp(target) == "payload");
    CHECK_FALSE(fs::exists(dir / "a" / "b" / "x.txt.tmp"));
}

TEST_CASE("measure-orbit on the 5-grid anosov map") {
    fs::path dir = fresh_dir("orbit");
    RunContext ctx{json{{"map", "anosov"}, {"N", 5}, {"start", json::array({0.2, 0.0})},
                        {"write_measures", true}},
                   dir};
    CHECK(cmd_measure_orbit(ctx) == kOk);
    CHECK(fs::exists(dir / "measure-orbit" / "config.json"));
    CHECK(fs::exists(dir / "measure-orbit" / "anosov_N5.ppm"));
    CHECK(fs::exists(dir / "measure-orbit" / "anosov_N5_measure.csv"));
    std::string csv = slurp(dir / "measure-orbit" / "anosov_orbits.csv");
    CHECK(csv.rfind("# config=", 0) == 0);
    CHECK(csv.find("N,start_x,start_y,tail_length,cycle_length,distance_to_leb,status") !=
          std::string::npos);
    // (0.2, 0) projects to (1, 0), which sits on a 10-cycle.
    CHECK(csv.find(",0,0,10,") != std::string::npos);
    CHECK(csv.find(",ok\n") != std::string::npos);
}

TEST_CASE("measure-orbit records budget failures and keeps scanning") {
    fs::path dir = fresh_dir("orbit_budget");
    RunContext ctx{json{{"map", "f1"}, {"N", json::array({64, 65})}, {"budget_steps", 2}}, dir};
    CHECK(cmd_measure_orbit(ctx) == kBudgetError);
    std::string csv = slurp(dir / "measure-orbit" / "f1_orbits.csv");
    CHECK(csv.find("error: floyd_orbit step budget exceeded") != std::string::npos);
    // Both rows are present despite the failures.
    CHECK(csv.find("\n64,") != std::string::npos);
    CHECK(csv.find("\n65,") != std::string::npos);
}

TEST_CASE("measure-orbit scans N ranges and random starts deterministically") {
    fs::path dir_a = fresh_dir("orbit_scan_a");
    fs::path dir_b = fresh_dir("orbit_scan_b");
    json cfg{{"map", "g1"},
             {"N", json{{"start", 40}, {"stop", 44}, {"step", 2}}},
             {"start", json{{"random", json{{"seed", 9}, {"count", 2}}}}}};
    CHECK(cmd_measure_orbit(RunContext{cfg, dir_a}) == kOk);
    CHECK(cmd_measure_orbit(RunContext{cfg, dir_b}) == kOk);
    std::string a = slurp(dir_a / "measure-orbit" / "g1_orbits.csv");
    CHECK(a == slurp(dir_b / "measure-orbit" / "g1_orbits.csv"));
    // 3 orders x 2 starts = 6 data rows.
    int rows = 0;
    std::istringstream in(a);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#' && line[0] != 'N') ++rows;
    CHECK(rows == 6);
    CHECK(fs::exists(dir_a / "measure-orbit" / "g1_N40_s9.ppm"));
    CHECK(fs::exists(dir_a / "measure-orbit" / "g1_N40_s10.ppm"));
}

TEST_CASE("measure-global on the 5-grid anosov map") {
    fs::path dir = fresh_dir("global");
    RunContext ctx{json{{"map", "anosov"}, {"N", 5}}, dir};
    CHECK(cmd_measure_global(ctx) == kOk);
    std::string csv = slurp(dir / "measure-global" / "anosov_global.csv");
    // A permutation of the 25 grid points: recurrence degree 1 and the
    // global measure is exactly Leb_5.
    CHECK(csv.find(",25,1,") != std::string::npos);
    CHECK(csv.find(",ok\n") != std::string::npos);
    CHECK(fs::exists(dir / "measure-global" / "anosov_N5_cycles.csv"));
    CHECK(fs::exists(dir / "measure-global" / "anosov_N5.ppm"));
    std::string cycles = slurp(dir / "measure-global" / "anosov_N5_cycles.csv");
    CHECK(cycles.find("cycle_id,cycle_length,basin_size,basin_fraction,representative_index") !=
          std::string::npos);
}

TEST_CASE("measure-global reports budget exhaustion") {
    fs::path dir = fresh_dir("global_budget");
    RunContext ctx{json{{"map", "f1"}, {"N", 512}, {"budget_bytes", 1024}}, dir};
    CHECK(cmd_measure_global(ctx) == kBudgetError);
    std::string csv = slurp(dir / "measure-global" / "f1_global.csv");
    CHECK(csv.find("error:") != std::string::npos);
}

TEST_CASE("linear-rate with the exact half-density sequence") {
    fs::path dir = fresh_dir("rate");
    json seq{{"dimension", 2},
             {"matrices", json::array({json::array({json::array({0.5, 0.0}),
                                                    json::array({0.0, 2.0})})})}};
    RunContext ctx{json{{"sequence", seq}, {"R", 100}, {"compare_mc_samples", 20000},
                        {"tolerance", 0.05}, {"seed", 3}},
                   dir};
    CHECK(cmd_linear_rate(ctx) == kOk);
    std::string csv = slurp(dir / "linear-rate" / "rate.csv");
    CHECK(csv.find("method,k,tau_estimate,radius_or_samples,convergence_gap,agreement") !=
          std::string::npos);
    CHECK(csv.find("brute_force,1,0.502487562189") != std::string::npos);
    CHECK(csv.find("monte_carlo,1,") != std::string::npos);
    CHECK(csv.find("PASS") != std::string::npos);
    CHECK(csv.find("FAIL") == std::string::npos);
}

TEST_CASE("linear-meanrate on the identity is exact") {
    fs::path dir = fresh_dir("meanrate");
    json seq{{"dimension", 2},
             {"matrices", json::array({json::array({json::array({1.0, 0.0}),
                                                    json::array({0.0, 1.0})})})}};
    RunContext ctx{json{{"sequence", seq}, {"samples", 10000}, {"seed", 5}}, dir};
    CHECK(cmd_linear_meanrate(ctx) == kOk);
    std::string csv = slurp(dir / "linear-meanrate" / "meanrate.csv");
    CHECK(csv.find("# rng=mt19937_64 seed=5") != std::string::npos);
    CHECK(csv.find("monte_carlo,1,1,") != std::string::npos);
}

TEST_CASE("linear-preimage lists preimages by descending sup norm") {
    fs::path dir = fresh_dir("preimage");
    json seq{{"dimension", 2},
             {"matrices", json::array({json::array({json::array({0.5, 0.0}),
                                                    json::array({0.0, 2.0})})})}};
    RunContext ctx{json{{"sequence", seq}, {"target", json::array({0, 0})}, {"R", 3}}, dir};
    CHECK(cmd_linear_preimage(ctx) == kOk);
    std::string csv = slurp(dir / "linear-preimage" / "preimages.csv");
    std::size_t first = csv.find("1,0,1\n");
    std::size_t second = csv.find("0,0,0\n");
    REQUIRE(first != std::string::npos);
    REQUIRE(second != std::string::npos);
    CHECK(first < second);
}

TEST_CASE("linear-decay emits one row per trial and prefix length") {
    fs::path dir = fresh_dir("decay");
    RunContext ctx{json{{"n", 2}, {"k_max", 3}, {"trials", 2}, {"seed", 7}, {"S", 40},
                        {"norm_bound", 5.0}},
                   dir};
    CHECK(cmd_linear_decay(ctx) == kOk);
    std::string csv = slurp(dir / "linear-decay" / "decay.csv");
    CHECK(csv.find("trial,seed,k,tau_estimate,radius,convergence_gap") != std::string::npos);
    int rows = 0;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#' && line[0] != 't') ++rows;
    CHECK(rows == 6);
}

TEST_CASE("render re-rasterizes a stored measure CSV") {
    fs::path dir = fresh_dir("render");
    RunContext orbit_ctx{json{{"map", "anosov"}, {"N", 5}, {"start", json::array({0.2, 0.0})},
                              {"write_measures", true}},
                         dir};
    REQUIRE(cmd_measure_orbit(orbit_ctx) == kOk);
    fs::path input = dir / "measure-orbit" / "anosov_N5_measure.csv";
    RunContext ctx{json{{"input", input.string()}, {"N", 5},
                        {"raster", json{{"width", 16}, {"height", 16}}}},
                   dir};
    CHECK(cmd_render(ctx) == kOk);
    CHECK(fs::exists(dir / "render" / "anosov_N5_measure.ppm"));
    std::string values = slurp(dir / "render" / "anosov_N5_measure_values.csv");
    CHECK(values.find("row,col,log10_mass") != std::string::npos);
    // 10 cycle atoms on distinct 16x16 pixels, each with mass 1/10.
    int rows = 0;
    std::istringstream in(values);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#' && line[0] != 'r') ++rows;
    CHECK(rows == 10);
    CHECK(values.find("-1\n") != std::string::npos);

    RunContext missing{json{{"input", (dir / "nope.csv").string()}, {"N", 5}}, dir};
    CHECK_THROWS_AS(cmd_render(missing), std::invalid_argument);
}
