#include "ergodyn/experiments.hpp"

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ergodyn/errors.hpp"
#include "ergodyn/grid.hpp"
#include "ergodyn/linear_rates.hpp"
#include "ergodyn/measure.hpp"
#include "ergodyn/orbit.hpp"
#include "ergodyn/raster.hpp"
#include "ergodyn/torus_map.hpp"

namespace ergodyn {

namespace fs = std::filesystem;
using nlohmann::json;

std::string config_digest(const json& config) {
    // FNV-1a over the canonical dump.
    std::string dump = config.dump();
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        out << content;
        if (!out) throw std::runtime_error("failed to write " + tmp.string());
    }
    fs::rename(tmp, path);
}

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct ScanStatus {
    int total = 0;
    int failed = 0;
    int budget_failed = 0;

    int exit_code() const {
        if (failed == 0) return kOk;
        if (failed == total && budget_failed == failed) return kBudgetError;
        return kPartialFailure;
    }
};

std::vector<std::uint32_t> parse_orders(const json& n_field) {
    std::vector<std::uint32_t> orders;
    if (n_field.is_number_unsigned() || n_field.is_number_integer()) {
        orders.push_back(n_field.get<std::uint32_t>());
    } else if (n_field.is_array()) {
        for (const auto& v : n_field) orders.push_back(v.get<std::uint32_t>());
    } else if (n_field.is_object()) {
        auto start = n_field.at("start").get<std::uint32_t>();
        auto stop = n_field.at("stop").get<std::uint32_t>();
        auto step = n_field.value("step", 1u);
        if (stop < start || step == 0) throw std::invalid_argument("bad N range");
        for (std::uint32_t N = start; N <= stop; N += step) orders.push_back(N);
    } else {
        throw std::invalid_argument("N must be a number, list, or range object");
    }
    if (orders.empty()) throw std::invalid_argument("empty N list");
    return orders;
}

struct StartSpec {
    TorusPoint point;
    std::optional<std::uint64_t> seed;  // set when drawn at random
};

std::vector<StartSpec> parse_starts(const json& cfg) {
    std::vector<StartSpec> starts;
    if (!cfg.contains("start")) {
        starts.push_back({TorusPoint(0.5, 0.5), std::nullopt});
        return starts;
    }
    const json& s = cfg.at("start");
    if (s.is_array() && !s.empty() && s[0].is_number()) {
        starts.push_back({TorusPoint(s.get<std::vector<double>>()), std::nullopt});
    } else if (s.is_object() && s.contains("random")) {
        const json& r = s.at("random");
        auto seed = r.at("seed").get<std::uint64_t>();
        auto count = r.value("count", 1);
        std::mt19937_64 rng(seed);
        auto uniform01 = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
        for (int i = 0; i < count; ++i) {
            double x = uniform01(), y = uniform01();
            starts.push_back({TorusPoint(x, y), seed + static_cast<std::uint64_t>(i)});
        }
    } else {
        throw std::invalid_argument("start must be a coordinate list or {\"random\":{...}}");
    }
    return starts;
}

RasterSpec parse_raster(const json& cfg) {
    RasterSpec spec;
    if (cfg.contains("raster")) {
        const json& r = cfg.at("raster");
        spec.width = r.value("width", 128);
        spec.height = r.value("height", 128);
        spec.floor_decades = r.value("floor_decades", 6.0);
    }
    return spec;
}

std::string map_label(const json& cfg) {
    const json& m = cfg.at("map");
    if (m.is_string()) return m.get<std::string>();
    return "custom";
}

std::string run_stem(const std::string& map_name, std::uint32_t N,
                     std::optional<std::uint64_t> seed) {
    std::string stem = map_name + "_N" + std::to_string(N);
    if (seed) stem += "_s" + std::to_string(*seed);
    return stem;
}

MatrixSequence parse_sequence(const json& cfg) {
    if (cfg.contains("sequence")) return sequence_from_json(cfg.at("sequence"));
    if (cfg.contains("random_sequence")) {
        const json& r = cfg.at("random_sequence");
        return random_sl_sequence(r.value("n", 2), r.at("k").get<int>(),
                                  r.value("norm_bound", 5.0), r.at("seed").get<std::uint64_t>());
    }
    throw std::invalid_argument("config needs \"sequence\" or \"random_sequence\"");
}

void echo_config(const RunContext& ctx, const std::string& experiment) {
    write_file_atomic(ctx.out_dir / experiment / "config.json", ctx.config.dump(2) + "\n");
}

}  // namespace

int cmd_measure_orbit(const RunContext& ctx) {
    const json& cfg = ctx.config;
    const std::string experiment = "measure-orbit";
    echo_config(ctx, experiment);
    const std::string digest = config_digest(cfg);
    TorusMapExpr map = resolve_map(cfg.at("map"));
    std::string name = map_label(cfg);
    auto orders = parse_orders(cfg.at("N"));
    auto starts = parse_starts(cfg);
    int K = cfg.value("K", 7);
    auto step_budget = cfg.value("budget_steps", kDefaultStepBudget);
    RasterSpec raster = parse_raster(cfg);
    bool write_measures = cfg.value("write_measures", false);

    ScanStatus status;
    std::ostringstream csv;
    csv << "# config=" << digest << "\n";
    csv << "N,start_x,start_y,tail_length,cycle_length,distance_to_leb,status\n";
    for (std::uint32_t N : orders) {
        GridSpec grid(map.dim, N);
        DiscretizedMap disc = discretize(map, grid);
        for (const auto& start : starts) {
            ++status.total;
            csv << N << "," << fmt_double(start.point.c[0]) << ","
                << fmt_double(start.point.c[1]) << ",";
            try {
                GridIndex s0 = grid_project(grid, start.point);
                OrbitResult orbit = floyd_orbit(disc, s0, step_budget);
                DiscreteMeasure mu = orbit_measure(orbit, grid);
                double dist = distance_to_lebesgue(mu, K);
                csv << orbit.tail_length << "," << orbit.cycle_length << "," << fmt_double(dist)
                    << ",ok\n";

                std::string stem = run_stem(name, N, start.seed);
                std::ostringstream ppm;
                write_ppm(ppm, colorize(rasterize(mu, raster), raster), "config=" + digest);
                write_file_atomic(ctx.out_dir / experiment / (stem + ".ppm"), ppm.str());
                if (write_measures) {
                    std::ostringstream mcsv;
                    mcsv << "# config=" << digest << "\n";
                    write_measure_csv(mcsv, mu);
                    write_file_atomic(ctx.out_dir / experiment / (stem + "_measure.csv"),
                                      mcsv.str());
                }
            } catch (const budget_error& e) {
                ++status.failed;
                ++status.budget_failed;
                csv << ",,," << "error: " << e.what() << "\n";
            } catch (const capacity_error& e) {
                ++status.failed;
                ++status.budget_failed;
                csv << ",,," << "error: " << e.what() << "\n";
            }
        }
    }
    write_file_atomic(ctx.out_dir / experiment / (name + "_orbits.csv"), csv.str());
    return status.exit_code();
}

int cmd_measure_global(const RunContext& ctx) {
    const json& cfg = ctx.config;
    const std::string experiment = "measure-global";
    echo_config(ctx, experiment);
    const std::string digest = config_digest(cfg);
    TorusMapExpr map = resolve_map(cfg.at("map"));
    std::string name = map_label(cfg);
    auto orders = parse_orders(cfg.at("N"));
    int K = cfg.value("K", 7);
    auto budget_bytes = cfg.value("budget_bytes", kDefaultMemoryBudget);
    RasterSpec raster = parse_raster(cfg);
    bool write_measures = cfg.value("write_measures", false);

    ScanStatus status;
    std::ostringstream csv;
    csv << "# config=" << digest << "\n";
    csv << "N,cycle_count,periodic_points,recurrence_degree,distance_to_leb,status\n";
    for (std::uint32_t N : orders) {
        ++status.total;
        csv << N << ",";
        try {
            GridSpec grid(map.dim, N);
            DiscretizedMap disc = discretize(map, grid);
            GridAnalysis analysis = analyze_full_grid(disc, budget_bytes);
            DiscreteMeasure mu = global_measure(analysis);
            Rational degree = recurrence_degree(analysis);
            double dist = distance_to_lebesgue(mu, K);
            csv << analysis.cycles.size() << "," << analysis.periodic_points() << ","
                << fmt_double(degree.value()) << "," << fmt_double(dist) << ",ok\n";

            std::string stem = run_stem(name, N, std::nullopt);
            std::ostringstream cycles_csv;
            cycles_csv << "# config=" << digest << "\n";
            write_analysis_csv(cycles_csv, analysis);
            write_file_atomic(ctx.out_dir / experiment / (stem + "_cycles.csv"),
                              cycles_csv.str());
            std::ostringstream ppm;
            write_ppm(ppm, colorize(rasterize(mu, raster), raster), "config=" + digest);
            write_file_atomic(ctx.out_dir / experiment / (stem + ".ppm"), ppm.str());
            if (write_measures) {
                std::ostringstream mcsv;
                mcsv << "# config=" << digest << "\n";
                write_measure_csv(mcsv, mu);
                write_file_atomic(ctx.out_dir / experiment / (stem + "_measure.csv"), mcsv.str());
            }
        } catch (const capacity_error& e) {
            ++status.failed;
            ++status.budget_failed;
            csv << ",,,," << "error: " << e.what() << "\n";
        }
    }
    write_file_atomic(ctx.out_dir / experiment / (name + "_global.csv"), csv.str());
    return status.exit_code();
}

int cmd_linear_rate(const RunContext& ctx) {
    const json& cfg = ctx.config;
    const std::string experiment = "linear-rate";
    echo_config(ctx, experiment);
    const std::string digest = config_digest(cfg);
    MatrixSequence seq = parse_sequence(cfg);
    auto R = cfg.value("R", 500ll);

    std::ostringstream csv;
    csv << "# config=" << digest << "\n";
    csv << "method,k,tau_estimate,radius_or_samples,convergence_gap,agreement\n";
    try {
        RateEstimate brute = rate_brute_force(seq, R);
        csv << "brute_force," << seq.k() << "," << fmt_double(brute.value) << ","
            << fmt_double(brute.radius_or_samples) << "," << fmt_double(brute.convergence_gap)
            << ",";
        if (cfg.value("compare_mc_samples", 0ull) > 0) {
            RateEstimate mc = mean_rate_mc(seq, cfg["compare_mc_samples"].get<std::uint64_t>(),
                                           cfg.value("seed", 1ull));
            double tol = cfg.value("tolerance", 0.02);
            bool pass = std::abs(mc.value - brute.value) <= tol;
            csv << (pass ? "PASS" : "FAIL") << "\n";
            csv << "monte_carlo," << seq.k() << "," << fmt_double(mc.value) << ","
                << fmt_double(mc.radius_or_samples) << "," << fmt_double(mc.convergence_gap)
                << "," << (pass ? "PASS" : "FAIL") << "\n";
        } else {
            csv << "\n";
        }
    } catch (const capacity_error&) {
        write_file_atomic(ctx.out_dir / experiment / "rate.csv", csv.str());
        return kBudgetError;
    }
    write_file_atomic(ctx.out_dir / experiment / "rate.csv", csv.str());
    return kOk;
}

int cmd_linear_meanrate(const RunContext& ctx) {
    const json& cfg = ctx.config;
    const std::string experiment = "linear-meanrate";
    echo_config(ctx, experiment);
    const std::string digest = config_digest(cfg);
    MatrixSequence seq = parse_sequence(cfg);
    auto samples = cfg.value("samples", 1'000'000ull);
    auto seed = cfg.value("seed", 1ull);

    std::ostringstream csv;
    csv << "# config=" << digest << "\n";
    csv << "# rng=mt19937_64 seed=" << seed << "\n";
    csv << "method,k,tau_estimate,radius_or_samples,convergence_gap\n";
    try {
        RateEstimate mc = mean_rate_mc(seq, samples, seed);
        csv << "monte_carlo," << seq.k() << "," << fmt_double(mc.value) << ","
            << fmt_double(mc.radius_or_samples) << "," << fmt_double(mc.convergence_gap) << "\n";
    } catch (const capacity_error&) {
        write_file_atomic(ctx.out_dir / experiment / "meanrate.csv", csv.str());
        return kBudgetError;
    }
    write_file_atomic(ctx.out_dir / experiment / "meanrate.csv", csv.str());
    return kOk;
}

int cmd_linear_preimage(const RunContext& ctx) {
    const json& cfg = ctx.config;
    const std::string experiment = "linear-preimage";
    echo_config(ctx, experiment);
    const std::string digest = config_digest(cfg);
    MatrixSequence seq = parse_sequence(cfg);
    auto target = cfg.at("target").get<std::vector<std::int64_t>>();
    auto R = cfg.value("R", 100ll);

    std::ostringstream csv;
    csv << "# config=" << digest << "\n";
    for (int d = 0; d < seq.n; ++d) csv << (d ? "," : "") << "x" << d;
    csv << ",sup_norm\n";
    try {
        auto preimages = preimage_search(seq, target, R);
        for (const auto& x : preimages) {
            std::int64_t sup = 0;
            for (auto c : x) sup = std::max(sup, std::abs(c));
            for (int d = 0; d < seq.n; ++d) csv << (d ? "," : "") << x[d];
            csv << "," << sup << "\n";
        }
    } catch (const capacity_error&) {
        write_file_atomic(ctx.out_dir / experiment / "preimages.csv", csv.str());
        return kBudgetError;
    }
    write_file_atomic(ctx.out_dir / experiment / "preimages.csv", csv.str());
    return kOk;
}

int cmd_linear_decay(const RunContext& ctx) {
    const json& cfg = ctx.config;
    const std::string experiment = "linear-decay";
    echo_config(ctx, experiment);
    const std::string digest = config_digest(cfg);
    int n = cfg.value("n", 2);
    int k_max = cfg.value("k_max", 10);
    double norm_bound = cfg.value("norm_bound", 5.0);
    int trials = cfg.value("trials", 10);
    auto seed = cfg.value("seed", 1ull);
    auto S = cfg.value("S", 200ll);

    std::ostringstream csv;
    csv << "# config=" << digest << "\n";
    csv << "# rng=mt19937_64 base_seed=" << seed << "\n";
    try {
        auto rows = decay_experiment(n, k_max, norm_bound, trials, seed, S);
        write_decay_csv(csv, rows);
    } catch (const capacity_error&) {
        write_file_atomic(ctx.out_dir / experiment / "decay.csv", csv.str());
        return kBudgetError;
    }
    write_file_atomic(ctx.out_dir / experiment / "decay.csv", csv.str());
    return kOk;
}

int cmd_render(const RunContext& ctx) {
    const json& cfg = ctx.config;
    const std::string experiment = "render";
    echo_config(ctx, experiment);
    const std::string digest = config_digest(cfg);
    fs::path input = cfg.at("input").get<std::string>();
    if (!fs::exists(input)) throw std::invalid_argument("input measure CSV not found: " +
                                                        input.string());
    GridSpec grid(cfg.value("n", 2), cfg.at("N").get<std::uint32_t>());
    RasterSpec raster = parse_raster(cfg);

    std::ifstream in(input);
    DiscreteMeasure mu = read_measure_csv(in, grid);
    RasterValues values = rasterize(mu, raster);
    std::string stem = input.stem().string();
    std::ostringstream ppm;
    write_ppm(ppm, colorize(values, raster), "config=" + digest);
    write_file_atomic(ctx.out_dir / experiment / (stem + ".ppm"), ppm.str());
    std::ostringstream vcsv;
    vcsv << "# config=" << digest << "\n";
    write_values_csv(vcsv, values);
    write_file_atomic(ctx.out_dir / experiment / (stem + "_values.csv"), vcsv.str());
    return kOk;
}

}  // namespace ergodyn
