#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ergodyn/errors.hpp"
#include "ergodyn/experiments.hpp"

using ergodyn::RunContext;
using nlohmann::json;

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 1;
    std::uint64_t budget_bytes = 0;
    std::uint64_t budget_steps = 0;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file");
    cmd->add_option("--out", flags.out_dir, "output directory");
    cmd->add_option("--seed", flags.seed, "override random seed")
        ->each([&flags](const std::string&) { flags.seed_set = true; });
    cmd->add_option("--workers", flags.workers, "max concurrent runs");
    cmd->add_option("--budget-bytes", flags.budget_bytes, "memory budget in bytes");
    cmd->add_option("--budget-steps", flags.budget_steps, "iteration step budget");
}

// Flags override config fields; the merged config is what the command sees
// (and echoes to the output directory).
RunContext make_context(const CommonFlags& flags, const json& extra) {
    json config = json::object();
    if (!flags.config_path.empty()) {
        std::ifstream in(flags.config_path);
        if (!in) throw std::invalid_argument("cannot open config: " + flags.config_path);
        in >> config;
    }
    for (const auto& [key, value] : extra.items()) config[key] = value;
    if (flags.seed_set) config["seed"] = flags.seed;
    if (flags.budget_bytes > 0) config["budget_bytes"] = flags.budget_bytes;
    if (flags.budget_steps > 0) config["budget_steps"] = flags.budget_steps;
    config["workers"] = flags.workers;
    return RunContext{std::move(config), flags.out_dir};
}

// JSON where it parses (numbers, lists, objects), bare string otherwise
// (builtin map names).
json parse_inline(const std::string& text) {
    json parsed = json::parse(text, nullptr, false);
    if (!parsed.is_discarded()) return parsed;
    return json(text);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"discrete invariant measures and injectivity rates of torus-map discretizations"};
    app.require_subcommand(1);

    struct {
        CommonFlags common;
        std::string map, N, start;
    } orbit, global;
    struct {
        CommonFlags common;
        std::string sequence;
        long long R = 0;
        std::uint64_t samples = 0;
        std::string target;
    } linear;
    struct {
        CommonFlags common;
        int k_max = 0, trials = 0;
    } decay;
    struct {
        CommonFlags common;
        std::string input;
        std::uint32_t N = 0;
    } render;

    auto* c_orbit = app.add_subcommand("measure-orbit", "single-orbit invariant measures");
    add_common(c_orbit, orbit.common);
    c_orbit->add_option("--map", orbit.map, "builtin map name or JSON document");
    c_orbit->add_option("--N", orbit.N, "grid order: number, [list], or {range}");
    c_orbit->add_option("--start", orbit.start, "start point [x,y] or {\"random\":{...}}");

    auto* c_global = app.add_subcommand("measure-global", "whole-grid invariant measures");
    add_common(c_global, global.common);
    c_global->add_option("--map", global.map, "builtin map name or JSON document");
    c_global->add_option("--N", global.N, "grid order: number, [list], or {range}");

    auto* c_rate = app.add_subcommand("linear-rate", "brute-force rate of injectivity");
    add_common(c_rate, linear.common);
    c_rate->add_option("--sequence", linear.sequence, "matrix sequence JSON");
    c_rate->add_option("--R", linear.R, "counting radius");

    auto* c_meanrate = app.add_subcommand("linear-meanrate", "Monte Carlo mean rate");
    add_common(c_meanrate, linear.common);
    c_meanrate->add_option("--sequence", linear.sequence, "matrix sequence JSON");
    c_meanrate->add_option("--samples", linear.samples, "Monte Carlo samples");

    auto* c_preimage = app.add_subcommand("linear-preimage", "preimages of a lattice point");
    add_common(c_preimage, linear.common);
    c_preimage->add_option("--sequence", linear.sequence, "matrix sequence JSON");
    c_preimage->add_option("--target", linear.target, "target point, e.g. [0,0]");
    c_preimage->add_option("--R", linear.R, "search radius");

    auto* c_decay = app.add_subcommand("linear-decay", "rate decay over random sequences");
    add_common(c_decay, decay.common);
    c_decay->add_option("--k-max", decay.k_max, "longest prefix");
    c_decay->add_option("--trials", decay.trials, "number of random sequences");

    auto* c_render = app.add_subcommand("render", "re-render a stored measure CSV");
    add_common(c_render, render.common);
    c_render->add_option("--input", render.input, "measure CSV path");
    c_render->add_option("--N", render.N, "grid order of the stored measure");

    CLI11_PARSE(app, argc, argv);

    try {
        json extra = json::object();
        if (app.got_subcommand(c_orbit) || app.got_subcommand(c_global)) {
            auto& args = app.got_subcommand(c_orbit) ? orbit : global;
            if (!args.map.empty()) extra["map"] = parse_inline(args.map);
            if (!args.N.empty()) extra["N"] = parse_inline(args.N);
            if (!args.start.empty()) extra["start"] = parse_inline(args.start);
            RunContext ctx = make_context(args.common, extra);
            return app.got_subcommand(c_orbit) ? ergodyn::cmd_measure_orbit(ctx)
                                               : ergodyn::cmd_measure_global(ctx);
        }
        if (app.got_subcommand(c_rate) || app.got_subcommand(c_meanrate) ||
            app.got_subcommand(c_preimage)) {
            if (!linear.sequence.empty()) extra["sequence"] = parse_inline(linear.sequence);
            if (linear.R > 0) extra["R"] = linear.R;
            if (linear.samples > 0) extra["samples"] = linear.samples;
            if (!linear.target.empty()) extra["target"] = parse_inline(linear.target);
            if (app.got_subcommand(c_rate)) {
                RunContext ctx = make_context(linear.common, extra);
                return ergodyn::cmd_linear_rate(ctx);
            }
            if (app.got_subcommand(c_meanrate)) {
                RunContext ctx = make_context(linear.common, extra);
                return ergodyn::cmd_linear_meanrate(ctx);
            }
            RunContext ctx = make_context(linear.common, extra);
            return ergodyn::cmd_linear_preimage(ctx);
        }
        if (app.got_subcommand(c_decay)) {
            if (decay.k_max > 0) extra["k_max"] = decay.k_max;
            if (decay.trials > 0) extra["trials"] = decay.trials;
            RunContext ctx = make_context(decay.common, extra);
            return ergodyn::cmd_linear_decay(ctx);
        }
        if (app.got_subcommand(c_render)) {
            if (!render.input.empty()) extra["input"] = render.input;
            if (render.N > 0) extra["N"] = render.N;
            RunContext ctx = make_context(render.common, extra);
            return ergodyn::cmd_render(ctx);
        }
    } catch (const ergodyn::capacity_error& e) {
        std::cerr << "budget exhausted: " << e.what() << "\n";
        return ergodyn::kBudgetError;
    } catch (const ergodyn::budget_error& e) {
        std::cerr << "budget exhausted: " << e.what() << "\n";
        return ergodyn::kBudgetError;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return ergodyn::kConfigError;
    }
    return ergodyn::kConfigError;
}
