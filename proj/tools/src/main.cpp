#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "suiteopt/errors.hpp"
#include "suiteopt/selection.hpp"
#include "suiteopt/serialize.hpp"

namespace {

using namespace suiteopt;

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct RunOptions {
    std::string scenario_path;
    std::string gen_spec;
    std::string library_path = "default";
    std::string out_dir = ".";
    std::string sensors;
    double budget_usd = 110000.0;
    std::string objective = "uniform";
    int cardinality = -1;
    double period_s = 5.0;
    std::uint64_t seed = 1;
    bool svg = false;
};

struct GenSpec {
    std::string kind;
    std::map<std::string, double> params;
};

GenSpec parse_gen_spec(const std::string& text) {
    GenSpec spec;
    std::stringstream stream(text);
    std::string token;
    bool first = true;
    while (std::getline(stream, token, ',')) {
        if (first) {
            spec.kind = token;
            first = false;
            continue;
        }
        const auto eq = token.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ValidationError("generator spec: expected key=value, got '" + token + "'");
        }
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        try {
            std::size_t used = 0;
            spec.params[key] = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::exception&) {
            throw ValidationError("generator spec: bad number '" + value + "' for key '" +
                                  key + "'");
        }
    }
    if (spec.kind.empty()) {
        throw ValidationError("generator spec: missing kind (linear or loop)");
    }
    return spec;
}

double take_param(GenSpec& spec, const std::string& key, double fallback) {
    const auto it = spec.params.find(key);
    if (it == spec.params.end()) return fallback;
    const double value = it->second;
    spec.params.erase(it);
    return value;
}

Scenario make_scenario(GenSpec spec) {
    Scenario scenario;
    if (spec.kind == "linear") {
        const double length = take_param(spec, "length", 250.0);
        const double spacing = take_param(spec, "spacing", 2.5);
        const int landmarks = static_cast<int>(take_param(spec, "landmarks", 120.0));
        const double corridor = take_param(spec, "corridor", 20.0);
        const auto seed = static_cast<std::uint64_t>(take_param(spec, "seed", 7.0));
        scenario = synth_linear_scenario(length, spacing, landmarks, corridor, seed);
    } else if (spec.kind == "loop") {
        const int laps = static_cast<int>(take_param(spec, "laps", 1.0));
        const int landmarks = static_cast<int>(take_param(spec, "landmarks", 150.0));
        const double range = take_param(spec, "range", 25.0);
        const auto seed = static_cast<std::uint64_t>(take_param(spec, "seed", 3.0));
        scenario = synth_loop_scenario(laps, landmarks, range, seed);
    } else {
        throw ValidationError("generator spec: unknown kind '" + spec.kind +
                              "' (expected linear or loop)");
    }
    if (!spec.params.empty()) {
        throw ValidationError("generator spec: unknown key '" + spec.params.begin()->first +
                              "' for kind " + spec.kind);
    }
    return scenario;
}

Scenario resolve_scenario(const RunOptions& options) {
    const bool has_path = !options.scenario_path.empty();
    const bool has_gen = !options.gen_spec.empty();
    if (has_path == has_gen) {
        throw ValidationError("exactly one of --scenario and --gen is required");
    }
    if (has_path) return load_scenario(options.scenario_path);
    return make_scenario(parse_gen_spec(options.gen_spec));
}

SensorLibrary resolve_library(const RunOptions& options) {
    if (options.library_path == "default") return build_default_library();
    return load_library(options.library_path);
}

std::vector<int> parse_sensor_ids(const std::string& text) {
    std::vector<int> ids;
    std::string normalized = text;
    std::replace(normalized.begin(), normalized.end(), ',', ' ');
    std::stringstream stream(normalized);
    std::string token;
    while (stream >> token) {
        try {
            std::size_t used = 0;
            ids.push_back(std::stoi(token, &used));
            if (used != token.size()) throw std::invalid_argument(token);
        } catch (const std::exception&) {
            throw ValidationError("--sensors: bad sensor id '" + token + "'");
        }
    }
    return ids;
}

std::string canonical_config(const std::string& command, const RunOptions& options,
                             const Scenario& scenario) {
    // the fingerprint identifies the parsed config, so the sensor list is
    // re-serialized rather than echoed as typed
    std::string sensors;
    for (int id : parse_sensor_ids(options.sensors)) {
        if (!sensors.empty()) sensors += ',';
        sensors += std::to_string(id);
    }
    std::string canon = "cmd=" + command;
    canon += ";scenario=" + scenario.name;
    canon += ";library=" + options.library_path;
    canon += ";sensors=" + sensors;
    canon += ";budget=" + format_double(options.budget_usd);
    canon += ";objective=" + options.objective;
    canon += ";cardinality=" + std::to_string(options.cardinality);
    canon += ";period_s=" + format_double(options.period_s);
    canon += ";seed=" + std::to_string(options.seed);
    canon += ";svg=" + std::string(options.svg ? "1" : "0");
    return fingerprint_hex(canon);
}

std::string out_path(const RunOptions& options, const std::string& file) {
    std::filesystem::create_directories(options.out_dir);
    return (std::filesystem::path(options.out_dir) / file).string();
}

void print_selection(const SensorLibrary& library, const Selection& selection) {
    for (std::size_t i = 0; i < selection.sensor_ids.size(); ++i) {
        const MountedSensor& sensor = library.at(selection.sensor_ids[i]);
        std::cout << "  " << (i + 1) << ". " << entry_display(sensor) << "  ($"
                  << format_money(sensor.model.cost_usd) << ")\n";
    }
}

std::optional<int> cardinality_of(const RunOptions& options) {
    if (options.cardinality < 0) return std::nullopt;
    return options.cardinality;
}

int run_gen(const RunOptions& options, const std::string& out_file) {
    const Scenario scenario = make_scenario(parse_gen_spec(options.gen_spec));
    const std::string fingerprint = canonical_config("gen", options, scenario);
    save_scenario(scenario, out_file, fingerprint);
    const double duration =
        scenario.poses.empty() ? 0.0 : scenario.poses.back().t - scenario.poses.front().t;
    std::cout << "wrote " << out_file << "\n";
    std::cout << "scenario '" << scenario.name << "': " << scenario.poses.size()
              << " poses, " << scenario.landmarks.size() << " landmarks, "
              << format_double(duration) << " s\n";
    return 0;
}

int run_eval(const RunOptions& options) {
    const Scenario scenario = resolve_scenario(options);
    const SensorLibrary library = resolve_library(options);
    const Selection selection = Selection::of(library, parse_sensor_ids(options.sensors));
    const EvalScore score = evaluate(scenario, library, selection);
    std::cout << score_json(score, canonical_config("eval", options, scenario));
    return 0;
}

int run_greedy(const RunOptions& options) {
    const Scenario scenario = resolve_scenario(options);
    const SensorLibrary library = resolve_library(options);

    GreedyOptions greedy_options;
    greedy_options.budget_usd = options.budget_usd;
    greedy_options.objective = objective_from_string(options.objective);
    greedy_options.max_cardinality = cardinality_of(options);
    const GreedyResult result = greedy_select(scenario, library, greedy_options);

    const std::string fingerprint = canonical_config("greedy", options, scenario);
    write_text_file(out_path(options, "selection.json"),
                    selection_json(library, result.selection, options.budget_usd, fingerprint));
    write_text_file(out_path(options, "trace.csv"),
                    trace_csv(library, result.trace, fingerprint));
    write_text_file(out_path(options, "trace.json"),
                    trace_json(library, result.trace, options.budget_usd, fingerprint));

    std::cout << "scenario '" << scenario.name << "', objective " << options.objective
              << ", budget $" << format_money(options.budget_usd) << "\n";
    std::cout << "selected " << result.selection.sensor_ids.size() << " sensors for $"
              << format_money(result.selection.total_cost_usd) << ":\n";
    print_selection(library, result.selection);
    if (!result.trace.steps.empty()) {
        std::cout << "score " << format_double(result.trace.steps.back().score)
                  << " (empty suite " << format_double(result.trace.baseline) << ")\n";
    } else {
        std::cout << "score " << format_double(result.trace.baseline)
                  << " (nothing affordable)\n";
    }
    return 0;
}

int run_pareto(const RunOptions& options) {
    const Scenario scenario = resolve_scenario(options);
    const SensorLibrary library = resolve_library(options);

    GreedyOptions greedy_options;
    greedy_options.budget_usd = options.budget_usd;
    greedy_options.max_cardinality = cardinality_of(options);

    greedy_options.objective = Objective::uniform;
    const GreedyResult uniform = greedy_select(scenario, library, greedy_options);
    greedy_options.objective = Objective::cost_benefit;
    const GreedyResult cost_benefit = greedy_select(scenario, library, greedy_options);

    const std::vector<GreedyTrace> traces = {uniform.trace, cost_benefit.trace};
    const std::vector<ParetoPoint> pool = pooled_points(library, traces);
    const std::vector<ParetoPoint> front = pareto_front(library, traces);

    const std::string fingerprint = canonical_config("pareto", options, scenario);
    write_text_file(out_path(options, "front.csv"), front_csv(front, fingerprint));
    if (options.svg) {
        write_text_file(out_path(options, "front.svg"), front_svg(pool, front, fingerprint));
    }

    std::cout << "scenario '" << scenario.name << "': pooled " << pool.size()
              << " architectures from 2 greedy runs, front keeps " << front.size() << "\n";
    for (const ParetoPoint& point : front) {
        std::cout << "  $" << format_money(point.cost_usd) << "  norm "
                  << format_double(point.score_norm) << "  (" << to_string(point.objective_tag)
                  << ", " << point.selection.sensor_ids.size() << " sensors)\n";
    }
    return 0;
}

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n == 0) return 0.0;
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

int run_resilient(const RunOptions& options) {
    const Scenario scenario = resolve_scenario(options);
    const SensorLibrary library = resolve_library(options);

    ResilientOptions resilient_options;
    resilient_options.budget_usd = options.budget_usd;
    resilient_options.period_s = options.period_s;
    const ResiliencePlan plan = resilient_plan(scenario, library, resilient_options);

    GreedyOptions greedy_options;
    greedy_options.budget_usd = options.budget_usd;
    greedy_options.max_cardinality = cardinality_of(options);
    const GreedyResult whole_route = greedy_select(scenario, library, greedy_options);
    const Selection& greedy_selection = whole_route.selection;

    // The whole-route selection with each period's failed sensor knocked out,
    // laid out as a plan so both sides simulate over identical schedules.
    ResiliencePlan crippled = plan;
    nlohmann::json period_rows = nlohmann::json::array();
    double resilient_total = 0.0;
    double crippled_total = 0.0;
    for (ResiliencePeriod& p : crippled.periods) {
        const int failed = p.failed_sensor_id;
        p.active = (failed >= 0 && greedy_selection.contains(failed))
                       ? greedy_selection.without(library, failed)
                       : greedy_selection;
        p.score_with_failure =
            evaluate(scenario, library, p.active, p.period).logdet;
    }
    for (std::size_t i = 0; i < plan.periods.size(); ++i) {
        const ResiliencePeriod& r = plan.periods[i];
        const ResiliencePeriod& c = crippled.periods[i];
        resilient_total += r.score_with_failure;
        crippled_total += c.score_with_failure;
        nlohmann::json row;
        row["period"] = r.period.index;
        row["failed_sensor_id"] = r.failed_sensor_id;
        row["resilient_score"] = r.score_with_failure;
        row["crippled_greedy_score"] = c.score_with_failure;
        row["improvement"] = r.score_with_failure - c.score_with_failure;
        period_rows.push_back(std::move(row));
    }

    constexpr int kSimSeeds = 20;
    std::vector<double> rmse_resilient;
    std::vector<double> rmse_crippled;
    nlohmann::json seed_rows = nlohmann::json::array();
    for (int k = 0; k < kSimSeeds; ++k) {
        const std::uint64_t seed = options.seed + static_cast<std::uint64_t>(k);
        const SolveReport a = simulate_plan(scenario, library, plan, seed);
        const SolveReport b = simulate_plan(scenario, library, crippled, seed);
        rmse_resilient.push_back(a.rmse_pose_m);
        rmse_crippled.push_back(b.rmse_pose_m);
        nlohmann::json row;
        row["seed"] = seed;
        row["rmse_pose_resilient_m"] = a.rmse_pose_m;
        row["rmse_pose_crippled_greedy_m"] = b.rmse_pose_m;
        seed_rows.push_back(std::move(row));
    }

    const std::string fingerprint = canonical_config("resilient", options, scenario);
    write_text_file(out_path(options, "plan.json"), plan_json(library, plan, fingerprint));
    write_text_file(out_path(options, "grid.csv"), grid_csv(library, plan, fingerprint));

    nlohmann::json report;
    report["config_fingerprint"] = fingerprint;
    report["scenario"] = scenario.name;
    report["budget_usd"] = options.budget_usd;
    report["period_s"] = options.period_s;
    report["greedy_selection_ids"] = greedy_selection.sensor_ids;
    report["periods"] = std::move(period_rows);
    report["pooled_resilient_score"] = resilient_total;
    report["pooled_crippled_greedy_score"] = crippled_total;
    report["pooled_improvement"] = resilient_total - crippled_total;
    report["simulations"] = std::move(seed_rows);
    report["median_rmse_pose_resilient_m"] = median(rmse_resilient);
    report["median_rmse_pose_crippled_greedy_m"] = median(rmse_crippled);
    write_text_file(out_path(options, "report.json"), report.dump(2) + "\n");

    std::cout << "scenario '" << scenario.name << "': " << plan.periods.size()
              << " periods of " << format_double(options.period_s) << " s\n";
    for (const ResiliencePeriod& p : plan.periods) {
        std::cout << "  period " << p.period.index << ": failed ";
        if (p.failed_sensor_id >= 0) {
            std::cout << entry_display(library.at(p.failed_sensor_id));
        } else {
            std::cout << "none";
        }
        std::cout << ", " << p.active.sensor_ids.size() << " active ($"
                  << format_money(p.active.total_cost_usd) << ")\n";
    }
    std::cout << "pooled score: resilient " << format_double(resilient_total)
              << " vs crippled greedy " << format_double(crippled_total) << "\n";
    std::cout << "median pose RMSE over " << kSimSeeds << " seeds: resilient "
              << format_double(median(rmse_resilient)) << " m vs crippled greedy "
              << format_double(median(rmse_crippled)) << " m\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sensor-suite design studies on 2D SLAM scenarios"};
    app.require_subcommand(1);

    RunOptions options;
    std::string gen_out = "scenario.json";
    std::string gen_kind;
    std::uint64_t gen_seed = 0;
    bool gen_seed_set = false;
    int gen_landmarks = -1;
    double gen_length = -1.0, gen_spacing = -1.0, gen_corridor = -1.0, gen_range = -1.0;
    int gen_laps = -1;

    CLI::App* gen = app.add_subcommand("gen", "generate a scenario file");
    gen->add_option("--kind", gen_kind, "generator kind: linear or loop")->required();
    gen->add_option("--seed", gen_seed, "generator seed")->each([&](const std::string&) {
        gen_seed_set = true;
    });
    gen->add_option("--landmarks", gen_landmarks, "landmark count");
    gen->add_option("--length", gen_length, "route length [m] (linear)");
    gen->add_option("--spacing", gen_spacing, "pose spacing [m] (linear)");
    gen->add_option("--corridor", gen_corridor, "landmark corridor half-width [m] (linear)");
    gen->add_option("--laps", gen_laps, "circuit laps (loop)");
    gen->add_option("--range", gen_range, "mean landmark range [m] (loop)");
    gen->add_option("--out", gen_out, "output scenario path");

    const auto add_common = [&](CLI::App* cmd, bool with_sensors) {
        cmd->add_option("--scenario", options.scenario_path, "scenario JSON path");
        cmd->add_option("--gen", options.gen_spec,
                        "inline generator spec, e.g. linear,seed=7,landmarks=120");
        cmd->add_option("--library", options.library_path,
                        "sensor library JSON path, or 'default'");
        cmd->add_option("--budget", options.budget_usd, "budget [USD]");
        cmd->add_option("--objective", options.objective, "uniform or cost-benefit");
        cmd->add_option("--cardinality", options.cardinality, "max suite size");
        cmd->add_option("--period-s", options.period_s, "resilience period length [s]");
        cmd->add_option("--seed", options.seed, "simulation seed");
        cmd->add_option("--out", options.out_dir, "output directory");
        cmd->add_flag("--svg", options.svg, "also write an SVG plot");
        if (with_sensors) {
            cmd->add_option("--sensors", options.sensors,
                            "sensor ids, space or comma separated ('' = empty suite)");
        }
    };

    CLI::App* eval = app.add_subcommand("eval", "score one architecture");
    add_common(eval, true);
    CLI::App* greedy = app.add_subcommand("greedy", "budgeted greedy suite search");
    add_common(greedy, false);
    CLI::App* pareto = app.add_subcommand("pareto", "pooled greedy runs and Pareto front");
    add_common(pareto, false);
    CLI::App* resilient =
        app.add_subcommand("resilient", "per-period failure-aware selection");
    add_common(resilient, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (gen->parsed()) {
            GenSpec spec;
            spec.kind = gen_kind;
            if (gen_seed_set) spec.params["seed"] = static_cast<double>(gen_seed);
            if (gen_landmarks >= 0) spec.params["landmarks"] = gen_landmarks;
            if (gen_length >= 0.0) spec.params["length"] = gen_length;
            if (gen_spacing >= 0.0) spec.params["spacing"] = gen_spacing;
            if (gen_corridor >= 0.0) spec.params["corridor"] = gen_corridor;
            if (gen_laps >= 0) spec.params["laps"] = gen_laps;
            if (gen_range >= 0.0) spec.params["range"] = gen_range;
            std::string joined = spec.kind;
            for (const auto& [key, value] : spec.params) {
                joined += "," + key + "=" + format_double(value);
            }
            options.gen_spec = joined;
            return run_gen(options, gen_out);
        }
        if (eval->parsed()) return run_eval(options);
        if (greedy->parsed()) return run_greedy(options);
        if (pareto->parsed()) return run_pareto(options);
        if (resilient->parsed()) return run_resilient(options);
    } catch (const SingularSystemError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return 0;
}
