// Command-line front end: dataset ingestion, single-scene QPR reports,
// threshold calibration, analysis sweeps, synthetic scenarios, and the
// closed-loop evaluation runner.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include "safedrive/config.hpp"
#include "safedrive/errors.hpp"
#include "safedrive/field_io.hpp"
#include "safedrive/metrics.hpp"

namespace {

using namespace safedrive;

constexpr int kExitOk = 0;
constexpr int kExitBadInput = 2;
constexpr int kExitBackendFailure = 3;

SafeDriveConfig load_config(const std::string& path) {
    return path.empty() ? SafeDriveConfig{} : SafeDriveConfig::load(path);
}

VehicleState vehicle_from_json(const nlohmann::json& j) {
    VehicleState v;
    v.id = j.value("id", 0L);
    if (j.contains("class")) v.klass = vehicle_class_from_string(j.at("class").get<std::string>());
    v.x = j.value("x", 0.0);
    v.y = j.value("y", 0.0);
    v.heading = j.value("heading", 0.0);
    v.speed = j.value("speed", 0.0);
    v.steering = j.value("steering", 0.0);
    v.width = j.value("width", 2.0);
    v.length = j.value("length", 4.5);
    v.wheelbase = j.value("wheelbase", 0.6 * v.length);
    v.validate();
    return v;
}

int cmd_ingest(const std::string& input, const std::string& out, double fps) {
    TrajectoryTable table = parse_tracks(input);
    if (fps > 0.0) table = TrajectoryTable(table.rows(), fps, table.metadata());
    serialize_tracks(table, out);
    std::cout << "ingested " << table.rows().size() << " rows at " << table.frame_rate() << " Hz -> "
              << out << '\n';
    return kExitOk;
}

int cmd_qpr(const std::string& scene_path, const std::string& config_path, const std::string& heatmap,
            const std::string& csv) {
    const SafeDriveConfig config = load_config(config_path);
    std::ifstream in(scene_path);
    if (!in) throw Error("cannot open scene file: " + scene_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("invalid scene JSON: ") + e.what());
    }
    const VehicleState ego = vehicle_from_json(j.at("ego"));
    std::vector<VehicleState> neighbors;
    for (const auto& n : j.value("neighbors", nlohmann::json::array()))
        neighbors.push_back(vehicle_from_json(n));

    GridSpec spec = config.grid;
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        spec.width = g.value("width", spec.width);
        spec.height = g.value("height", spec.height);
        spec.resolution = g.value("resolution", spec.resolution);
    }
    const Grid grid = spec.centered_at(ego.x, ego.y);
    const QprReport report = qpr_total(ego, neighbors, config.drf, config.costs, grid, config.convention);

    nlohmann::json out;
    out["total"] = report.total;
    out["front"] = report.front;
    out["rear"] = report.rear;
    out["convention"] = to_string(report.convention);
    out["per_vehicle"] = nlohmann::json::object();
    for (const auto& [id, share] : report.per_vehicle) {
        out["per_vehicle"][std::to_string(id)] = {
            {"front_share", share.front_share},
            {"rear_share", share.rear_share},
            {"relation", share.relation == Relation::Front ? "front" : "rear"},
        };
    }
    std::cout << out.dump(2) << '\n';

    if (!heatmap.empty() || !csv.empty()) {
        const ScalarField field = drf_evaluate(ego, config.drf, grid);
        if (!heatmap.empty()) write_field_pgm16(field, heatmap);
        if (!csv.empty()) write_field_csv(field, csv);
    }
    return kExitOk;
}

std::vector<double> pooled_samples(const std::vector<std::string>& datasets, std::size_t n,
                                   std::uint64_t seed, const SafeDriveConfig& config) {
    std::vector<double> samples;
    const std::size_t per_table = std::max<std::size_t>(n / datasets.size(), 1);
    for (std::size_t i = 0; i < datasets.size(); ++i) {
        const TrajectoryTable table = parse_tracks(datasets[i]);
        try {
            const std::vector<double> part = sample_qpr_distribution(
                table, per_table, seed + i, config.drf, config.costs, config.grid, config.convention,
                config.scene.neighbor_radius, config.scene.estimation);
            samples.insert(samples.end(), part.begin(), part.end());
        } catch (const EmptyDataset&) {
            // Tables whose vehicles never come near each other contribute
            // nothing to the risk distribution.
        }
    }
    if (samples.empty()) throw EmptyDataset("no dataset yielded any QPR samples");
    return samples;
}

int cmd_calibrate(const std::vector<std::string>& datasets, std::size_t n, std::uint64_t seed,
                  const std::string& out, const std::string& config_path, bool merge) {
    const SafeDriveConfig config = load_config(config_path);
    if (datasets.size() > 1 && !merge)
        throw BadParameter("multiple datasets given; pass --merge to pool them into one threshold set");
    const std::vector<double> samples = pooled_samples(datasets, n, seed, config);
    RiskThresholds thresholds = calibrate_thresholds(samples, config.convention,
                                                     merge ? "merged" : datasets.front());
    thresholds.seed = seed;
    thresholds.save(out);
    std::cout << "calibrated t_low=" << thresholds.t_low << " t_high=" << thresholds.t_high << " from "
              << samples.size() << " samples -> " << out << '\n';
    return kExitOk;
}

int cmd_sweep(const std::string& kind, const std::string& out, const std::string& config_path) {
    const SafeDriveConfig config = load_config(config_path);
    const SweepTable table = qpr_sweeps(sweep_kind_from_string(kind), config);
    table.write_csv(out);
    std::cout << "wrote " << table.points.size() << " sweep points -> " << out << '\n';
    return kExitOk;
}

int cmd_synth(const std::string& kind, const std::string& spec_path, const std::string& out) {
    SynthSpec spec;
    if (!spec_path.empty()) {
        std::ifstream in(spec_path);
        if (!in) throw Error("cannot open spec file: " + spec_path);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        spec = SynthSpec::from_json_text(text);
    } else if (!kind.empty()) {
        spec.kind = synth_kind_from_string(kind);
    } else {
        throw BadParameter("synth needs --kind or --spec");
    }
    const TrajectoryTable table = synth_scenario(spec);
    serialize_tracks(table, out);
    std::cout << "synthesized " << table.rows().size() << " rows (" << to_string(spec.kind) << ") -> "
              << out << '\n';
    return kExitOk;
}

std::vector<LabeledScene> scenes_from_table(const TrajectoryTable& table, const SafeDriveConfig& config,
                                            const std::string& labels_path) {
    std::map<std::pair<long, long>, Action> overrides;
    if (!labels_path.empty()) overrides = parse_label_file(labels_path);

    // One scene per (ego, frame) stride so a recording yields a modest,
    // deterministic scene set: every vehicle becomes the ego once per
    // second as long as its track still covers the labeling horizon.
    std::vector<LabeledScene> scenes;
    const long stride = std::max<long>(1, static_cast<long>(table.frame_rate()));
    for (const TrajectoryRow& row : table.rows()) {
        if (row.frame % stride != 0) continue;
        LabeledScene labeled;
        try {
            labeled.true_label = label_action(table, row.id, row.frame, config.labeler);
            labeled.label_source = LabelSource::Heuristic;
        } catch (const TrackTooShort&) {
            continue;
        }
        const auto it = overrides.find({row.id, row.frame});
        if (it != overrides.end()) {
            labeled.true_label = it->second;
            labeled.label_source = LabelSource::File;
        }
        labeled.scene = extract_scene(table, row.id, row.frame, config.scene);
        labeled.scenario_tag = to_string(labeled.scene.dataset_tag);
        scenes.push_back(std::move(labeled));
    }
    return scenes;
}

int cmd_run(const std::string& dataset, const std::string& conditions_arg, const std::string& backend,
            const std::string& config_path, const std::string& out, const std::string& log_path,
            const std::string& labels_path, std::uint64_t seed, std::size_t calib_samples) {
    SafeDriveConfig config = load_config(config_path);
    if (!backend.empty()) config.backend.llm = backend;

    std::vector<Condition> conditions;
    std::stringstream ss(conditions_arg);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (!token.empty()) conditions.push_back(condition_from_string(token));
    }
    if (conditions.empty()) throw BadParameter("no conditions given");

    // Scenes plus the tables behind them (the latter feed calibration).
    std::vector<LabeledScene> scenes;
    std::vector<TrajectoryTable> tables;
    if (dataset == "bundled") {
        scenes = bundled_suite(config);
        tables = bundled_suite_tables();
    } else {
        tables.push_back(parse_tracks(dataset));
        scenes = scenes_from_table(tables.back(), config, labels_path);
    }
    if (scenes.empty()) throw EmptyDataset("no usable scenes in " + dataset);

    RiskThresholds thresholds;
    bool loaded = false;
    if (!config.thresholds_path.empty()) {
        std::ifstream probe(config.thresholds_path);
        if (probe) {
            thresholds = RiskThresholds::load(config.thresholds_path);
            loaded = true;
        }
    }
    if (!loaded) {
        std::vector<double> samples;
        const std::size_t per_table = std::max<std::size_t>(calib_samples / tables.size(), 1);
        for (std::size_t i = 0; i < tables.size(); ++i) {
            try {
                const std::vector<double> part = sample_qpr_distribution(
                    tables[i], per_table, seed + i, config.drf, config.costs, config.grid,
                    config.convention, config.scene.neighbor_radius, config.scene.estimation);
                samples.insert(samples.end(), part.begin(), part.end());
            } catch (const EmptyDataset&) {
                // No pairs within the radius in this table; skip it.
            }
        }
        thresholds = calibrate_thresholds(samples, config.convention, dataset);
        thresholds.seed = seed;
    }

    const EvalResult result = evaluate(scenes, conditions, config, thresholds, seed);

    nlohmann::json metrics = result.table.to_json();
    metrics["seed"] = seed;
    metrics["dataset"] = dataset;
    metrics["backend"] = config.backend.llm;
    metrics["thresholds"] = {
        {"t_low", thresholds.t_low},
        {"t_high", thresholds.t_high},
        {"sample_count", thresholds.sample_count},
        {"convention", to_string(thresholds.convention)},
    };
    std::ofstream metrics_out(out);
    if (!metrics_out) throw Error("cannot open for writing: " + out);
    metrics_out << metrics.dump(2) << '\n';

    if (!log_path.empty()) {
        if (result.logs.size() == 1) {
            write_episode_jsonl(result.logs.begin()->second, log_path);
        } else {
            // One file per condition: insert the condition before the
            // extension.
            for (const auto& [condition, log] : result.logs) {
                std::string path = log_path;
                const std::size_t dot = path.rfind('.');
                const std::string suffix = "." + condition;
                if (dot == std::string::npos) {
                    path += suffix;
                } else {
                    path.insert(dot, suffix);
                }
                write_episode_jsonl(log, path);
            }
        }
    }

    for (const MetricsRow& row : result.table.rows) {
        std::printf("%-24s %-8s safety=%.4f alignment=%.4f (n=%zu)\n", row.scenario_tag.c_str(),
                    row.condition.c_str(), row.safety_rate, row.decision_alignment, row.n_scenes);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Omnidirectional driving-risk engine and risk-sensitive decision loop"};
    app.require_subcommand(1);

    std::string input, out, config_path, scene_path, heatmap, csv, kind, spec_path;
    std::string dataset, conditions = "both", backend, log_path, labels_path;
    std::vector<std::string> datasets;
    double fps = 0.0;
    std::size_t n = 2000, calib_samples = 2000;
    std::uint64_t seed = 0;
    bool merge = false;

    auto* ingest = app.add_subcommand("ingest", "Parse a tracks CSV into the canonical table format");
    ingest->add_option("csv", input, "input tracks CSV")->required();
    ingest->add_option("--out", out, "output table path")->required();
    ingest->add_option("--fps", fps, "override the frame rate (Hz)");

    auto* qpr = app.add_subcommand("qpr", "Omnidirectional risk report for one scene JSON");
    qpr->add_option("--scene", scene_path, "scene JSON file")->required();
    qpr->add_option("--config", config_path, "engine config JSON");
    qpr->add_option("--heatmap", heatmap, "write the ego risk field as a 16-bit PGM");
    qpr->add_option("--csv", csv, "write the ego risk field as CSV");

    auto* calibrate = app.add_subcommand("calibrate", "Calibrate risk-level thresholds from a dataset");
    calibrate->add_option("--dataset", datasets, "tracks table(s)")->required();
    calibrate->add_option("-n", n, "number of QPR samples");
    calibrate->add_option("--seed", seed, "sampling seed");
    calibrate->add_option("--out", out, "thresholds JSON path")->required();
    calibrate->add_option("--config", config_path, "engine config JSON");
    calibrate->add_flag("--merge", merge, "pool samples across multiple datasets");

    auto* sweep = app.add_subcommand("sweep", "QPR analysis sweeps");
    sweep->add_option("--kind", kind, "thw|lateral|class|intersection_profile")->required();
    sweep->add_option("--out", out, "output CSV path")->required();
    sweep->add_option("--config", config_path, "engine config JSON");

    auto* synth = app.add_subcommand("synth", "Generate a synthetic scenario table");
    synth->add_option("--kind", kind,
                      "car_following|lane_change_conflict|intersection_approach|roundabout_merge");
    synth->add_option("--spec", spec_path, "scenario spec JSON file");
    synth->add_option("--out", out, "output table path")->required();

    auto* run = app.add_subcommand("run", "Evaluate decision conditions over a labeled dataset");
    run->add_option("--dataset", dataset, "tracks table path or 'bundled'")->required();
    run->add_option("--conditions", conditions, "comma list of idm,plain,memory,risk,both");
    run->add_option("--backend", backend, "scripted|replay|wire (overrides config)");
    run->add_option("--config", config_path, "engine config JSON");
    run->add_option("--out", out, "metrics JSON path")->required();
    run->add_option("--log", log_path, "episode log path (JSON lines)");
    run->add_option("--labels", labels_path, "label override CSV");
    run->add_option("--seed", seed, "run seed");
    run->add_option("--calib-samples", calib_samples, "QPR samples when calibrating on the fly");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest) return cmd_ingest(input, out, fps);
        if (*qpr) return cmd_qpr(scene_path, config_path, heatmap, csv);
        if (*calibrate) return cmd_calibrate(datasets, n, seed, out, config_path, merge);
        if (*sweep) return cmd_sweep(kind, out, config_path);
        if (*synth) return cmd_synth(kind, spec_path, out);
        if (*run)
            return cmd_run(dataset, conditions, backend, config_path, out, log_path, labels_path, seed,
                           calib_samples);
    } catch (const BackendUnavailable& e) {
        std::cerr << "backend failure: " << e.what() << '\n';
        return kExitBackendFailure;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBadInput;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << '\n';
        return kExitBackendFailure;
    }
    return kExitBadInput;
}
