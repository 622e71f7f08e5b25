#include "safedrive/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <memory>
#include <sstream>

#include "safedrive/errors.hpp"

namespace safedrive {

const char* to_string(Condition c) {
    switch (c) {
        case Condition::Idm: return "idm";
        case Condition::Plain: return "plain";
        case Condition::Memory: return "memory";
        case Condition::Risk: return "risk";
        case Condition::Both: return "both";
    }
    return "plain";
}

Condition condition_from_string(const std::string& s) {
    if (s == "idm") return Condition::Idm;
    if (s == "plain") return Condition::Plain;
    if (s == "memory") return Condition::Memory;
    if (s == "risk") return Condition::Risk;
    if (s == "both") return Condition::Both;
    throw BadParameter("unknown condition: " + s);
}

ModuleFlags flags_for(Condition c) {
    switch (c) {
        case Condition::Plain: return {false, false};
        case Condition::Memory: return {false, true};
        case Condition::Risk: return {true, false};
        case Condition::Both: return {true, true};
        case Condition::Idm: return {false, false};
    }
    return {false, false};
}

double safety_rate(const EpisodeLog& log, const OracleParams& oracle, const IdmParams& idm) {
    if (log.records.empty()) throw EmptyLog("safety_rate needs a non-empty episode log");
    std::size_t safe = 0;
    for (std::size_t i = 0; i < log.records.size(); ++i) {
        const DecisionRecord& r = log.records[i];
        if (!r.action) continue;  // no decision counts unsafe
        if (safety_oracle(log.scenes[i].scene, *r.action, oracle, idm).safe) ++safe;
    }
    return static_cast<double>(safe) / static_cast<double>(log.records.size());
}

double decision_alignment(const EpisodeLog& log) {
    if (log.records.empty()) throw EmptyLog("decision_alignment needs a non-empty episode log");
    std::size_t aligned = 0;
    for (const DecisionRecord& r : log.records) {
        if (!r.true_label) throw MissingLabels("decision_alignment needs labels on every scene");
        if (r.action && *r.action == *r.true_label) ++aligned;
    }
    return static_cast<double>(aligned) / static_cast<double>(log.records.size());
}

nlohmann::json MetricsTable::to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const MetricsRow& r : rows) {
        rows_json.push_back({
            {"scenario_tag", r.scenario_tag},
            {"condition", r.condition},
            {"safety_rate", r.safety_rate},
            {"decision_alignment", r.decision_alignment},
            {"n_scenes", r.n_scenes},
            {"n_safe", r.n_safe},
            {"n_aligned", r.n_aligned},
            {"n_no_decision", r.n_no_decision},
        });
    }
    return {{"schema_version", 1}, {"rows", rows_json}};
}

std::vector<std::string> truth_replay_lines(const std::vector<LabeledScene>& scenes) {
    std::vector<std::string> lines;
    lines.reserve(scenes.size());
    for (const LabeledScene& s : scenes) {
        lines.push_back(std::string("Matching the recorded human decision for this scene.\nFinal decision: ") +
                        action_token(s.true_label));
    }
    return lines;
}

namespace {

std::unique_ptr<LlmClient> make_client(const SafeDriveConfig& config) {
    if (config.backend.llm == "scripted") {
        if (!config.backend.rules_path.empty())
            return std::make_unique<RuleScriptedClient>(
                RuleScriptedClient::from_json_file(config.backend.rules_path));
        return std::make_unique<RuleScriptedClient>();
    }
    if (config.backend.llm == "replay") {
        if (config.backend.replay_path.empty())
            throw ConfigError("replay backend needs backend.replay_path");
        return std::make_unique<ReplayClient>(ReplayClient::load_jsonl(config.backend.replay_path));
    }
    if (config.backend.llm == "wire") return std::make_unique<WireClient>(config.backend.llm_wire);
    throw ConfigError("unknown llm backend: " + config.backend.llm);
}

std::shared_ptr<const Embedder> make_embedder(const SafeDriveConfig& config) {
    if (config.backend.embedding == "hashing")
        return std::make_shared<HashingEmbedder>(config.backend.embedding_dimension);
    if (config.backend.embedding == "wire")
        return std::make_shared<WireEmbedder>(config.backend.embedding_wire,
                                              config.backend.embedding_dimension);
    throw ConfigError("unknown embedding backend: " + config.backend.embedding);
}

void seed_store_for(VectorStore& store, const std::vector<LabeledScene>& scenes) {
    bool highway = false, intersection = false, roundabout = false;
    for (const LabeledScene& s : scenes) {
        highway = highway || s.scene.dataset_tag == DatasetTag::Highway;
        intersection = intersection || s.scene.dataset_tag == DatasetTag::Intersection;
        roundabout = roundabout || s.scene.dataset_tag == DatasetTag::Roundabout;
    }
    if (highway) store.seed(default_exemplars(DatasetTag::Highway));
    if (intersection) store.seed(default_exemplars(DatasetTag::Intersection));
    if (roundabout) store.seed(default_exemplars(DatasetTag::Roundabout));
}

EpisodeLog idm_episode(const std::vector<LabeledScene>& scenes, const SafeDriveConfig& config) {
    EpisodeLog log;
    log.condition = "idm";
    log.scenes = scenes;
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        const LabeledScene& labeled = scenes[i];
        DecisionRecord r;
        r.scene_index = i;
        r.frame = labeled.scene.frame;
        r.dataset_tag = to_string(labeled.scene.dataset_tag);
        r.scenario_tag = labeled.scenario_tag;
        r.scene_text = render_scene_text(labeled.scene);
        r.reasoning = "Intelligent Driver Model baseline.";
        r.action = idm_policy(labeled.scene, config.idm, config.oracle.follower_lateral_tolerance);
        r.true_label = labeled.true_label;
        r.matched_truth =
            *r.action == labeled.true_label ? MatchedTruth::Matched : MatchedTruth::Mismatched;
        log.records.push_back(std::move(r));
    }
    return log;
}

}  // namespace

EvalResult evaluate(const std::vector<LabeledScene>& scenes, const std::vector<Condition>& conditions,
                    const SafeDriveConfig& config, const RiskThresholds& thresholds, std::uint64_t seed) {
    EvalResult result;
    for (Condition condition : conditions) {
        EpisodeLog log;
        if (condition == Condition::Idm) {
            log = idm_episode(scenes, config);
        } else {
            auto embedder = make_embedder(config);
            VectorStore store(embedder);
            const ModuleFlags flags = flags_for(condition);
            if (flags.memory) seed_store_for(store, scenes);
            auto client = make_client(config);
            DecisionAgent agent(config.agent_setup(thresholds), flags, store, *client);
            log = agent.run_episode(scenes);
            log.condition = to_string(condition);
        }
        log.seed = seed;

        // Per-scenario rows over this condition's log.
        std::map<std::string, MetricsRow> by_tag;
        for (std::size_t i = 0; i < log.records.size(); ++i) {
            const DecisionRecord& r = log.records[i];
            MetricsRow& row = by_tag[r.scenario_tag];
            row.scenario_tag = r.scenario_tag;
            row.condition = to_string(condition);
            ++row.n_scenes;
            if (!r.action) {
                ++row.n_no_decision;
                continue;
            }
            if (safety_oracle(log.scenes[i].scene, *r.action, config.oracle, config.idm).safe) ++row.n_safe;
            if (r.true_label && *r.action == *r.true_label) ++row.n_aligned;
        }
        for (auto& [tag, row] : by_tag) {
            row.safety_rate = static_cast<double>(row.n_safe) / static_cast<double>(row.n_scenes);
            row.decision_alignment = static_cast<double>(row.n_aligned) / static_cast<double>(row.n_scenes);
            result.table.rows.push_back(row);
        }
        result.logs.emplace(to_string(condition), std::move(log));
    }
    std::sort(result.table.rows.begin(), result.table.rows.end(),
              [](const MetricsRow& a, const MetricsRow& b) {
                  if (a.scenario_tag != b.scenario_tag) return a.scenario_tag < b.scenario_tag;
                  return a.condition < b.condition;
              });
    return result;
}

// ---- sweeps ----

SweepKind sweep_kind_from_string(const std::string& s) {
    if (s == "thw") return SweepKind::Thw;
    if (s == "lateral") return SweepKind::Lateral;
    if (s == "class") return SweepKind::VehicleClass;
    if (s == "intersection_profile") return SweepKind::IntersectionProfile;
    throw BadParameter("unknown sweep kind: " + s);
}

namespace {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

VehicleState sweep_vehicle(long id, double x, double y, double speed, double heading = 0.0) {
    VehicleState v;
    v.id = id;
    v.x = x;
    v.y = y;
    v.speed = speed;
    v.heading = heading;
    return v;
}

}  // namespace

SweepTable qpr_sweeps(SweepKind kind, const SafeDriveConfig& config) {
    SweepTable table;
    const CostTable& costs = config.costs;
    const QprConvention convention = config.convention;

    switch (kind) {
        case SweepKind::Thw: {
            table.kind = "thw";
            table.abscissa_name = "thw_s";
            const double speed = 20.0;
            // The look-ahead must cover the largest headway swept, or the
            // field ends before the leader and the tail flattens to zero.
            DrfParams params = config.drf;
            const double needed = (4.0 * speed + 6.0) / speed;
            params.t_la = std::max(params.t_la, needed);
            const VehicleState ego = sweep_vehicle(1, 0.0, 0.0, speed);
            const Grid grid = GridSpec{260.0, 60.0, config.grid.resolution}.centered_at(60.0, 0.0);
            for (double thw = 0.5; thw <= 4.0 + 1e-9; thw += 0.25) {
                const VehicleState leader =
                    sweep_vehicle(2, thw * speed + ego.length / 2.0 + 2.25, 0.0, speed);
                const QprReport report = qpr_total(ego, {leader}, params, costs, grid, convention);
                table.points.push_back({thw, "", report.total});
            }
            break;
        }
        case SweepKind::Lateral: {
            table.kind = "lateral";
            table.abscissa_name = "lateral_offset_m";
            const double speed = 20.0;
            const VehicleState ego = sweep_vehicle(1, 0.0, 0.0, speed);
            const Grid grid = config.grid.centered_at(0.0, 0.0);
            // Step by the cell size so every offset rasterizes the same
            // footprint pattern; finer steps would alias against the grid.
            const double step = config.grid.resolution;
            for (double offset = 0.5; offset <= 6.0 + 1e-9; offset += step) {
                const VehicleState other = sweep_vehicle(2, 20.0, offset, speed);
                const QprReport report = qpr_total(ego, {other}, config.drf, costs, grid, convention);
                table.points.push_back({offset, "", report.total});
            }
            break;
        }
        case SweepKind::VehicleClass: {
            table.kind = "class";
            table.abscissa_name = "class_index";
            const double speed = 20.0;
            const VehicleState ego = sweep_vehicle(1, 0.0, 0.0, speed);
            const Grid grid = config.grid.centered_at(0.0, 0.0);
            const VehicleClass classes[] = {VehicleClass::Sedan,      VehicleClass::Truck,
                                            VehicleClass::Bus,        VehicleClass::Motorcycle,
                                            VehicleClass::Vru,        VehicleClass::Other};
            double index = 0.0;
            for (VehicleClass klass : classes) {
                VehicleState other = sweep_vehicle(2, 25.0, 0.0, speed);
                other.klass = klass;
                const QprReport report = qpr_total(ego, {other}, config.drf, costs, grid, convention);
                table.points.push_back({index, to_string(klass), report.front});
                index += 1.0;
            }
            break;
        }
        case SweepKind::IntersectionProfile: {
            table.kind = "intersection_profile";
            table.abscissa_name = "time_s";
            SynthSpec spec;
            spec.kind = SynthKind::IntersectionApproach;
            const TrajectoryTable rollout = synth_scenario(spec);
            for (long frame : rollout.frames()) {
                const auto present = rollout.at_frame(frame);
                VehicleState ego;
                std::vector<VehicleState> neighbors;
                for (const TrajectoryRow* r : present) {
                    if (r->id == 1) {
                        ego = row_to_state(*r, config.scene.estimation);
                    } else {
                        neighbors.push_back(row_to_state(*r, config.scene.estimation));
                    }
                }
                const Grid grid = config.grid.centered_at(ego.x, ego.y);
                const QprReport report = qpr_total(ego, neighbors, config.drf, costs, grid, convention);
                table.points.push_back(
                    {static_cast<double>(frame) / rollout.frame_rate(), "", report.total});
            }
            break;
        }
    }
    return table;
}

void SweepTable::write_csv(std::ostream& out) const {
    const bool labelled = !points.empty() && !points.front().label.empty();
    out << abscissa_name << (labelled ? ",label,qpr\n" : ",qpr\n");
    for (const SweepPoint& p : points) {
        out << format_double(p.abscissa);
        if (labelled) out << ',' << p.label;
        out << ',' << format_double(p.qpr) << '\n';
    }
}

void SweepTable::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    write_csv(out);
}

// ---- bundled suite ----

namespace {

struct SuiteEntry {
    SynthSpec spec;
    long frame;
    std::string instruction;
    DatasetTag tag;
    std::string scenario_tag;
};

std::vector<SuiteEntry> suite_entries() {
    std::vector<SuiteEntry> entries;
    for (double thw : {0.8, 1.0, 1.2, 1.5, 2.0, 2.5, 3.0, 3.5}) {
        SynthSpec spec;
        spec.kind = SynthKind::CarFollowing;
        spec.parameters = {{"thw", thw}};
        entries.push_back({spec, 25, "Follow the current road and keep a safe distance.",
                           DatasetTag::Highway, "car_following"});
    }
    for (double overtaker_speed : {32.0, 36.0}) {
        for (double overtaker_gap : {10.0, 15.0, 20.0}) {
            SynthSpec spec;
            spec.kind = SynthKind::LaneChangeConflict;
            spec.parameters = {{"overtaker_speed", overtaker_speed}, {"overtaker_gap", overtaker_gap}};
            entries.push_back({spec, 25, "Move to the left lane when it is safe.", DatasetTag::Highway,
                               "lane_change_conflict"});
        }
    }
    for (long frame : {60, 90, 110, 130}) {
        SynthSpec spec;
        spec.kind = SynthKind::IntersectionApproach;
        entries.push_back({spec, frame, "Cross the intersection and continue straight.",
                           DatasetTag::Intersection, "intersection_approach"});
    }
    for (long frame : {30, 55}) {
        SynthSpec spec;
        spec.kind = SynthKind::RoundaboutMerge;
        entries.push_back({spec, frame, "Enter the roundabout and take the second exit.",
                           DatasetTag::Roundabout, "roundabout_merge"});
    }
    return entries;
}

}  // namespace

std::vector<TrajectoryTable> bundled_suite_tables() {
    std::vector<TrajectoryTable> tables;
    for (const SuiteEntry& entry : suite_entries()) tables.push_back(synth_scenario(entry.spec));
    return tables;
}

std::vector<LabeledScene> bundled_suite(const SafeDriveConfig& config) {
    std::vector<LabeledScene> scenes;
    for (const SuiteEntry& entry : suite_entries()) {
        const TrajectoryTable table = synth_scenario(entry.spec);
        SceneParams params = config.scene;
        params.default_instruction = entry.instruction;
        LabeledScene labeled;
        labeled.scene = extract_scene(table, 1, entry.frame, params);
        labeled.scene.dataset_tag = entry.tag;
        labeled.true_label = label_action(table, 1, entry.frame, config.labeler);
        labeled.label_source = LabelSource::Heuristic;
        labeled.scenario_tag = entry.scenario_tag;
        scenes.push_back(std::move(labeled));
    }
    return scenes;
}

}  // namespace safedrive
