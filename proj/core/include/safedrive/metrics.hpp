#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "safedrive/agent.hpp"
#include "safedrive/config.hpp"
#include "safedrive/synth.hpp"

namespace safedrive {

enum class Condition { Idm, Plain, Memory, Risk, Both };

const char* to_string(Condition c);
Condition condition_from_string(const std::string& s);
ModuleFlags flags_for(Condition c);

// Fraction of scenes whose decided action the kinematic oracle accepts;
// scenes without a decoded action count as unsafe.
double safety_rate(const EpisodeLog& log, const OracleParams& oracle = {}, const IdmParams& idm = {});

// Fraction of scenes whose action equals the label; no-decision counts
// as misaligned.
double decision_alignment(const EpisodeLog& log);

struct MetricsRow {
    std::string scenario_tag;
    std::string condition;
    double safety_rate = 0.0;
    double decision_alignment = 0.0;
    std::size_t n_scenes = 0;
    std::size_t n_safe = 0;
    std::size_t n_aligned = 0;
    std::size_t n_no_decision = 0;
};

struct MetricsTable {
    std::vector<MetricsRow> rows;  // sorted by (scenario_tag, condition)
    nlohmann::json to_json() const;
};

struct EvalResult {
    MetricsTable table;
    std::map<std::string, EpisodeLog> logs;  // per condition
};

// Runs the IDM baseline and/or agent ablations over the same labeled
// scenes. Agent conditions get a fresh store each (seeded with the
// bundled exemplars when memory is on) and a fresh client built from the
// backend config. Deterministic under offline backends.
EvalResult evaluate(const std::vector<LabeledScene>& scenes, const std::vector<Condition>& conditions,
                    const SafeDriveConfig& config, const RiskThresholds& thresholds,
                    std::uint64_t seed = 0);

// Replay lines that answer every scene with its label; feeding them to a
// ReplayClient yields a perfectly aligned agent.
std::vector<std::string> truth_replay_lines(const std::vector<LabeledScene>& scenes);

// ---- analysis sweeps ----

enum class SweepKind { Thw, Lateral, VehicleClass, IntersectionProfile };

SweepKind sweep_kind_from_string(const std::string& s);

struct SweepPoint {
    double abscissa = 0.0;
    std::string label;  // class sweeps only
    double qpr = 0.0;
};

struct SweepTable {
    std::string kind;
    std::string abscissa_name;
    std::vector<SweepPoint> points;

    void write_csv(std::ostream& out) const;
    void write_csv(const std::string& path) const;
};

SweepTable qpr_sweeps(SweepKind kind, const SafeDriveConfig& config);

// ---- bundled synthetic evaluation suite ----

// 20 labeled scenes across the four scenario families, deterministic.
std::vector<LabeledScene> bundled_suite(const SafeDriveConfig& config);

// The scenario tables behind the suite, used for threshold calibration.
std::vector<TrajectoryTable> bundled_suite_tables();

}  // namespace safedrive
