#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "safedrive/risk_field.hpp"
#include "safedrive/scene.hpp"
#include "safedrive/trajectory.hpp"

namespace safedrive {

enum class RiskLevel { Low, Medium, High };

const char* to_string(RiskLevel level);  // "LOW" / "MEDIUM" / "HIGH"

// Calibrated percentile cut points over a QPR sample.
struct RiskThresholds {
    double t_low = 0.0;   // 30th percentile
    double t_high = 0.0;  // 70th percentile
    std::size_t sample_count = 1;
    QprConvention convention = QprConvention::AreaIntegral;
    std::string source_tag;
    std::optional<std::uint64_t> seed;

    void save(const std::string& path) const;
    static RiskThresholds load(const std::string& path);
};

// Draws n per-vehicle QPR values by uniformly sampling valid
// (ego, frame, neighbor) triples — a triple is valid when both vehicles
// share the frame within `radius` of each other. Deterministic for a
// fixed seed.
std::vector<double> sample_qpr_distribution(const TrajectoryTable& trajectories, std::size_t n,
                                            std::uint64_t seed, const DrfParams& params,
                                            const CostTable& costs, const GridSpec& grid_spec,
                                            QprConvention convention = QprConvention::AreaIntegral,
                                            double radius = 50.0,
                                            const StateEstimation& estimation = {});

// Nearest-rank percentiles of the ascending sort: t_low at rank
// ceil(0.30 n), t_high at rank ceil(0.70 n). Needs at least 10 samples.
RiskThresholds calibrate_thresholds(std::vector<double> samples,
                                    QprConvention convention = QprConvention::AreaIntegral,
                                    std::string source_tag = {});

// Boundaries belong to Medium: qpr < t_low is Low, qpr > t_high is High.
RiskLevel classify_risk(double qpr, const RiskThresholds& thresholds);

// Sentence templates per (level, relation) with {id}, {level}, {qpr}
// placeholders, plus the scene-total line with {level}, {qpr}.
struct NotificationTemplates {
    std::map<std::string, std::string> participant = {
        {"low_front", "Vehicle {id} ahead: {level} risk (QPR {qpr})."},
        {"medium_front", "Vehicle {id} ahead: {level} risk (QPR {qpr})."},
        {"high_front", "Vehicle {id} ahead: {level} risk (QPR {qpr})."},
        {"low_rear", "Vehicle {id} behind: {level} risk (QPR {qpr})."},
        {"medium_rear", "Vehicle {id} behind: {level} risk (QPR {qpr})."},
        {"high_rear", "Vehicle {id} behind: {level} risk (QPR {qpr})."},
    };
    std::string scene = "Overall scene risk: {level} (total QPR {qpr}).";
};

struct ParticipantNotice {
    long id = 0;
    double qpr_share = 0.0;
    RiskLevel level = RiskLevel::Low;
    Relation relation = Relation::Front;
    std::string sentence;
};

struct RiskNotification {
    std::vector<ParticipantNotice> participants;  // descending share, then ascending id
    RiskLevel scene_level = RiskLevel::Low;
    double total = 0.0;

    // The text block injected into the agent prompt.
    std::string to_text(const NotificationTemplates& templates = {}) const;
};

// One sentence per neighbor in the report, ordered by descending share
// then ascending id; the scene level classifies the total. Throws
// ConventionMismatch when report and thresholds disagree.
RiskNotification risk_notification(const QprReport& report, const RiskThresholds& thresholds,
                                   const NotificationTemplates& templates = {});

// Risk pipeline entry point for one scene: evaluates the omnidirectional
// QPR on an ego-centered grid in the ego frame.
QprReport assess_scene(const Scene& scene, const DrfParams& params, const CostTable& costs,
                       const GridSpec& grid_spec,
                       QprConvention convention = QprConvention::AreaIntegral);

}  // namespace safedrive
