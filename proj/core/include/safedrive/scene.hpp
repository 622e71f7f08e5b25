#pragma once

#include <optional>
#include <string>
#include <vector>

#include "safedrive/trajectory.hpp"
#include "safedrive/vehicle.hpp"

namespace safedrive {

enum class Action {
    Accelerate,
    Decelerate,
    LaneChangeLeft,
    LaneChangeRight,
    TurnLeft,
    TurnRight,
    Idle,
};

inline constexpr Action kAllActions[] = {
    Action::Accelerate,     Action::Decelerate, Action::LaneChangeLeft, Action::LaneChangeRight,
    Action::TurnLeft,       Action::TurnRight,  Action::Idle,
};

// Canonical lowercase token, stable across releases.
const char* action_token(Action a);
std::optional<Action> action_from_token(const std::string& token);

enum class DatasetTag { Highway, Intersection, Roundabout };

const char* to_string(DatasetTag t);
DatasetTag dataset_tag_from_string(const std::string& s);

// Lane context for highway scenes, or a free-text descriptor where lane
// ids do not apply (intersections, roundabouts).
struct LaneContext {
    std::optional<long> lane_id;
    int lanes_left = 0;
    int lanes_right = 0;
    std::string descriptor;  // used when lane_id is absent

    bool has_lanes() const { return lane_id.has_value(); }
};

// One decision point: the ego in world coordinates plus its neighbors in
// the ego frame (x forward, y left, heading relative).
struct Scene {
    VehicleState ego;
    std::vector<VehicleState> neighbors;  // ego-frame, nearest first
    LaneContext lane_context;
    long frame = 0;
    std::string navigation_instruction;
    DatasetTag dataset_tag = DatasetTag::Highway;
};

enum class LabelSource { File, Heuristic };

struct LabeledScene {
    Scene scene;
    Action true_label = Action::Idle;
    LabelSource label_source = LabelSource::Heuristic;
    std::string scenario_tag;  // grouping key for metrics
};

struct SceneParams {
    double neighbor_radius = 50.0;  // m, closed ball
    std::size_t neighbor_cap = 8;
    StateEstimation estimation;
    std::string default_instruction = "Follow the current road and keep a safe distance.";
};

// Neighbors within the radius of the ego at the frame, nearest first,
// truncated at the cap, with poses re-expressed in the ego frame.
Scene extract_scene(const TrajectoryTable& table, long ego_id, long frame, const SceneParams& params = {});

// Deterministic, locale-independent description: one ego line, one line
// per neighbor in ascending id, then the navigation instruction.
std::string render_scene_text(const Scene& scene);

struct LabelerParams {
    long horizon = 25;             // frames
    double turn_threshold = 0.2;   // rad
    double accel_threshold = 0.3;  // m/s^2
};

// Ground-truth heuristic over the next `horizon` frames: lane change by
// lane-id switch, then turn by heading change, then accelerate/decelerate
// by mean longitudinal acceleration, else idle.
Action label_action(const TrajectoryTable& table, long ego_id, long frame, const LabelerParams& params = {});

// Optional label override file: CSV "ego_id,frame,action" with canonical
// action tokens.
std::map<std::pair<long, long>, Action> parse_label_file(const std::string& path);

}  // namespace safedrive
