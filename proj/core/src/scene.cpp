#include "safedrive/scene.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "safedrive/errors.hpp"
#include "safedrive/geometry.hpp"

namespace safedrive {

const char* action_token(Action a) {
    switch (a) {
        case Action::Accelerate: return "accelerate";
        case Action::Decelerate: return "decelerate";
        case Action::LaneChangeLeft: return "lane_change_left";
        case Action::LaneChangeRight: return "lane_change_right";
        case Action::TurnLeft: return "turn_left";
        case Action::TurnRight: return "turn_right";
        case Action::Idle: return "idle";
    }
    return "idle";
}

std::optional<Action> action_from_token(const std::string& token) {
    for (Action a : kAllActions) {
        if (token == action_token(a)) return a;
    }
    return std::nullopt;
}

const char* to_string(DatasetTag t) {
    switch (t) {
        case DatasetTag::Highway: return "highway";
        case DatasetTag::Intersection: return "intersection";
        case DatasetTag::Roundabout: return "roundabout";
    }
    return "highway";
}

DatasetTag dataset_tag_from_string(const std::string& s) {
    if (s == "highway") return DatasetTag::Highway;
    if (s == "intersection") return DatasetTag::Intersection;
    if (s == "roundabout") return DatasetTag::Roundabout;
    throw ConfigError("unknown dataset tag: " + s);
}

namespace {

// Fixed decimals, '.' separator regardless of locale.
std::string fixed(double v, int decimals) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, decimals);
    return std::string(buf, ptr);
}

LaneContext lane_context_for(const TrajectoryTable& table, const TrajectoryRow& ego_row) {
    LaneContext ctx;
    if (!ego_row.lane_id) {
        ctx.descriptor = "unstructured area (no lane markings)";
        return ctx;
    }
    ctx.lane_id = ego_row.lane_id;
    // Lanes of the same travel direction, ordered by id. Left/right counts
    // assume ids increase toward the left edge, the usual drone-recording
    // layout for a single carriageway.
    std::set<long> lanes;
    for (const TrajectoryRow& r : table.rows()) {
        if (r.lane_id && (r.x_velocity * ego_row.x_velocity >= 0.0)) lanes.insert(*r.lane_id);
    }
    for (long lane : lanes) {
        if (lane > *ctx.lane_id) ++ctx.lanes_left;
        if (lane < *ctx.lane_id) ++ctx.lanes_right;
    }
    return ctx;
}

}  // namespace

Scene extract_scene(const TrajectoryTable& table, long ego_id, long frame, const SceneParams& params) {
    const std::vector<const TrajectoryRow*> at_frame = table.at_frame(frame);
    if (at_frame.empty()) throw UnknownFrame(frame);
    const TrajectoryRow* ego_row = nullptr;
    for (const TrajectoryRow* r : at_frame) {
        if (r->id == ego_id) ego_row = r;
    }
    if (!ego_row) throw UnknownEgo(ego_id);

    Scene scene;
    scene.frame = frame;
    scene.ego = row_to_state(*ego_row, params.estimation);
    scene.lane_context = lane_context_for(table, *ego_row);
    scene.navigation_instruction = params.default_instruction;
    scene.dataset_tag = ego_row->lane_id ? DatasetTag::Highway : DatasetTag::Intersection;

    std::vector<std::pair<double, const TrajectoryRow*>> candidates;
    for (const TrajectoryRow* r : at_frame) {
        if (r->id == ego_id) continue;
        const double d = std::hypot(r->x - ego_row->x, r->y - ego_row->y);
        if (d <= params.neighbor_radius) candidates.emplace_back(d, r);
    }
    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first < b.first : a.second->id < b.second->id;
    });
    if (candidates.size() > params.neighbor_cap) candidates.resize(params.neighbor_cap);

    for (const auto& [d, r] : candidates) {
        VehicleState n = row_to_state(*r, params.estimation);
        const Vec2 rel = rotated({n.x - scene.ego.x, n.y - scene.ego.y}, -scene.ego.heading);
        n.x = rel.x;
        n.y = rel.y;
        n.heading = normalize_angle(n.heading - scene.ego.heading);
        scene.neighbors.push_back(n);
    }
    return scene;
}

std::string render_scene_text(const Scene& scene) {
    std::ostringstream out;
    out << "Ego vehicle " << scene.ego.id;
    if (scene.lane_context.has_lanes()) {
        out << " in lane " << *scene.lane_context.lane_id << " (" << scene.lane_context.lanes_left
            << " lanes to the left, " << scene.lane_context.lanes_right << " to the right)";
    } else {
        out << " in " << scene.lane_context.descriptor;
    }
    out << " at (" << fixed(scene.ego.x, 1) << ", " << fixed(scene.ego.y, 1) << ") m, speed "
        << fixed(scene.ego.speed, 1) << " m/s, heading " << fixed(scene.ego.heading, 2) << " rad.\n";

    std::vector<const VehicleState*> ordered;
    ordered.reserve(scene.neighbors.size());
    for (const VehicleState& n : scene.neighbors) ordered.push_back(&n);
    std::sort(ordered.begin(), ordered.end(),
              [](const VehicleState* a, const VehicleState* b) { return a->id < b->id; });
    for (const VehicleState* n : ordered) {
        out << "Vehicle " << n->id << " (" << to_string(n->klass) << ") at relative (" << fixed(n->x, 1)
            << ", " << fixed(n->y, 1) << ") m, speed " << fixed(n->speed, 1) << " m/s, heading "
            << fixed(n->heading, 2) << " rad.\n";
    }
    out << "Navigation: " << scene.navigation_instruction;
    return out.str();
}

Action label_action(const TrajectoryTable& table, long ego_id, long frame, const LabelerParams& params) {
    const TrajectoryRow* start = table.find(frame, ego_id);
    const TrajectoryRow* end = table.find(frame + params.horizon, ego_id);
    if (!start || !end) throw TrackTooShort("track of id " + std::to_string(ego_id) + " does not cover frames " +
                                            std::to_string(frame) + ".." + std::to_string(frame + params.horizon));

    // Lane change first: any lane-id switch within the horizon.
    if (start->lane_id) {
        const std::vector<std::size_t>* track = table.track(ego_id);
        for (std::size_t idx : *track) {
            const TrajectoryRow& r = table.rows()[idx];
            if (r.frame <= frame || r.frame > frame + params.horizon) continue;
            if (r.lane_id && *r.lane_id != *start->lane_id) {
                const Vec2 disp = rotated({end->x - start->x, end->y - start->y}, -start->heading);
                return disp.y > 0.0 ? Action::LaneChangeLeft : Action::LaneChangeRight;
            }
        }
    }

    const double dheading = normalize_angle(end->heading - start->heading);
    if (std::abs(dheading) > params.turn_threshold) {
        return dheading > 0.0 ? Action::TurnLeft : Action::TurnRight;
    }

    const double dt = static_cast<double>(params.horizon) / table.frame_rate();
    const double accel = (end->speed - start->speed) / dt;
    if (accel > params.accel_threshold) return Action::Accelerate;
    if (accel < -params.accel_threshold) return Action::Decelerate;
    return Action::Idle;
}

std::map<std::pair<long, long>, Action> parse_label_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open label file: " + path);
    std::map<std::pair<long, long>, Action> labels;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = line;
        if (t.empty()) continue;
        std::stringstream ss(t);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c))
            throw MalformedRow(line_no, "expected ego_id,frame,action");
        if (!header_seen) {
            header_seen = true;
            if (a == "ego_id") continue;  // header row
        }
        long id = 0, frame = 0;
        auto r1 = std::from_chars(a.data(), a.data() + a.size(), id);
        auto r2 = std::from_chars(b.data(), b.data() + b.size(), frame);
        if (r1.ec != std::errc{} || r2.ec != std::errc{}) throw MalformedRow(line_no, "bad id/frame");
        while (!c.empty() && (c.back() == '\r' || c.back() == ' ')) c.pop_back();
        const auto action = action_from_token(c);
        if (!action) throw MalformedRow(line_no, "unknown action token: '" + c + "'");
        labels[{id, frame}] = *action;
    }
    return labels;
}

}  // namespace safedrive
