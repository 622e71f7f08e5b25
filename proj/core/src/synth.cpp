#include "safedrive/synth.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "safedrive/errors.hpp"
#include "safedrive/geometry.hpp"

namespace safedrive {

namespace {

constexpr double kFrameRate = 25.0;

struct ParamReader {
    const std::map<std::string, double>& given;
    std::map<std::string, double> known;

    double get(const std::string& name, double fallback, double lo, double hi) {
        known[name] = fallback;
        auto it = given.find(name);
        const double v = it == given.end() ? fallback : it->second;
        if (!(v >= lo && v <= hi))
            throw BadParameter("parameter '" + name + "' = " + std::to_string(v) + " outside [" +
                               std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return v;
    }

    void reject_unknown() const {
        for (const auto& [name, value] : given) {
            if (!known.count(name)) throw BadParameter("unknown parameter '" + name + "'");
        }
    }
};

TrajectoryRow make_row(long frame, long id, double x, double y, double vx, double vy,
                       std::optional<long> lane = std::nullopt,
                       std::optional<double> yaw_rate = std::nullopt) {
    TrajectoryRow r;
    r.frame = frame;
    r.id = id;
    r.x = x;
    r.y = y;
    r.x_velocity = vx;
    r.y_velocity = vy;
    r.lane_id = lane;
    r.yaw_rate = yaw_rate;
    r.speed = std::hypot(vx, vy);
    return r;
}

// Heading per row mirrors the parser's rule so synthesized tables and
// round-tripped tables agree.
void finalize_headings(std::vector<TrajectoryRow>& rows) {
    std::map<long, double> carried;
    std::sort(rows.begin(), rows.end(), [](const TrajectoryRow& a, const TrajectoryRow& b) {
        return a.id != b.id ? a.id < b.id : a.frame < b.frame;
    });
    for (TrajectoryRow& r : rows) {
        double& h = carried.try_emplace(r.id, 0.0).first->second;
        if (r.speed > 0.1) h = std::atan2(r.y_velocity, r.x_velocity);
        r.heading = normalize_angle(h);
    }
}

TrajectoryTable car_following(ParamReader& p) {
    const double speed = p.get("speed", 20.0, 0.5, 60.0);
    const double thw = p.get("thw", 2.0, 0.1, 10.0);
    const double duration = p.get("duration", 4.0, 0.2, 60.0);
    p.reject_unknown();

    const double length = 4.5;
    const long frames = static_cast<long>(std::lround(duration * kFrameRate));
    std::vector<TrajectoryRow> rows;
    for (long f = 0; f <= frames; ++f) {
        const double t = static_cast<double>(f) / kFrameRate;
        const double ego_x = speed * t;
        // Bumper-to-bumper gap = thw * speed.
        const double leader_x = ego_x + thw * speed + length;
        rows.push_back(make_row(f, 1, ego_x, 0.0, speed, 0.0, 2));
        rows.push_back(make_row(f, 2, leader_x, 0.0, speed, 0.0, 2));
    }
    finalize_headings(rows);
    return TrajectoryTable(std::move(rows), kFrameRate, "synthetic car_following");
}

TrajectoryTable lane_change_conflict(ParamReader& p) {
    const double ego_speed = p.get("ego_speed", 25.0, 0.5, 60.0);
    const double leader_speed = p.get("leader_speed", 22.0, 0.0, 60.0);
    const double leader_gap = p.get("leader_gap", 40.0, 5.0, 200.0);
    const double overtaker_speed = p.get("overtaker_speed", 36.0, 0.5, 80.0);
    const double overtaker_gap = p.get("overtaker_gap", 15.0, 2.0, 200.0);
    const double duration = p.get("duration", 4.0, 0.2, 60.0);
    p.reject_unknown();

    const double length = 4.5;
    const double lane_width = 3.5;
    const long frames = static_cast<long>(std::lround(duration * kFrameRate));
    std::vector<TrajectoryRow> rows;
    for (long f = 0; f <= frames; ++f) {
        const double t = static_cast<double>(f) / kFrameRate;
        const double ego_x = ego_speed * t;
        rows.push_back(make_row(f, 1, ego_x, 0.0, ego_speed, 0.0, 2));
        rows.push_back(make_row(f, 2, leader_gap + length + leader_speed * t, 0.0, leader_speed, 0.0, 2));
        // Fast overtaker approaching from behind in the left lane.
        rows.push_back(make_row(f, 3, -(overtaker_gap + length) + overtaker_speed * t, lane_width,
                                overtaker_speed, 0.0, 3));
    }
    finalize_headings(rows);
    return TrajectoryTable(std::move(rows), kFrameRate, "synthetic lane_change_conflict");
}

TrajectoryTable intersection_approach(ParamReader& p) {
    const double ego_speed = p.get("ego_speed", 10.0, 0.5, 30.0);
    const double start_offset = p.get("start_offset", 60.0, 10.0, 300.0);
    const double queue_count = p.get("queue_count", 2.0, 0.0, 6.0);
    p.reject_unknown();

    const long n_queue = static_cast<long>(std::lround(queue_count));
    const double duration = 2.0 * start_offset / ego_speed;
    const long frames = static_cast<long>(std::lround(duration * kFrameRate));

    // The crossing queue waits just outside the ego lane: the first
    // vehicle's front bumper rests 0.5 m past the lane edge (y = 1.5).
    // A brief initial creep to rest pins their heading toward the lane.
    const double creep_v0 = 0.4;
    const double creep_time = 0.5;
    const double creep_dist = creep_v0 * creep_time / 2.0;
    const double veh_len = 4.5;
    const double queue_spacing = veh_len + 1.5;

    std::vector<TrajectoryRow> rows;
    for (long f = 0; f <= frames; ++f) {
        const double t = static_cast<double>(f) / kFrameRate;
        rows.push_back(make_row(f, 1, -start_offset + ego_speed * t, 0.0, ego_speed, 0.0));
        for (long q = 0; q < n_queue; ++q) {
            const double rest_y = 1.5 + veh_len / 2.0 + static_cast<double>(q) * queue_spacing;
            double v = 0.0, y = rest_y;
            if (t < creep_time) {
                v = creep_v0 * (1.0 - t / creep_time);
                const double travelled = creep_v0 * t - creep_v0 * t * t / (2.0 * creep_time);
                y = rest_y + (creep_dist - travelled);
            }
            rows.push_back(make_row(f, 2 + q, 0.0, y, 0.0, -v));
        }
    }
    finalize_headings(rows);
    return TrajectoryTable(std::move(rows), kFrameRate, "synthetic intersection_approach");
}

TrajectoryTable roundabout_merge(ParamReader& p) {
    const double ego_speed = p.get("ego_speed", 8.0, 0.5, 20.0);
    const double circ_speed = p.get("circulating_speed", 8.0, 0.5, 20.0);
    const double radius = p.get("radius", 20.0, 5.0, 60.0);
    const double approach = p.get("approach", 25.0, 10.0, 120.0);
    const double stop_gap = p.get("stop_gap", 5.0, 2.0, 20.0);
    const double cruise_time = p.get("cruise_time", 1.0, 0.0, 20.0);
    const double circ_pass_time = p.get("circ_pass_time", 2.5, 0.0, 30.0);
    const double duration = p.get("duration", 8.0, 1.0, 60.0);
    p.reject_unknown();

    const double brake_distance = approach - stop_gap - ego_speed * cruise_time;
    if (brake_distance <= 0.0)
        throw BadParameter("approach too short for the cruise phase plus stop_gap");
    // Cruise toward the entry, then brake so the stop coincides with the
    // circulating vehicle sweeping past the entry point at the origin.
    const double brake = ego_speed * ego_speed / (2.0 * brake_distance);
    const double t_stop = cruise_time + ego_speed / brake;
    const double omega = circ_speed / radius;
    const long frames = static_cast<long>(std::lround(duration * kFrameRate));

    std::vector<TrajectoryRow> rows;
    for (long f = 0; f <= frames; ++f) {
        const double t = static_cast<double>(f) / kFrameRate;
        double v = 0.0, y = -stop_gap;
        if (t < cruise_time) {
            v = ego_speed;
            y = -approach + ego_speed * t;
        } else if (t < t_stop) {
            const double tb = t - cruise_time;
            v = ego_speed - brake * tb;
            y = -approach + ego_speed * cruise_time + ego_speed * tb - brake * tb * tb / 2.0;
        }
        rows.push_back(make_row(f, 1, 0.0, y, 0.0, v));

        const double theta = -M_PI / 2.0 + omega * (t - circ_pass_time);
        const double cx = radius * std::cos(theta);
        const double cy = radius + radius * std::sin(theta);
        rows.push_back(make_row(f, 2, cx, cy, -circ_speed * std::sin(theta), circ_speed * std::cos(theta),
                                std::nullopt, omega));
    }
    finalize_headings(rows);
    return TrajectoryTable(std::move(rows), kFrameRate, "synthetic roundabout_merge");
}

}  // namespace

const char* to_string(SynthKind k) {
    switch (k) {
        case SynthKind::CarFollowing: return "car_following";
        case SynthKind::LaneChangeConflict: return "lane_change_conflict";
        case SynthKind::IntersectionApproach: return "intersection_approach";
        case SynthKind::RoundaboutMerge: return "roundabout_merge";
    }
    return "car_following";
}

SynthKind synth_kind_from_string(const std::string& s) {
    if (s == "car_following") return SynthKind::CarFollowing;
    if (s == "lane_change_conflict") return SynthKind::LaneChangeConflict;
    if (s == "intersection_approach") return SynthKind::IntersectionApproach;
    if (s == "roundabout_merge") return SynthKind::RoundaboutMerge;
    throw BadParameter("unknown scenario kind: " + s);
}

SynthSpec SynthSpec::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw BadParameter(std::string("invalid scenario JSON: ") + e.what());
    }
    SynthSpec spec;
    if (!j.contains("kind")) throw BadParameter("scenario JSON needs a 'kind' field");
    spec.kind = synth_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("parameters")) {
        for (const auto& [key, value] : j.at("parameters").items()) {
            if (!value.is_number()) throw BadParameter("parameter '" + key + "' must be numeric");
            spec.parameters[key] = value.get<double>();
        }
    }
    return spec;
}

std::string SynthSpec::to_json_text() const {
    nlohmann::json j;
    j["kind"] = to_string(kind);
    j["parameters"] = parameters;
    return j.dump(2);
}

TrajectoryTable synth_scenario(const SynthSpec& spec) {
    ParamReader reader{spec.parameters, {}};
    switch (spec.kind) {
        case SynthKind::CarFollowing: return car_following(reader);
        case SynthKind::LaneChangeConflict: return lane_change_conflict(reader);
        case SynthKind::IntersectionApproach: return intersection_approach(reader);
        case SynthKind::RoundaboutMerge: return roundabout_merge(reader);
    }
    throw BadParameter("unknown scenario kind");
}

}  // namespace safedrive
