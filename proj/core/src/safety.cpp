#include "safedrive/safety.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <vector>

#include "safedrive/errors.hpp"
#include "safedrive/geometry.hpp"

namespace safedrive {

namespace {

struct Body {
    Vec2 pos;
    Vec2 vel;
    double heading = 0.0;
    double half_length = 2.25;
    double half_width = 1.0;
    long id = 0;

    OrientedRect rect_at(double tau) const {
        return {pos + vel * tau, heading, half_length, half_width};
    }
};

// Earliest projected footprint overlap under frozen velocities, or +inf.
double projected_ttc(const Body& ego, const Body& other, const OracleParams& p) {
    const Vec2 dp = other.pos - ego.pos;
    const Vec2 dv = other.vel - ego.vel;
    const double reach = std::hypot(ego.half_length + other.half_length, ego.half_width + other.half_width);
    if (dp.norm() > dv.norm() * p.projection_horizon + 2.0 * reach)
        return std::numeric_limits<double>::infinity();
    for (double tau = 0.0; tau <= p.projection_horizon; tau += p.projection_dt) {
        if (rects_intersect(ego.rect_at(tau), other.rect_at(tau))) return tau;
    }
    return std::numeric_limits<double>::infinity();
}

std::string fixed(double v, int decimals) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, decimals);
    return std::string(buf, ptr);
}

}  // namespace

SafetyVerdict safety_oracle(const Scene& scene, Action action, const OracleParams& p, const IdmParams& idm) {
    // Everything runs in the ego frame at decision time: ego at the
    // origin heading +x, neighbors as stored in the scene.
    const double v0 = scene.ego.speed;
    const double lateral_target = action == Action::LaneChangeLeft    ? p.lane_width
                                  : action == Action::LaneChangeRight ? -p.lane_width
                                                                      : 0.0;
    const int turn_sign = action == Action::TurnLeft ? +1 : action == Action::TurnRight ? -1 : 0;

    struct Follower {
        std::size_t index;
        double x;
        double speed;
        double max_brake = 0.0;
    };
    std::vector<Body> others;
    std::vector<Follower> followers;
    for (const VehicleState& n : scene.neighbors) {
        Body b;
        b.pos = {n.x, n.y};
        b.vel = {n.speed * std::cos(n.heading), n.speed * std::sin(n.heading)};
        b.heading = n.heading;
        b.half_length = n.length / 2.0;
        b.half_width = n.width / 2.0;
        b.id = n.id;
        others.push_back(b);
        const bool in_current = std::abs(n.y) <= p.follower_lateral_tolerance;
        const bool in_target = lateral_target != 0.0 &&
                               std::abs(n.y - lateral_target) <= p.follower_lateral_tolerance;
        if (n.x < 0.0 && (in_current || in_target)) {
            followers.push_back({others.size() - 1, n.x, n.speed});
        }
    }

    Body ego;
    ego.pos = {0.0, 0.0};
    ego.half_length = scene.ego.length / 2.0;
    ego.half_width = scene.ego.width / 2.0;
    ego.id = scene.ego.id;

    double ego_speed = v0;
    double ego_heading = 0.0;
    double min_ttc = std::numeric_limits<double>::infinity();
    double induced = 0.0;
    long induced_id = 0;

    const int steps = static_cast<int>(std::lround(p.horizon / p.dt));
    for (int step = 0; step <= steps; ++step) {
        const double t = step * p.dt;

        // Ego state under the action primitive.
        switch (action) {
            case Action::Accelerate:
                ego_speed = v0 + p.action_accel * t;
                break;
            case Action::Decelerate:
                ego_speed = std::max(0.0, v0 - p.action_decel * t);
                break;
            case Action::TurnLeft:
            case Action::TurnRight:
                ego_heading = turn_sign * v0 * t / p.turn_radius;
                break;
            default:
                break;
        }
        double lateral_vel = 0.0;
        if (lateral_target != 0.0 && t < p.lane_change_duration) {
            lateral_vel = lateral_target / p.lane_change_duration;
        }
        ego.heading = ego_heading;
        if (turn_sign != 0) {
            ego.vel = {ego_speed * std::cos(ego_heading), ego_speed * std::sin(ego_heading)};
        } else {
            ego.vel = {ego_speed, lateral_vel};
        }

        // TTC against every other vehicle at this step.
        for (const Body& other : others) {
            min_ttc = std::min(min_ttc, projected_ttc(ego, other, p));
        }

        if (step == steps) break;

        // Advance ego.
        ego.pos = ego.pos + ego.vel * p.dt;

        // Advance others; followers get IDM control with the ego as leader.
        for (Follower& f : followers) {
            Body& b = others[f.index];
            const double gap = (ego.pos.x - b.pos.x) - (ego.half_length + b.half_length);
            double accel;
            if (gap <= 0.0) {
                accel = -idm.emergency_decel;
            } else {
                IdmParams follower_idm = idm;
                follower_idm.desired_speed = std::max(f.speed, 0.1);  // keeps them steady when free
                accel = idm_accel(b.vel.x, gap, b.vel.x - ego.vel.x, follower_idm);
            }
            if (-accel > induced) {
                induced = -accel;
                induced_id = b.id;
            }
            b.vel.x = std::max(0.0, b.vel.x + accel * p.dt);
        }
        for (Body& b : others) b.pos = b.pos + b.vel * p.dt;
    }

    SafetyVerdict verdict;
    verdict.min_ttc = min_ttc;
    verdict.induced_decel = induced;
    const bool ttc_ok = min_ttc >= p.ttc_threshold;
    const bool decel_ok = induced <= p.decel_threshold;
    verdict.safe = ttc_ok && decel_ok;
    if (verdict.safe) {
        verdict.cause = "ok";
    } else {
        std::string cause;
        if (!ttc_ok) cause = "min TTC " + fixed(min_ttc, 2) + " s below " + fixed(p.ttc_threshold, 2) + " s";
        if (!decel_ok) {
            if (!cause.empty()) cause += "; ";
            cause += "induced braking " + fixed(induced, 2) + " m/s^2 on vehicle " +
                     std::to_string(induced_id) + " exceeds " + fixed(p.decel_threshold, 2) + " m/s^2";
        }
        verdict.cause = cause;
    }
    return verdict;
}

}  // namespace safedrive
