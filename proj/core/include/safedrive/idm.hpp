#pragma once

#include "safedrive/scene.hpp"

namespace safedrive {

struct IdmParams {
    double desired_speed = 30.0;     // v0, m/s
    double time_headway = 1.5;       // T, s
    double max_accel = 1.5;          // a_max, m/s^2
    double comfortable_decel = 2.0;  // b, m/s^2
    double min_gap = 2.0;            // s0, m
    double accel_exponent = 4.0;
    double emergency_decel = 8.0;    // clamp floor, m/s^2
};

// Car-following acceleration
//   a = a_max * (1 - (v/v0)^exponent - (s*/s)^2)
//   s* = s0 + v*T + v*dv / (2*sqrt(a_max*b))
// clamped to [-emergency_decel, max_accel]. `closing_speed` is
// v_follower - v_leader. Throws NonPositiveGap for s <= 0.
double idm_accel(double v, double gap, double closing_speed, const IdmParams& params);

// Discretized IDM baseline: pick the nearest in-corridor leader ahead
// (straight-path projection, used for lane following and as the
// conflict-point proxy alike), apply idm_accel, then threshold into
// Accelerate / Decelerate / Idle. Never emits lane changes or turns.
Action idm_policy(const Scene& scene, const IdmParams& params, double lateral_tolerance = 1.75);

}  // namespace safedrive
