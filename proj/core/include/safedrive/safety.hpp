#pragma once

#include <string>

#include "safedrive/idm.hpp"
#include "safedrive/scene.hpp"

namespace safedrive {

// Thresholds and action dynamics of the kinematic safety check.
struct OracleParams {
    double ttc_threshold = 2.0;    // s
    double decel_threshold = 3.0;  // m/s^2 of braking forced on others
    double horizon = 4.0;          // s of rollout
    double dt = 0.1;               // rollout step, s

    double action_accel = 2.0;          // m/s^2
    double action_decel = 2.0;          // m/s^2
    double lane_change_duration = 3.0;  // s, linear lateral ramp
    double lane_width = 3.5;            // m
    double turn_radius = 12.0;          // m

    double projection_horizon = 20.0;      // s, collision-course search
    double projection_dt = 0.05;           // s
    double follower_lateral_tolerance = 1.75;  // m, corridor half-width
};

struct SafetyVerdict {
    bool safe = true;
    double min_ttc = std::numeric_limits<double>::infinity();  // s
    double induced_decel = 0.0;  // m/s^2, max braking forced on any other vehicle
    std::string cause = "ok";
};

// Rolls the scene forward while the ego follows the action primitive.
// Other vehicles keep constant velocity, except followers in the ego's
// current (and, for lane changes, target) corridor, which are
// re-controlled by IDM with the ego as leader; the braking IDM demands of
// them is the induced deceleration. TTC at each step is the earliest
// projected overlap of the oriented footprints under frozen velocities.
SafetyVerdict safety_oracle(const Scene& scene, Action action, const OracleParams& params = {},
                            const IdmParams& idm = {});

}  // namespace safedrive
