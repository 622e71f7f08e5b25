#include "safedrive/idm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "safedrive/errors.hpp"

namespace safedrive {

double idm_accel(double v, double gap, double closing_speed, const IdmParams& params) {
    if (!(gap > 0.0)) throw NonPositiveGap("idm gap must be > 0, got " + std::to_string(gap));
    const double desired_gap = params.min_gap + v * params.time_headway +
                               v * closing_speed / (2.0 * std::sqrt(params.max_accel * params.comfortable_decel));
    const double ratio = desired_gap / gap;
    const double a =
        params.max_accel * (1.0 - std::pow(v / params.desired_speed, params.accel_exponent) - ratio * ratio);
    return std::clamp(a, -params.emergency_decel, params.max_accel);
}

Action idm_policy(const Scene& scene, const IdmParams& params, double lateral_tolerance) {
    // Neighbors are in the ego frame: x forward, y left.
    const VehicleState* leader = nullptr;
    for (const VehicleState& n : scene.neighbors) {
        if (n.x <= 0.0 || std::abs(n.y) > lateral_tolerance) continue;
        if (!leader || n.x < leader->x) leader = &n;
    }

    double a;
    if (!leader) {
        a = params.max_accel *
            (1.0 - std::pow(scene.ego.speed / params.desired_speed, params.accel_exponent));
    } else {
        const double gap = leader->x - (scene.ego.length + leader->length) / 2.0;
        if (gap <= 0.0) {
            a = -params.emergency_decel;
        } else {
            // Leader speed projected onto the ego direction of travel.
            const double leader_speed = leader->speed * std::cos(leader->heading);
            a = idm_accel(scene.ego.speed, gap, scene.ego.speed - leader_speed, params);
        }
    }

    if (a > 0.3) return Action::Accelerate;
    if (a < -0.3) return Action::Decelerate;
    return Action::Idle;
}

}  // namespace safedrive
