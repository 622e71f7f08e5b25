#pragma once

#include <map>
#include <string>

#include "safedrive/trajectory.hpp"

namespace safedrive {

enum class SynthKind { CarFollowing, LaneChangeConflict, IntersectionApproach, RoundaboutMerge };

const char* to_string(SynthKind k);
SynthKind synth_kind_from_string(const std::string& s);

// Scenario recipe: a kind plus numeric parameters. Unknown parameter
// names and out-of-range values are rejected. Defaults per kind:
//
//   car_following:         speed=20, thw=2, duration=4
//   lane_change_conflict:  ego_speed=25, leader_speed=22, leader_gap=40,
//                          overtaker_speed=36, overtaker_gap=15, duration=4
//   intersection_approach: ego_speed=10, start_offset=60, queue_count=2
//   roundabout_merge:      ego_speed=8, circulating_speed=8, radius=20,
//                          approach=25, stop_gap=5, cruise_time=1,
//                          circ_pass_time=2.5, duration=8
//
// The ego always has id 1. All rollouts are deterministic at 25 Hz.
struct SynthSpec {
    SynthKind kind = SynthKind::CarFollowing;
    std::map<std::string, double> parameters;

    static SynthSpec from_json_text(const std::string& text);
    std::string to_json_text() const;
};

TrajectoryTable synth_scenario(const SynthSpec& spec);

}  // namespace safedrive
