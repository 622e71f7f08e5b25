#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "safedrive/vehicle.hpp"

namespace safedrive {

struct TrajectoryRow {
    long frame = 0;
    long id = 0;
    double x = 0.0;
    double y = 0.0;
    double width = 2.0;
    double length = 4.5;
    double x_velocity = 0.0;
    double y_velocity = 0.0;
    std::optional<long> lane_id;
    VehicleClass klass = VehicleClass::Sedan;
    std::optional<double> yaw_rate;  // rad/s
    double heading = 0.0;            // derived at parse time
    double speed = 0.0;              // derived at parse time
};

// Immutable after load. Rows are kept sorted by (id, frame); per-frame and
// per-track indexes are built once.
class TrajectoryTable {
public:
    explicit TrajectoryTable(std::vector<TrajectoryRow> rows, double frame_rate = 25.0,
                             std::string metadata = {});

    const std::vector<TrajectoryRow>& rows() const { return rows_; }
    double frame_rate() const { return frame_rate_; }
    const std::string& metadata() const { return metadata_; }

    const TrajectoryRow* find(long frame, long id) const;
    // Row indices for every vehicle present at the frame, ascending id.
    std::vector<const TrajectoryRow*> at_frame(long frame) const;
    // The ordered frames of one vehicle's track.
    const std::vector<std::size_t>* track(long id) const;

    std::vector<long> frames() const;
    bool empty() const { return rows_.empty(); }

private:
    std::vector<TrajectoryRow> rows_;
    double frame_rate_;
    std::string metadata_;
    std::map<long, std::vector<std::size_t>> by_frame_;
    std::map<long, std::vector<std::size_t>> by_id_;
};

// Conversion knobs for rows -> VehicleState. Recorded tracks carry no
// steering or wheelbase, so both are estimated.
struct StateEstimation {
    double wheelbase_ratio = 0.6;   // wheelbase = ratio * length
    double min_speed_for_heading = 0.1;  // m/s
};

VehicleState row_to_state(const TrajectoryRow& row, const StateEstimation& est = {});

// Reads a highD-style tracks CSV. Header aliases (case-insensitive):
// frame/frameId, id/trackId, x, y, width, height/length, xVelocity,
// yVelocity, laneId/lane_id, class/vehicleClass, yawRate/yaw_rate.
// Leading '#'-comment lines may carry "key=value" metadata
// (frame_rate=...). Heading falls back to the previous frame of the same
// track when the speed is at or below 0.1 m/s.
TrajectoryTable parse_tracks(std::istream& in);
TrajectoryTable parse_tracks(const std::string& path);

// Canonical serialization; parse_tracks(serialize_tracks(t)) == t.
void serialize_tracks(const TrajectoryTable& table, std::ostream& out);
void serialize_tracks(const TrajectoryTable& table, const std::string& path);

}  // namespace safedrive
