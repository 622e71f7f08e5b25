#pragma once

#include <cstdint>
#include <string>

#include "safedrive/geometry.hpp"

namespace safedrive {

enum class VehicleClass {
    Sedan,
    Truck,
    Bus,
    Motorcycle,
    Vru,
    Other,
};

// Case-insensitive; maps common dataset labels ("car", "pedestrian",
// "bicycle", ...) onto the closed enumeration. Unrecognized labels map
// to Other.
VehicleClass vehicle_class_from_string(const std::string& s);
const char* to_string(VehicleClass c);

// One road user at one frame, world coordinates.
//
// Conventions: heading in radians, counterclockwise from +x, normalized
// to (-pi, pi]. Positive steering turns left. Speed is the scalar
// velocity magnitude.
struct VehicleState {
    long id = 0;
    VehicleClass klass = VehicleClass::Sedan;
    double x = 0.0;           // m
    double y = 0.0;           // m
    double heading = 0.0;     // rad
    double speed = 0.0;       // m/s, >= 0
    double steering = 0.0;    // rad, |steering| < pi/2
    double width = 2.0;       // m
    double length = 4.5;      // m
    double wheelbase = 2.7;   // m

    Vec2 position() const { return {x, y}; }

    OrientedRect footprint() const {
        return {{x, y}, heading, length / 2.0, width / 2.0};
    }

    // Throws InvalidState when a field is out of range.
    void validate() const;
};

}  // namespace safedrive
