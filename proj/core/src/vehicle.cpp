#include "safedrive/vehicle.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "safedrive/errors.hpp"

namespace safedrive {

VehicleClass vehicle_class_from_string(const std::string& s) {
    std::string k;
    k.reserve(s.size());
    for (char c : s) k.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (k == "sedan" || k == "car") return VehicleClass::Sedan;
    if (k == "truck" || k == "truck_bus" || k == "trailer" || k == "van") return VehicleClass::Truck;
    if (k == "bus") return VehicleClass::Bus;
    if (k == "motorcycle" || k == "motorbike") return VehicleClass::Motorcycle;
    if (k == "vru" || k == "pedestrian" || k == "bicycle" || k == "cyclist") return VehicleClass::Vru;
    return VehicleClass::Other;
}

const char* to_string(VehicleClass c) {
    switch (c) {
        case VehicleClass::Sedan: return "Sedan";
        case VehicleClass::Truck: return "Truck";
        case VehicleClass::Bus: return "Bus";
        case VehicleClass::Motorcycle: return "Motorcycle";
        case VehicleClass::Vru: return "VRU";
        case VehicleClass::Other: return "Other";
    }
    return "Other";
}

void VehicleState::validate() const {
    if (!(speed >= 0.0) || !std::isfinite(speed)) throw InvalidState("speed must be finite and >= 0");
    if (!(width > 0.0) || !(length > 0.0) || !(wheelbase > 0.0))
        throw InvalidState("width, length and wheelbase must be > 0");
    if (!(heading > -M_PI - 1e-12) || !(heading <= M_PI + 1e-12))
        throw InvalidState("heading must be normalized to (-pi, pi]");
    if (!(std::abs(steering) < M_PI / 2.0)) throw InvalidState("|steering| must be < pi/2");
    if (!std::isfinite(x) || !std::isfinite(y)) throw InvalidState("position must be finite");
}

}  // namespace safedrive
