#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "safedrive/geometry.hpp"
#include "safedrive/vehicle.hpp"

namespace safedrive {

// Shape parameters of the driver risk field. The field is a ridge along
// the vehicle's predicted travel arc: a parabolic height profile along
// arc length with a Gaussian cross-section whose width grows linearly
// with arc length.
struct DrfParams {
    double p = 0.0064;        // parabola steepness, 1/m^2
    double t_la = 3.5;        // look-ahead time, s
    double m = 0.08;          // width slope per metre of arc length
    double k_inner = 0.2;     // width gain vs |steering|, inner side, 1/rad
    double k_outer = 1.14;    // width gain vs |steering|, outer side, 1/rad
    std::optional<double> c;  // base half-width, m; vehicle width/4 when unset
    double delta_straight = 1e-3;  // |steering| below this uses ray geometry, rad
    std::optional<double> s_max;   // field truncation length, m; speed*t_la when unset

    double base_width(double vehicle_width) const { return c ? *c : vehicle_width / 4.0; }
    double truncation_length(double speed) const { return s_max ? *s_max : speed * t_la; }
};

// Regular planar grid. Cell (ix, iy) has its center at
// origin + ((ix + 0.5) * resolution, (iy + 0.5) * resolution); values are
// stored row-major, rows along y.
struct Grid {
    double origin_x = 0.0;
    double origin_y = 0.0;
    std::size_t nx = 1;
    std::size_t ny = 1;
    double resolution = 0.5;  // m/cell

    std::size_t size() const { return nx * ny; }
    std::size_t index(std::size_t ix, std::size_t iy) const { return iy * nx + ix; }
    Vec2 cell_center(std::size_t ix, std::size_t iy) const {
        return {origin_x + (static_cast<double>(ix) + 0.5) * resolution,
                origin_y + (static_cast<double>(iy) + 0.5) * resolution};
    }
    bool operator==(const Grid&) const = default;
};

// Extent of an ego-centered grid; turned into a concrete Grid per frame.
struct GridSpec {
    double width = 100.0;   // m, along x
    double height = 60.0;   // m, along y
    double resolution = 0.5;

    Grid centered_at(double cx, double cy) const;
};

struct ScalarField {
    Grid grid;
    std::vector<double> values;  // nx*ny, non-negative, row-major

    double at(std::size_t ix, std::size_t iy) const { return values[grid.index(ix, iy)]; }
};

// Class -> collision cost. Unknown classes fall back to default_cost.
struct CostTable {
    std::map<VehicleClass, double> costs = {
        {VehicleClass::Sedan, 1.0},  {VehicleClass::Truck, 2.0},      {VehicleClass::Bus, 2.0},
        {VehicleClass::Motorcycle, 0.8}, {VehicleClass::Vru, 3.0},
    };
    double default_cost = 1.0;

    double cost_of(VehicleClass c) const {
        auto it = costs.find(c);
        return it == costs.end() ? default_cost : it->second;
    }

    CostTable scaled(double lambda) const;
};

// Predicted travel geometry under constant steering.
struct ArcGeometry {
    enum class Mode { Arc, Straight };
    Mode mode = Mode::Straight;
    double radius = 0.0;    // m, Arc only
    Vec2 center;            // turn center, Arc only
    int turn_sign = 0;      // +1 left, -1 right, 0 straight
    Vec2 position;          // vehicle reference point
    double heading = 0.0;
};

enum class Side { Inner, Outer };

// Path-relative coordinates of a point: distance s along the predicted
// path (negative behind the vehicle) and unsigned lateral offset.
struct PathCoordinates {
    double s = 0.0;
    double lateral_offset = 0.0;
    Side side = Side::Inner;
};

enum class QprConvention { GridSum, AreaIntegral };

const char* to_string(QprConvention c);
QprConvention qpr_convention_from_string(const std::string& s);

enum class Relation { Front, Rear };

struct PerVehicleShare {
    double front_share = 0.0;
    double rear_share = 0.0;
    Relation relation = Relation::Front;

    double total() const { return front_share + rear_share; }
};

struct QprReport {
    double total = 0.0;
    double front = 0.0;
    double rear = 0.0;
    std::map<long, PerVehicleShare> per_vehicle;
    Grid grid;
    QprConvention convention = QprConvention::AreaIntegral;
};

// ---- operations ----

// Travel arc from the kinematic model: radius = wheelbase / |tan(steering)|,
// center perpendicular to the heading on the side of the steering sign.
// |steering| < delta_straight degenerates to a straight ray.
ArcGeometry predicted_arc(const VehicleState& state, const DrfParams& params);

PathCoordinates path_coordinates(Vec2 point, const VehicleState& state, const ArcGeometry& arc);

// Height profile a(s) = p * (s - speed*t_la)^2 on [0, speed*t_la], zero beyond.
double drf_height(double s, double speed, const DrfParams& params);

// Cross-section width sigma(s) = (m + k_side * |steering|) * s + c.
double drf_width(double s, double steering, Side side, const DrfParams& params, double vehicle_width);

// Field value at a single point; arc must come from predicted_arc(state, params).
double drf_value_at(Vec2 point, const VehicleState& state, const DrfParams& params, const ArcGeometry& arc);

// Samples the field at every cell center of the grid.
ScalarField drf_evaluate(const VehicleState& state, const DrfParams& params, const Grid& grid);

// Grid cells whose centers fall inside the vehicle's oriented footprint.
std::vector<std::size_t> footprint_cells(const VehicleState& state, const Grid& grid);

// Rasterizes every vehicle (optionally skipping one id) as an oriented
// rectangle carrying its class cost; overlaps keep the maximum cost.
ScalarField cost_map(const std::vector<VehicleState>& vehicles, const CostTable& costs, const Grid& grid,
                     std::optional<long> exclude = std::nullopt);

struct QprComponent {
    double value = 0.0;
    std::map<long, double> shares;
};

// Front risk: the ego field weighted by the neighbors' cost map and summed
// across the grid (times resolution^2 under AreaIntegral). Shares are
// attributed by rasterizing each neighbor alone; when footprints overlap
// the combined value uses the per-cell maximum cost and shares are
// rescaled proportionally to keep their sum equal to the component.
QprComponent qpr_front(const VehicleState& ego, const std::vector<VehicleState>& neighbors,
                       const DrfParams& params, const CostTable& costs, const Grid& grid,
                       QprConvention convention = QprConvention::AreaIntegral);

// Rear risk: for each neighbor behind the ego (negative longitudinal
// coordinate in the ego frame), that neighbor's own field evaluated over
// the ego footprint cells, weighted by the ego's class cost.
QprComponent qpr_rear(const VehicleState& ego, const std::vector<VehicleState>& neighbors,
                      const DrfParams& params, const CostTable& costs, const Grid& grid,
                      QprConvention convention = QprConvention::AreaIntegral);

// Omnidirectional risk: neighbors are split by the behind/ahead
// classifier, the two components are computed and merged into one report
// with per-vehicle attribution.
QprReport qpr_total(const VehicleState& ego, const std::vector<VehicleState>& neighbors,
                    const DrfParams& params, const CostTable& costs, const Grid& grid,
                    QprConvention convention = QprConvention::AreaIntegral);

// True when the neighbor's longitudinal coordinate in the ego frame is negative.
bool is_behind(const VehicleState& ego, const VehicleState& neighbor);

}  // namespace safedrive
