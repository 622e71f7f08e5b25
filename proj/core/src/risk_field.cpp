#include "safedrive/risk_field.hpp"

#include <algorithm>
#include <cmath>

#include "safedrive/errors.hpp"

namespace safedrive {

namespace {

// Lateral support cutoff: cells beyond this many sigmas are zero.
constexpr double kSigmaCutoff = 4.0;

}  // namespace

Grid GridSpec::centered_at(double cx, double cy) const {
    Grid g;
    g.resolution = resolution;
    g.nx = static_cast<std::size_t>(std::llround(width / resolution));
    g.ny = static_cast<std::size_t>(std::llround(height / resolution));
    g.nx = std::max<std::size_t>(g.nx, 1);
    g.ny = std::max<std::size_t>(g.ny, 1);
    g.origin_x = cx - static_cast<double>(g.nx) * resolution / 2.0;
    g.origin_y = cy - static_cast<double>(g.ny) * resolution / 2.0;
    return g;
}

CostTable CostTable::scaled(double lambda) const {
    CostTable out = *this;
    for (auto& [klass, cost] : out.costs) cost *= lambda;
    out.default_cost *= lambda;
    return out;
}

const char* to_string(QprConvention c) {
    return c == QprConvention::GridSum ? "grid_sum" : "area_integral";
}

QprConvention qpr_convention_from_string(const std::string& s) {
    if (s == "grid_sum") return QprConvention::GridSum;
    if (s == "area_integral") return QprConvention::AreaIntegral;
    throw ConfigError("unknown qpr convention: " + s);
}

ArcGeometry predicted_arc(const VehicleState& state, const DrfParams& params) {
    ArcGeometry arc;
    arc.position = state.position();
    arc.heading = state.heading;
    if (std::abs(state.steering) < params.delta_straight) {
        arc.mode = ArcGeometry::Mode::Straight;
        return arc;
    }
    arc.mode = ArcGeometry::Mode::Arc;
    arc.turn_sign = state.steering > 0.0 ? +1 : -1;
    arc.radius = state.wheelbase / std::abs(std::tan(state.steering));
    // Turn center sits one radius to the side of the heading.
    const double side_angle = state.heading + arc.turn_sign * M_PI / 2.0;
    arc.center = arc.position + Vec2{std::cos(side_angle), std::sin(side_angle)} * arc.radius;
    return arc;
}

PathCoordinates path_coordinates(Vec2 point, const VehicleState&, const ArcGeometry& arc) {
    PathCoordinates out;
    if (arc.mode == ArcGeometry::Mode::Straight) {
        const Vec2 d = point - arc.position;
        const Vec2 fwd{std::cos(arc.heading), std::sin(arc.heading)};
        out.s = d.dot(fwd);
        const double lateral = fwd.cross(d);  // >0 left of the heading ray
        out.lateral_offset = std::abs(lateral);
        out.side = lateral >= 0.0 ? Side::Inner : Side::Outer;  // left = inner
        return out;
    }
    const Vec2 rel = point - arc.center;
    const double r = rel.norm();
    out.lateral_offset = std::abs(r - arc.radius);
    out.side = r < arc.radius ? Side::Inner : Side::Outer;
    // Angle swept from the vehicle to the point's radial projection,
    // positive in the travel direction.
    const Vec2 rel0 = arc.position - arc.center;
    const double theta = std::atan2(rel.y, rel.x) - std::atan2(rel0.y, rel0.x);
    const double swept = std::remainder(theta * arc.turn_sign, 2.0 * M_PI);
    out.s = arc.radius * swept;
    return out;
}

double drf_height(double s, double speed, const DrfParams& params) {
    const double d_la = speed * params.t_la;
    if (s < 0.0 || s > d_la) return 0.0;
    const double d = s - d_la;
    return params.p * d * d;
}

double drf_width(double s, double steering, Side side, const DrfParams& params, double vehicle_width) {
    const double k = side == Side::Inner ? params.k_inner : params.k_outer;
    return (params.m + k * std::abs(steering)) * s + params.base_width(vehicle_width);
}

double drf_value_at(Vec2 point, const VehicleState& state, const DrfParams& params, const ArcGeometry& arc) {
    const PathCoordinates pc = path_coordinates(point, state, arc);
    if (pc.s < 0.0 || pc.s > params.truncation_length(state.speed)) return 0.0;
    const double a = drf_height(pc.s, state.speed, params);
    if (a <= 0.0) return 0.0;
    const double sigma = drf_width(pc.s, state.steering, pc.side, params, state.width);
    if (pc.lateral_offset > kSigmaCutoff * sigma) return 0.0;
    const double z = pc.lateral_offset / sigma;
    return a * std::exp(-0.5 * z * z);
}

ScalarField drf_evaluate(const VehicleState& state, const DrfParams& params, const Grid& grid) {
    ScalarField field;
    field.grid = grid;
    field.values.assign(grid.size(), 0.0);
    const ArcGeometry arc = predicted_arc(state, params);
    for (std::size_t iy = 0; iy < grid.ny; ++iy) {
        for (std::size_t ix = 0; ix < grid.nx; ++ix) {
            field.values[grid.index(ix, iy)] = drf_value_at(grid.cell_center(ix, iy), state, params, arc);
        }
    }
    return field;
}

std::vector<std::size_t> footprint_cells(const VehicleState& state, const Grid& grid) {
    std::vector<std::size_t> cells;
    const OrientedRect rect = state.footprint();
    // Bounding box in grid indices, then exact membership per center.
    const double reach = std::hypot(rect.half_length, rect.half_width);
    const auto clamp_index = [](double v, std::size_t n) {
        if (v < 0.0) return std::size_t{0};
        if (v >= static_cast<double>(n)) return n == 0 ? std::size_t{0} : n - 1;
        return static_cast<std::size_t>(v);
    };
    if (grid.nx == 0 || grid.ny == 0) return cells;
    const std::size_t ix0 = clamp_index(std::floor((state.x - reach - grid.origin_x) / grid.resolution), grid.nx);
    const std::size_t ix1 = clamp_index(std::ceil((state.x + reach - grid.origin_x) / grid.resolution), grid.nx);
    const std::size_t iy0 = clamp_index(std::floor((state.y - reach - grid.origin_y) / grid.resolution), grid.ny);
    const std::size_t iy1 = clamp_index(std::ceil((state.y + reach - grid.origin_y) / grid.resolution), grid.ny);
    for (std::size_t iy = iy0; iy <= iy1; ++iy) {
        for (std::size_t ix = ix0; ix <= ix1; ++ix) {
            if (rect.contains(grid.cell_center(ix, iy))) cells.push_back(grid.index(ix, iy));
        }
    }
    return cells;
}

ScalarField cost_map(const std::vector<VehicleState>& vehicles, const CostTable& costs, const Grid& grid,
                     std::optional<long> exclude) {
    ScalarField field;
    field.grid = grid;
    field.values.assign(grid.size(), 0.0);
    for (const VehicleState& v : vehicles) {
        if (exclude && v.id == *exclude) continue;
        const double cost = costs.cost_of(v.klass);
        for (std::size_t idx : footprint_cells(v, grid)) {
            field.values[idx] = std::max(field.values[idx], cost);
        }
    }
    return field;
}

namespace {

double convention_scale(QprConvention convention, const Grid& grid) {
    return convention == QprConvention::AreaIntegral ? grid.resolution * grid.resolution : 1.0;
}

}  // namespace

QprComponent qpr_front(const VehicleState& ego, const std::vector<VehicleState>& neighbors,
                       const DrfParams& params, const CostTable& costs, const Grid& grid,
                       QprConvention convention) {
    QprComponent out;
    if (neighbors.empty()) return out;

    const ScalarField field = drf_evaluate(ego, params, grid);
    const double scale = convention_scale(convention, grid);

    // Shares from each neighbor rasterized alone; track multiply-covered
    // cells to know whether footprints overlap inside the grid.
    std::vector<uint8_t> covered(grid.size(), 0);
    bool overlap = false;
    std::vector<std::pair<long, double>> shares;
    shares.reserve(neighbors.size());
    for (const VehicleState& n : neighbors) {
        const double cost = costs.cost_of(n.klass);
        double share = 0.0;
        for (std::size_t idx : footprint_cells(n, grid)) {
            share += cost * field.values[idx];
            if (covered[idx]) overlap = true;
            covered[idx] = 1;
        }
        shares.emplace_back(n.id, share * scale);
    }
    std::sort(shares.begin(), shares.end());

    if (!overlap) {
        // Disjoint footprints: the component is exactly the fold of the
        // per-vehicle shares, which keeps additivity over neighbors exact.
        for (const auto& [id, share] : shares) {
            out.shares[id] += share;
            out.value += share;
        }
        // Merge duplicate-id folds into value consistently.
        if (out.shares.size() != shares.size()) {
            out.value = 0.0;
            for (const auto& [id, share] : out.shares) out.value += share;
        }
        return out;
    }

    // Overlapping footprints: combined value uses the per-cell maximum
    // cost; isolated shares are rescaled to sum to it.
    const ScalarField combined = cost_map(neighbors, costs, grid);
    double value = 0.0;
    for (std::size_t i = 0; i < combined.values.size(); ++i) {
        if (combined.values[i] > 0.0) value += combined.values[i] * field.values[i];
    }
    value *= scale;
    double share_sum = 0.0;
    for (const auto& [id, share] : shares) share_sum += share;
    const double rescale = share_sum > 0.0 ? value / share_sum : 0.0;
    for (const auto& [id, share] : shares) out.shares[id] += share * rescale;
    out.value = value;
    return out;
}

bool is_behind(const VehicleState& ego, const VehicleState& neighbor) {
    const Vec2 d = neighbor.position() - ego.position();
    const Vec2 fwd{std::cos(ego.heading), std::sin(ego.heading)};
    return d.dot(fwd) < 0.0;
}

QprComponent qpr_rear(const VehicleState& ego, const std::vector<VehicleState>& neighbors,
                      const DrfParams& params, const CostTable& costs, const Grid& grid,
                      QprConvention convention) {
    QprComponent out;
    const std::vector<std::size_t> ego_cells = footprint_cells(ego, grid);
    if (ego_cells.empty()) return out;
    const double ego_cost = costs.cost_of(ego.klass);
    const double scale = convention_scale(convention, grid);

    std::vector<std::pair<long, double>> shares;
    for (const VehicleState& n : neighbors) {
        if (!is_behind(ego, n)) continue;
        const ArcGeometry arc = predicted_arc(n, params);
        double contribution = 0.0;
        for (std::size_t idx : ego_cells) {
            const std::size_t iy = idx / grid.nx;
            const std::size_t ix = idx % grid.nx;
            contribution += ego_cost * drf_value_at(grid.cell_center(ix, iy), n, params, arc);
        }
        shares.emplace_back(n.id, contribution * scale);
    }
    std::sort(shares.begin(), shares.end());
    for (const auto& [id, share] : shares) {
        out.shares[id] += share;
        out.value += share;
    }
    if (out.shares.size() != shares.size()) {
        out.value = 0.0;
        for (const auto& [id, share] : out.shares) out.value += share;
    }
    return out;
}

QprReport qpr_total(const VehicleState& ego, const std::vector<VehicleState>& neighbors,
                    const DrfParams& params, const CostTable& costs, const Grid& grid,
                    QprConvention convention) {
    QprReport report;
    report.grid = grid;
    report.convention = convention;

    std::vector<VehicleState> ahead, behind;
    for (const VehicleState& n : neighbors) {
        (is_behind(ego, n) ? behind : ahead).push_back(n);
    }

    const QprComponent front = qpr_front(ego, ahead, params, costs, grid, convention);
    const QprComponent rear = qpr_rear(ego, behind, params, costs, grid, convention);

    report.front = front.value;
    report.rear = rear.value;
    report.total = front.value + rear.value;
    for (const auto& [id, share] : front.shares) {
        PerVehicleShare& entry = report.per_vehicle[id];
        entry.front_share = share;
        entry.relation = Relation::Front;
    }
    for (const auto& [id, share] : rear.shares) {
        PerVehicleShare& entry = report.per_vehicle[id];
        entry.rear_share = share;
        entry.relation = Relation::Rear;
    }
    // Rear vehicles outside the grid or with empty fields still appear
    // with a zero share so downstream notifications cover everyone.
    for (const VehicleState& n : behind) {
        if (!report.per_vehicle.count(n.id)) {
            report.per_vehicle[n.id].relation = Relation::Rear;
        }
    }
    for (const VehicleState& n : ahead) {
        if (!report.per_vehicle.count(n.id)) {
            report.per_vehicle[n.id].relation = Relation::Front;
        }
    }
    return report;
}

}  // namespace safedrive
