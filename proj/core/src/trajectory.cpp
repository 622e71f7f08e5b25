#include "safedrive/trajectory.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "safedrive/errors.hpp"
#include "safedrive/geometry.hpp"

namespace safedrive {

namespace {

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_num(const std::string& s, std::size_t line_no) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) throw MalformedRow(line_no, "not a number: '" + s + "'");
    return v;
}

long parse_int(const std::string& s, std::size_t line_no) {
    long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc{} && ptr == s.data() + s.size()) return v;
    // Some exporters write integral columns as floats ("2.0").
    const double d = parse_num(s, line_no);
    if (d != std::floor(d)) throw MalformedRow(line_no, "not an integer: '" + s + "'");
    return static_cast<long>(d);
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace

TrajectoryTable::TrajectoryTable(std::vector<TrajectoryRow> rows, double frame_rate, std::string metadata)
    : rows_(std::move(rows)), frame_rate_(frame_rate), metadata_(std::move(metadata)) {
    if (frame_rate_ <= 0.0) throw InvalidState("frame_rate must be > 0");
    std::sort(rows_.begin(), rows_.end(), [](const TrajectoryRow& a, const TrajectoryRow& b) {
        return a.id != b.id ? a.id < b.id : a.frame < b.frame;
    });
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        const TrajectoryRow& r = rows_[i];
        if (r.frame < 0) throw InvalidState("frames must be non-negative");
        by_frame_[r.frame].push_back(i);
        by_id_[r.id].push_back(i);
    }
    for (auto& [frame, idxs] : by_frame_) {
        std::sort(idxs.begin(), idxs.end(),
                  [this](std::size_t a, std::size_t b) { return rows_[a].id < rows_[b].id; });
    }
}

const TrajectoryRow* TrajectoryTable::find(long frame, long id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) return nullptr;
    for (std::size_t idx : it->second) {
        if (rows_[idx].frame == frame) return &rows_[idx];
    }
    return nullptr;
}

std::vector<const TrajectoryRow*> TrajectoryTable::at_frame(long frame) const {
    std::vector<const TrajectoryRow*> out;
    auto it = by_frame_.find(frame);
    if (it == by_frame_.end()) return out;
    out.reserve(it->second.size());
    for (std::size_t idx : it->second) out.push_back(&rows_[idx]);
    return out;
}

const std::vector<std::size_t>* TrajectoryTable::track(long id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &it->second;
}

std::vector<long> TrajectoryTable::frames() const {
    std::vector<long> out;
    out.reserve(by_frame_.size());
    for (const auto& [frame, idxs] : by_frame_) out.push_back(frame);
    return out;
}

VehicleState row_to_state(const TrajectoryRow& row, const StateEstimation& est) {
    VehicleState s;
    s.id = row.id;
    s.klass = row.klass;
    s.x = row.x;
    s.y = row.y;
    s.heading = row.heading;
    s.speed = row.speed;
    s.width = row.width;
    s.length = row.length;
    s.wheelbase = std::max(est.wheelbase_ratio * row.length, 0.1);
    if (row.yaw_rate && row.speed > est.min_speed_for_heading) {
        s.steering = std::atan(s.wheelbase * (*row.yaw_rate) / row.speed);
    }
    return s;
}

TrajectoryTable parse_tracks(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    double frame_rate = 25.0;
    std::string metadata;

    // Comment prologue may carry metadata.
    std::string header_line;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            const std::string body = trim(t.substr(1));
            if (body.rfind("frame_rate=", 0) == 0) {
                frame_rate = parse_num(body.substr(11), line_no);
            } else if (!body.empty()) {
                if (!metadata.empty()) metadata += "; ";
                metadata += body;
            }
            continue;
        }
        header_line = t;
        break;
    }
    if (header_line.empty()) throw Error("empty tracks file: no header row");

    const std::vector<std::string> headers = split_csv(header_line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < headers.size(); ++i) col[lower(headers[i])] = i;

    auto find_col = [&col](std::initializer_list<const char*> aliases) -> std::optional<std::size_t> {
        for (const char* a : aliases) {
            auto it = col.find(a);
            if (it != col.end()) return it->second;
        }
        return std::nullopt;
    };
    auto require_col = [&find_col](std::initializer_list<const char*> aliases) {
        auto c = find_col(aliases);
        if (!c) throw MissingColumn(*aliases.begin());
        return *c;
    };

    const std::size_t c_frame = require_col({"frame", "frameid"});
    const std::size_t c_id = require_col({"id", "trackid"});
    const std::size_t c_x = require_col({"x"});
    const std::size_t c_y = require_col({"y"});
    const std::size_t c_width = require_col({"width"});
    const std::size_t c_length = require_col({"height", "length"});
    const std::size_t c_xv = require_col({"xvelocity", "x_velocity"});
    const std::size_t c_yv = require_col({"yvelocity", "y_velocity"});
    const auto c_lane = find_col({"laneid", "lane_id"});
    const auto c_class = find_col({"class", "vehicleclass"});
    const auto c_yaw = find_col({"yawrate", "yaw_rate"});

    std::vector<TrajectoryRow> rows;
    std::set<std::pair<long, long>> seen;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const std::vector<std::string> cells = split_csv(t);
        if (cells.size() < headers.size()) throw MalformedRow(line_no, "expected " + std::to_string(headers.size()) + " columns");

        TrajectoryRow r;
        r.frame = parse_int(cells[c_frame], line_no);
        r.id = parse_int(cells[c_id], line_no);
        r.x = parse_num(cells[c_x], line_no);
        r.y = parse_num(cells[c_y], line_no);
        r.width = parse_num(cells[c_width], line_no);
        r.length = parse_num(cells[c_length], line_no);
        r.x_velocity = parse_num(cells[c_xv], line_no);
        r.y_velocity = parse_num(cells[c_yv], line_no);
        if (c_lane && !cells[*c_lane].empty()) r.lane_id = parse_int(cells[*c_lane], line_no);
        if (c_class && !cells[*c_class].empty()) r.klass = vehicle_class_from_string(cells[*c_class]);
        if (c_yaw && !cells[*c_yaw].empty()) r.yaw_rate = parse_num(cells[*c_yaw], line_no);
        r.speed = std::hypot(r.x_velocity, r.y_velocity);
        if (!seen.insert({r.frame, r.id}).second) throw DuplicateKey(r.frame, r.id);
        rows.push_back(r);
    }

    // Heading per row: atan2 of the velocity when moving, otherwise
    // carried forward along the track (default 0 for a track that never
    // moves before its first moving frame).
    std::sort(rows.begin(), rows.end(), [](const TrajectoryRow& a, const TrajectoryRow& b) {
        return a.id != b.id ? a.id < b.id : a.frame < b.frame;
    });
    long current_id = std::numeric_limits<long>::min();
    double carried = 0.0;
    for (TrajectoryRow& r : rows) {
        if (r.id != current_id) {
            current_id = r.id;
            carried = 0.0;
        }
        if (r.speed > 0.1) carried = std::atan2(r.y_velocity, r.x_velocity);
        r.heading = normalize_angle(carried);
    }

    return TrajectoryTable(std::move(rows), frame_rate, std::move(metadata));
}

TrajectoryTable parse_tracks(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open tracks file: " + path);
    return parse_tracks(in);
}

void serialize_tracks(const TrajectoryTable& table, std::ostream& out) {
    out << "# frame_rate=" << format_double(table.frame_rate()) << '\n';
    if (!table.metadata().empty()) out << "# " << table.metadata() << '\n';
    out << "frame,id,x,y,width,height,xVelocity,yVelocity,laneId,class,yawRate\n";
    // Canonical order: by frame, then id.
    std::vector<const TrajectoryRow*> ordered;
    ordered.reserve(table.rows().size());
    for (const TrajectoryRow& r : table.rows()) ordered.push_back(&r);
    std::sort(ordered.begin(), ordered.end(), [](const TrajectoryRow* a, const TrajectoryRow* b) {
        return a->frame != b->frame ? a->frame < b->frame : a->id < b->id;
    });
    for (const TrajectoryRow* r : ordered) {
        out << r->frame << ',' << r->id << ',' << format_double(r->x) << ',' << format_double(r->y) << ','
            << format_double(r->width) << ',' << format_double(r->length) << ','
            << format_double(r->x_velocity) << ',' << format_double(r->y_velocity) << ',';
        if (r->lane_id) out << *r->lane_id;
        out << ',' << to_string(r->klass) << ',';
        if (r->yaw_rate) out << format_double(*r->yaw_rate);
        out << '\n';
    }
}

void serialize_tracks(const TrajectoryTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    serialize_tracks(table, out);
}

}  // namespace safedrive
