#include "safedrive/field_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "safedrive/errors.hpp"

namespace safedrive {

namespace {

// Shortest round-trip representation, locale-independent.
std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace

void write_field_csv(const ScalarField& field, std::ostream& out) {
    out << "x,y,value\n";
    const Grid& g = field.grid;
    for (std::size_t iy = 0; iy < g.ny; ++iy) {
        for (std::size_t ix = 0; ix < g.nx; ++ix) {
            const Vec2 c = g.cell_center(ix, iy);
            out << format_double(c.x) << ',' << format_double(c.y) << ','
                << format_double(field.values[g.index(ix, iy)]) << '\n';
        }
    }
}

void write_field_csv(const ScalarField& field, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    write_field_csv(field, out);
}

void write_field_pgm16(const ScalarField& field, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + path);

    const Grid& g = field.grid;
    double lo = 0.0, hi = 0.0;
    if (!field.values.empty()) {
        auto [mn, mx] = std::minmax_element(field.values.begin(), field.values.end());
        lo = *mn;
        hi = *mx;
    }
    const double span = hi - lo;

    out << "P5\n" << g.nx << ' ' << g.ny << "\n65535\n";
    for (std::size_t row = 0; row < g.ny; ++row) {
        const std::size_t iy = g.ny - 1 - row;  // image top = highest y
        for (std::size_t ix = 0; ix < g.nx; ++ix) {
            const double v = field.values[g.index(ix, iy)];
            const double t = span > 0.0 ? (v - lo) / span : 0.0;
            const auto q = static_cast<std::uint16_t>(std::lround(t * 65535.0));
            out.put(static_cast<char>(q >> 8));
            out.put(static_cast<char>(q & 0xff));
        }
    }

    nlohmann::json sidecar = {
        {"min", lo},
        {"max", hi},
        {"nx", g.nx},
        {"ny", g.ny},
        {"origin_x", g.origin_x},
        {"origin_y", g.origin_y},
        {"resolution", g.resolution},
        {"row_order", "top_to_bottom"},
    };
    std::ofstream side(path + ".json");
    if (!side) throw Error("cannot open for writing: " + path + ".json");
    side << sidecar.dump(2) << '\n';
}

}  // namespace safedrive
