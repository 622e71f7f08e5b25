#include "safedrive/geometry.hpp"

#include <algorithm>
#include <limits>

namespace safedrive {

namespace {

// Projects the corners of both rects onto `axis` and reports whether the
// intervals are separated.
bool separated_on_axis(Vec2 axis, const Vec2 a[4], const Vec2 b[4]) {
    double amin = std::numeric_limits<double>::infinity(), amax = -amin;
    double bmin = amin, bmax = amax;
    for (int i = 0; i < 4; ++i) {
        const double pa = axis.dot(a[i]);
        const double pb = axis.dot(b[i]);
        amin = std::min(amin, pa);
        amax = std::max(amax, pa);
        bmin = std::min(bmin, pb);
        bmax = std::max(bmax, pb);
    }
    return amax < bmin || bmax < amin;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = ab.dot(ab);
    if (len2 <= 0.0) return (p - a).norm();
    const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + ab * t)).norm();
}

}  // namespace

bool rects_intersect(const OrientedRect& a, const OrientedRect& b) {
    Vec2 ca[4], cb[4];
    a.corners(ca);
    b.corners(cb);
    const Vec2 axes[4] = {
        rotated({1.0, 0.0}, a.heading),
        rotated({0.0, 1.0}, a.heading),
        rotated({1.0, 0.0}, b.heading),
        rotated({0.0, 1.0}, b.heading),
    };
    for (const Vec2& axis : axes) {
        if (separated_on_axis(axis, ca, cb)) return false;
    }
    return true;
}

double segment_distance(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
    // Segments that cross have distance zero.
    const Vec2 d1 = p2 - p1, d2 = q2 - q1;
    const double denom = d1.cross(d2);
    if (denom != 0.0) {
        const double t = (q1 - p1).cross(d2) / denom;
        const double u = (q1 - p1).cross(d1) / denom;
        if (t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0) return 0.0;
    }
    return std::min(std::min(point_segment_distance(p1, q1, q2), point_segment_distance(p2, q1, q2)),
                    std::min(point_segment_distance(q1, p1, p2), point_segment_distance(q2, p1, p2)));
}

double rect_distance(const OrientedRect& a, const OrientedRect& b) {
    if (rects_intersect(a, b)) return 0.0;
    Vec2 ca[4], cb[4];
    a.corners(ca);
    b.corners(cb);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            best = std::min(best, segment_distance(ca[i], ca[(i + 1) % 4], cb[j], cb[(j + 1) % 4]));
        }
    }
    return best;
}

}  // namespace safedrive
