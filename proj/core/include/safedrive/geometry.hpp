#pragma once

#include <cmath>

namespace safedrive {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double k) const { return {x * k, y * k}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
};

// Normalizes an angle to (-pi, pi].
inline double normalize_angle(double a) {
    double r = std::fmod(a + M_PI, 2.0 * M_PI);
    if (r <= 0.0) r += 2.0 * M_PI;
    return r - M_PI;
}

// Rotates v by angle (counterclockwise).
inline Vec2 rotated(Vec2 v, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

// Axis-aligned in its own frame: center, heading, half extents along
// heading (hl) and across it (hw).
struct OrientedRect {
    Vec2 center;
    double heading = 0.0;
    double half_length = 0.0;
    double half_width = 0.0;

    // Longitudinal/lateral coordinates of a point in the rect frame.
    Vec2 to_local(Vec2 p) const { return rotated(p - center, -heading); }

    bool contains(Vec2 p) const {
        const Vec2 q = to_local(p);
        return std::abs(q.x) <= half_length && std::abs(q.y) <= half_width;
    }

    void corners(Vec2 out[4]) const {
        const Vec2 ex = rotated({1.0, 0.0}, heading);
        const Vec2 ey = rotated({0.0, 1.0}, heading);
        out[0] = center + ex * half_length + ey * half_width;
        out[1] = center + ex * half_length - ey * half_width;
        out[2] = center - ex * half_length - ey * half_width;
        out[3] = center - ex * half_length + ey * half_width;
    }
};

bool rects_intersect(const OrientedRect& a, const OrientedRect& b);

// Minimum distance between two rectangles; 0 when they overlap.
double rect_distance(const OrientedRect& a, const OrientedRect& b);

double segment_distance(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2);

}  // namespace safedrive
