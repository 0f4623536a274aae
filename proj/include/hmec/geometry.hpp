#pragma once

#include <cmath>
#include <optional>
#include <utility>

namespace hmec {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
    Point2 operator+(Point2 o) const { return {x + o.x, y + o.y}; }
    Point2 operator-(Point2 o) const { return {x - o.x, y - o.y}; }
    Point2 operator*(double s) const { return {x * s, y * s}; }
};

inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
inline double squared_distance(Point2 a, Point2 b) {
    const double dx = a.x - b.x, dy = a.y - b.y;
    return dx * dx + dy * dy;
}

/// Line a*x + b*y + c = 0.
struct LineCoeffs {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    bool valid() const { return a * a + b * b > 0.0; }
    double residual(Point2 p) const { return (a * p.x + b * p.y + c) / std::hypot(a, b); }
    double distance_to(Point2 p) const { return std::abs(residual(p)); }
};

/// Axis-aligned zone [0, width] x [0, height].
struct Zone {
    double width = 0.0;
    double height = 0.0;

    bool contains(Point2 p, double tol = 0.0) const {
        return p.x >= -tol && p.y >= -tol && p.x <= width + tol && p.y <= height + tol;
    }
    Point2 clamp(Point2 p) const {
        return {std::fmin(std::fmax(p.x, 0.0), width), std::fmin(std::fmax(p.y, 0.0), height)};
    }
    Point2 center() const { return {width / 2.0, height / 2.0}; }
};

/// Unconstrained orthogonal projection onto the line.
inline Point2 orthogonal_projection(Point2 p, const LineCoeffs& l) {
    const double s = (l.a * p.x + l.b * p.y + l.c) / (l.a * l.a + l.b * l.b);
    return {p.x - l.a * s, p.y - l.b * s};
}

/// The part of the line inside the zone, as (origin, direction, t_lo, t_hi)
/// with direction of unit length. Empty when the line misses the zone.
struct LineSegment {
    Point2 origin;
    Point2 dir;
    double t_lo = 0.0;
    double t_hi = 0.0;

    Point2 at(double t) const { return origin + dir * t; }
};

inline std::optional<LineSegment> clip_line_to_zone(const LineCoeffs& l, const Zone& z) {
    const double n = std::hypot(l.a, l.b);
    LineSegment seg;
    seg.origin = orthogonal_projection({0.0, 0.0}, l);
    seg.dir = {-l.b / n, l.a / n};
    double lo = -INFINITY, hi = INFINITY;
    // Liang-Barsky style slab clipping against x in [0,w], y in [0,h].
    auto slab = [&](double o, double d, double min, double max) {
        if (std::abs(d) < 1e-15) return o >= min && o <= max;
        double t0 = (min - o) / d, t1 = (max - o) / d;
        if (t0 > t1) std::swap(t0, t1);
        lo = std::fmax(lo, t0);
        hi = std::fmin(hi, t1);
        return lo <= hi;
    };
    if (!slab(seg.origin.x, seg.dir.x, 0.0, z.width)) return std::nullopt;
    if (!slab(seg.origin.y, seg.dir.y, 0.0, z.height)) return std::nullopt;
    seg.t_lo = lo;
    seg.t_hi = hi;
    return seg;
}

} // namespace hmec
