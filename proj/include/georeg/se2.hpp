#pragma once

#include <cmath>
#include <string>

namespace georeg {

inline constexpr double kPi = 3.14159265358979323846;

// Wraps an angle into (-pi, pi].
inline double normalize_angle(double theta) {
    double r = std::remainder(theta, 2.0 * kPi);
    if (r <= -kPi) r += 2.0 * kPi;
    return r;
}

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    Point2() = default;
    Point2(double x_, double y_) : x(x_), y(y_) {}

    Point2 operator+(const Point2& o) const { return {x + o.x, y + o.y}; }
    Point2 operator-(const Point2& o) const { return {x - o.x, y - o.y}; }
    Point2 operator*(double s) const { return {x * s, y * s}; }
    double norm() const { return std::hypot(x, y); }
    double squared_norm() const { return x * x + y * y; }
};

// Planar rigid-body pose (x, y, heading). Heading is kept in (-pi, pi].
struct Pose2 {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;

    Pose2() = default;
    Pose2(double x_, double y_, double theta_) : x(x_), y(y_), theta(normalize_angle(theta_)) {}

    Point2 translation() const { return {x, y}; }
};

// Group composition a * b.
inline Pose2 compose(const Pose2& a, const Pose2& b) {
    const double c = std::cos(a.theta), s = std::sin(a.theta);
    return Pose2(a.x + c * b.x - s * b.y,
                 a.y + s * b.x + c * b.y,
                 a.theta + b.theta);
}

inline Pose2 inverse(const Pose2& p) {
    const double c = std::cos(p.theta), s = std::sin(p.theta);
    return Pose2(-(c * p.x + s * p.y),
                 -(-s * p.x + c * p.y),
                 -p.theta);
}

// Maps a point from the frame of p into the parent frame.
inline Point2 transform_point(const Pose2& p, const Point2& q) {
    const double c = std::cos(p.theta), s = std::sin(p.theta);
    return {p.x + c * q.x - s * q.y,
            p.y + s * q.x + c * q.y};
}

// Maps a parent-frame point into the frame of p (e.g. map -> sensor).
inline Point2 inverse_transform_point(const Pose2& p, const Point2& q) {
    const double c = std::cos(p.theta), s = std::sin(p.theta);
    const double dx = q.x - p.x, dy = q.y - p.y;
    return {c * dx + s * dy,
            -s * dx + c * dy};
}

// Constant planar offset between the working map frame and UTM. The map frame
// shares the UTM axes (no rotation), so conversion is pure translation.
struct MapOrigin {
    double easting_offset = 0.0;
    double northing_offset = 0.0;
    std::string zone_label;
};

inline Point2 map_to_utm(const Point2& q, const MapOrigin& origin) {
    return {q.x + origin.easting_offset, q.y + origin.northing_offset};
}

inline Point2 utm_to_map(const Point2& q, const MapOrigin& origin) {
    return {q.x - origin.easting_offset, q.y - origin.northing_offset};
}

}  // namespace georeg
