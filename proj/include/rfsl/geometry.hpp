#pragma once

#include <cmath>

namespace rfsl {

inline constexpr double kPi = 3.14159265358979323846264338327950288;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double k) const { return {x * k, y * k}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(Vec3 o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(Vec3 o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double k) const { return {x * k, y * k, z * k}; }
    double dot(Vec3 o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    Vec2 floor_projection() const { return {x, y}; }
};

// Axis-aligned rectangle with one corner at the origin.
struct Rect {
    double width = 0.0;
    double height = 0.0;
};

struct Ellipse2D {
    Vec2 center;
    double semi_major = 0.0;
    double semi_minor = 0.0;
    double azimuth = 0.0; // radians, major axis direction

    double area() const { return kPi * semi_major * semi_minor; }

    bool contains(Vec2 p) const {
        const double c = std::cos(azimuth), s = std::sin(azimuth);
        const double dx = p.x - center.x, dy = p.y - center.y;
        const double u = c * dx + s * dy;
        const double v = -s * dx + c * dy;
        return (u * u) / (semi_major * semi_major) + (v * v) / (semi_minor * semi_minor) <= 1.0;
    }
};

} // namespace rfsl
