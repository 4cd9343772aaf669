#pragma once

#include <cmath>

namespace skyreserve {

/// 2-D Cartesian vector in sector-local coordinates (meters / meters-per-second).
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm_sq() const { return x * x + y * y; }
    double norm() const { return std::hypot(x, y); }
    double heading() const { return std::atan2(y, x); }

    Vec2 normalized() const {
        const double n = norm();
        return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
    }
    /// Rotation by -90 degrees (clockwise in the x-right/y-up convention).
    Vec2 perp_cw() const { return {y, -x}; }
    /// Rotation by +90 degrees.
    Vec2 perp_ccw() const { return {-y, x}; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

/// Signed angle from a to b in (-pi, pi].
inline double signed_angle(const Vec2& a, const Vec2& b) {
    return std::atan2(a.cross(b), a.dot(b));
}

/// Wrap an angle into (-pi, pi].
inline double wrap_angle(double a) {
    constexpr double two_pi = 6.283185307179586476925286766559;
    a = std::fmod(a, two_pi);
    if (a <= -3.14159265358979323846) a += two_pi;
    if (a > 3.14159265358979323846) a -= two_pi;
    return a;
}

}  // namespace skyreserve
