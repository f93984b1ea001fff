#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include "waylab/errors.hpp"

namespace waylab {

inline constexpr double kPi = std::numbers::pi;

/// Two points closer than this are treated as coincident.
inline constexpr double kCoincidentEps = 1e-9;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
    friend bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
inline double squared_distance(Vec2 a, Vec2 b) {
    const double dx = a.x - b.x, dy = a.y - b.y;
    return dx * dx + dy * dy;
}

/// Wrap an angle to (-pi, pi]; the turn-around angle maps to +pi so every
/// heading has exactly one representation. Idempotent.
inline double wrap_angle(double angle) {
    double w = std::remainder(angle, 2.0 * kPi);
    if (w <= -kPi) w += 2.0 * kPi;
    return w;
}

/// Heading of the vector from `a` to `b`, measured from the +y axis,
/// clockwise-positive: straight ahead on +y is 0, due east (+x) is +pi/2.
inline double bearing(Vec2 from, Vec2 to) {
    return std::atan2(to.x - from.x, to.y - from.y);
}

/// Drone pose: planar position, fixed altitude, heading yaw in (-pi, pi]
/// using the +y-axis clockwise-positive convention above.
struct Pose {
    double x = 0.0;
    double y = 0.0;
    double z = 5.0;
    double yaw = 0.0;

    Vec2 position() const { return {x, y}; }

    static Pose at(Vec2 p, double yaw, double z = 5.0) {
        return Pose{p.x, p.y, z, wrap_angle(yaw)};
    }
};

/// Angle between the drone heading and the bearing to `target`, in
/// (-pi, pi]. This is both the training label and the oracle yaw command.
/// Throws degenerate_target_error when `target` coincides with the pose.
inline double relative_yaw(const Pose& pose, Vec2 target) {
    if (distance(pose.position(), target) <= kCoincidentEps) {
        throw degenerate_target_error("relative_yaw: target coincides with pose position");
    }
    return wrap_angle(bearing(pose.position(), target) - pose.yaw);
}

/// Distance from `p` to the closed segment [a, b].
inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) return distance(p, a);
    double t = dot(p - a, ab) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return distance(p, a + t * ab);
}

inline Vec2 rotate_about(Vec2 p, Vec2 center, double angle) {
    // Rotation by +angle follows the yaw convention: it turns +y toward +x.
    const double s = std::sin(angle), c = std::cos(angle);
    const Vec2 d = p - center;
    return {center.x + c * d.x + s * d.y, center.y - s * d.x + c * d.y};
}

}  // namespace waylab
