#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "waylab/geometry.hpp"
#include "waylab/util.hpp"

namespace waylab {

/// Ordered waypoint list. Invariants: at least two waypoints, consecutive
/// waypoints strictly distinct (> kCoincidentEps apart).
struct WaypointPath {
    std::string id;
    std::vector<Vec2> waypoints;

    WaypointPath() = default;

    WaypointPath(std::string path_id, std::vector<Vec2> points)
        : id(std::move(path_id)), waypoints(std::move(points)) {
        validate();
    }

    void validate() const {
        if (waypoints.size() < 2) {
            throw validation_error("path '" + id + "': needs at least 2 waypoints");
        }
        for (std::size_t i = 1; i < waypoints.size(); ++i) {
            if (distance(waypoints[i - 1], waypoints[i]) <= kCoincidentEps) {
                throw validation_error("path '" + id + "': waypoints " +
                                       std::to_string(i - 1) + " and " + std::to_string(i) +
                                       " coincide");
            }
        }
    }

    std::size_t size() const { return waypoints.size(); }
};

/// Sum of consecutive-segment lengths, in meters.
inline double path_distance(const WaypointPath& path) {
    double total = 0.0;
    for (std::size_t i = 1; i < path.waypoints.size(); ++i) {
        total += distance(path.waypoints[i - 1], path.waypoints[i]);
    }
    return total;
}

/// Accumulated |wrapped heading change| across consecutive segments; a
/// path-difficulty measure. Zero for any 2-waypoint path.
inline double sum_angle_change(const WaypointPath& path) {
    double total = 0.0;
    double prev = bearing(path.waypoints[0], path.waypoints[1]);
    for (std::size_t i = 2; i < path.waypoints.size(); ++i) {
        const double cur = bearing(path.waypoints[i - 1], path.waypoints[i]);
        total += std::abs(wrap_angle(cur - prev));
        prev = cur;
    }
    return total;
}

/// For each waypoint, the closest approach achieved by `trajectory`;
/// averaged over all waypoints. Streams over the trajectory once.
inline double mean_waypoint_min_distance(const WaypointPath& path,
                                         std::span<const Vec2> trajectory) {
    if (trajectory.empty()) {
        throw empty_trajectory_error("mean_waypoint_min_distance: empty trajectory");
    }
    std::vector<double> best(path.waypoints.size(), std::numeric_limits<double>::infinity());
    for (const Vec2& p : trajectory) {
        for (std::size_t w = 0; w < path.waypoints.size(); ++w) {
            best[w] = std::min(best[w], squared_distance(path.waypoints[w], p));
        }
    }
    double total = 0.0;
    for (double b : best) total += std::sqrt(b);
    return total / static_cast<double>(path.waypoints.size());
}

/// Distance from `position` to the closed segment joining the two path
/// waypoints nearest to it (ties broken by lower waypoint index).
inline double cross_track_distance(const WaypointPath& path, Vec2 position) {
    std::size_t first = 0, second = 1;
    double d_first = squared_distance(path.waypoints[0], position);
    double d_second = squared_distance(path.waypoints[1], position);
    if (d_second < d_first) {
        std::swap(first, second);
        std::swap(d_first, d_second);
    }
    for (std::size_t i = 2; i < path.waypoints.size(); ++i) {
        const double d = squared_distance(path.waypoints[i], position);
        if (d < d_first) {
            second = first;
            d_second = d_first;
            first = i;
            d_first = d;
        } else if (d < d_second) {
            second = i;
            d_second = d;
        }
    }
    return point_segment_distance(position, path.waypoints[first], path.waypoints[second]);
}

/// Mean cross-track distance of a flown trajectory against the path.
inline double mean_cross_track_distance(const WaypointPath& path,
                                        std::span<const Vec2> trajectory) {
    if (trajectory.empty()) {
        throw empty_trajectory_error("mean_cross_track_distance: empty trajectory");
    }
    double total = 0.0;
    for (const Vec2& p : trajectory) total += cross_track_distance(path, p);
    return total / static_cast<double>(trajectory.size());
}

// --- File format: {"id": string, "waypoints": [[x, y], ...]}, meters. ---

inline nlohmann::json path_to_json(const WaypointPath& path) {
    nlohmann::json j;
    j["id"] = path.id;
    auto& wps = j["waypoints"] = nlohmann::json::array();
    for (const Vec2& w : path.waypoints) wps.push_back({w.x, w.y});
    return j;
}

inline WaypointPath path_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("id") || !j.contains("waypoints")) {
        throw validation_error("path file: expected {\"id\", \"waypoints\"}");
    }
    std::vector<Vec2> points;
    for (const auto& w : j.at("waypoints")) {
        if (!w.is_array() || w.size() != 2) {
            throw validation_error("path file: each waypoint must be [x, y]");
        }
        points.push_back({w[0].get<double>(), w[1].get<double>()});
    }
    return WaypointPath(j.at("id").get<std::string>(), std::move(points));
}

inline void save_path(const WaypointPath& path, const std::filesystem::path& file) {
    write_text_file(file, path_to_json(path).dump(2) + "\n");
}

inline WaypointPath load_path(const std::filesystem::path& file) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(file));
    } catch (const nlohmann::json::parse_error& e) {
        throw validation_error("path file " + file.string() + ": " + e.what());
    }
    return path_from_json(j);
}

// --- Canonical test-path factories, spanning difficulty. All factories
// --- center the waypoints on their bounding box so paths sit in the
// --- block-rich middle of a generated world.

namespace detail {
inline std::vector<Vec2> centered(std::vector<Vec2> pts) {
    double min_x = pts[0].x, max_x = pts[0].x, min_y = pts[0].y, max_y = pts[0].y;
    for (const auto& p : pts) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    const Vec2 center{(min_x + max_x) / 2.0, (min_y + max_y) / 2.0};
    for (auto& p : pts) p = p - center;
    return pts;
}
}  // namespace detail

/// Straight path along +y: angle change 0.
inline WaypointPath make_straight_path(double length = 100.0, int waypoint_count = 5,
                                       std::string id = "straight") {
    if (length <= 0.0 || waypoint_count < 2) {
        throw invalid_params_error("straight path: length > 0 and >= 2 waypoints required");
    }
    std::vector<Vec2> pts;
    for (int i = 0; i < waypoint_count; ++i) {
        pts.push_back({0.0, length * i / (waypoint_count - 1)});
    }
    return WaypointPath(std::move(id), detail::centered(std::move(pts)));
}

/// Two perpendicular legs: one right-angle turn, angle change pi/2.
inline WaypointPath make_l_path(double leg = 20.0, std::string id = "l") {
    if (leg <= 0.0) throw invalid_params_error("l path: leg must be positive");
    return WaypointPath(std::move(id),
                        detail::centered({{0.0, 0.0}, {0.0, leg}, {leg, leg}}));
}

/// Alternating-turn path. Defaults give ~154 m with angle change 2*pi,
/// comparable in difficulty to mid-hundreds-of-meters survey paths.
inline WaypointPath make_zigzag_path(int segments = 7, double leg = 22.0,
                                     double turn = kPi / 3.0, std::string id = "zigzag") {
    if (segments < 2 || leg <= 0.0 || turn <= 0.0 || turn >= kPi) {
        throw invalid_params_error("zigzag path: need segments >= 2, leg > 0, 0 < turn < pi");
    }
    std::vector<Vec2> pts{{0.0, 0.0}};
    double heading = 0.0;
    for (int i = 0; i < segments; ++i) {
        if (i > 0) heading += (i % 2 == 1) ? turn : -turn;
        const Vec2 prev = pts.back();
        pts.push_back({prev.x + leg * std::sin(heading), prev.y + leg * std::cos(heading)});
    }
    return WaypointPath(std::move(id), detail::centered(std::move(pts)));
}

/// Closed circuit around a circle; angle change one full turn.
inline WaypointPath make_loop_path(double radius = 25.0, int waypoint_count = 12,
                                   std::string id = "loop") {
    if (radius <= 0.0 || waypoint_count < 3) {
        throw invalid_params_error("loop path: radius > 0 and >= 3 waypoints required");
    }
    std::vector<Vec2> pts;
    for (int i = 0; i <= waypoint_count; ++i) {
        const double a = 2.0 * kPi * (i % waypoint_count) / waypoint_count;
        pts.push_back({radius * std::sin(a), radius - radius * std::cos(a)});
    }
    return WaypointPath(std::move(id), detail::centered(std::move(pts)));
}

}  // namespace waylab
