#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "waylab/geometry.hpp"
#include "waylab/world.hpp"

namespace waylab {

/// Pinhole camera, level and forward-facing at the drone's yaw and
/// altitude. Rays pass through pixel centers; no anti-aliasing.
struct CameraSpec {
    int width = 64;
    int height = 36;
    double horizontal_fov = kPi / 2.0;

    void validate() const {
        if (width < 8 || height < 8) {
            throw invalid_params_error("camera: width and height must both be >= 8");
        }
        if (horizontal_fov <= 0.0 || horizontal_fov >= kPi) {
            throw invalid_params_error("camera: horizontal_fov must be in (0, pi)");
        }
    }

    /// Square pixels: the vertical half-extent follows from the aspect ratio.
    double tan_half_hfov() const { return std::tan(horizontal_fov / 2.0); }
    double tan_half_vfov() const {
        return tan_half_hfov() * static_cast<double>(height) / static_cast<double>(width);
    }

    /// First image row whose center ray points below level; below it lies
    /// ground (or blocks), above it sky. Closed form for a level camera.
    int horizon_row() const { return height / 2; }
};

/// Row-major grayscale image, values in [0, 1]; row 0 is the top.
struct Frame {
    int width = 0;
    int height = 0;
    std::vector<float> pixels;

    float at(int row, int col) const {
        return pixels[static_cast<std::size_t>(row) * width + col];
    }

    std::size_t size() const { return pixels.size(); }

    friend bool operator==(const Frame& a, const Frame& b) {
        return a.width == b.width && a.height == b.height && a.pixels == b.pixels;
    }
};

namespace detail {

/// Slab test against an axis-aligned box. Returns the entry parameter (0
/// when the origin is inside) or infinity on a miss; only t >= 0 counts.
inline double ray_box_entry(const double origin[3], const double dir[3], const Block& block) {
    double t_near = -std::numeric_limits<double>::infinity();
    double t_far = std::numeric_limits<double>::infinity();
    for (int axis = 0; axis < 3; ++axis) {
        const double lo = block.center[axis] - block.size[axis] / 2.0;
        const double hi = block.center[axis] + block.size[axis] / 2.0;
        if (dir[axis] == 0.0) {
            if (origin[axis] < lo || origin[axis] > hi) {
                return std::numeric_limits<double>::infinity();
            }
            continue;
        }
        double t0 = (lo - origin[axis]) / dir[axis];
        double t1 = (hi - origin[axis]) / dir[axis];
        if (t0 > t1) std::swap(t0, t1);
        if (t0 > t_near) t_near = t0;
        if (t1 < t_far) t_far = t1;
        if (t_near > t_far) return std::numeric_limits<double>::infinity();
    }
    if (t_far < 0.0) return std::numeric_limits<double>::infinity();
    return t_near > 0.0 ? t_near : 0.0;
}

}  // namespace detail

/// Render the forward view: per pixel, the shade of the nearest block hit
/// by the center ray, else the ground plane z=0, else sky. Total and a
/// pure function of (world, pose, camera).
inline Frame render(const BlockWorld& world, const Pose& pose, const CameraSpec& camera) {
    camera.validate();
    Frame frame;
    frame.width = camera.width;
    frame.height = camera.height;
    frame.pixels.resize(static_cast<std::size_t>(camera.width) * camera.height);

    const double origin[3] = {pose.x, pose.y, pose.z};
    const double sin_yaw = std::sin(pose.yaw);
    const double cos_yaw = std::cos(pose.yaw);
    // forward = (sin, cos, 0), right = (cos, -sin, 0), up = (0, 0, 1)
    const double tan_h = camera.tan_half_hfov();
    const double tan_v = camera.tan_half_vfov();

    std::size_t idx = 0;
    for (int row = 0; row < camera.height; ++row) {
        const double b = (2.0 * (row + 0.5) / camera.height - 1.0) * tan_v;
        for (int col = 0; col < camera.width; ++col, ++idx) {
            const double a = (2.0 * (col + 0.5) / camera.width - 1.0) * tan_h;
            const double dir[3] = {sin_yaw + a * cos_yaw, cos_yaw - a * sin_yaw, -b};

            double best_t = std::numeric_limits<double>::infinity();
            double shade;
            if (dir[2] < 0.0) {
                best_t = -origin[2] / dir[2];
                shade = world.ground_shade();
            } else {
                shade = world.sky_shade();
            }
            for (const Block& block : world.blocks) {
                const double t = detail::ray_box_entry(origin, dir, block);
                if (t < best_t) {
                    best_t = t;
                    shade = block.shade;
                }
            }
            frame.pixels[idx] = static_cast<float>(shade);
        }
    }
    return frame;
}

}  // namespace waylab
