#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "waylab/geometry.hpp"
#include "waylab/path.hpp"
#include "waylab/render.hpp"
#include "waylab/util.hpp"
#include "waylab/world.hpp"

namespace waylab {

/// Sentinel for SimConfig::max_steps: size the step budget to the path
/// (four times the ideal step count) when the rollout starts.
inline constexpr int kAutoMaxSteps = -1;

struct SimConfig {
    double speed = 1.0;             // m/s, constant forward
    double altitude = 5.0;          // m, constant
    double dt = 0.25;               // s per control step
    double max_yaw_rate = 1.0;      // rad/s
    double waypoint_radius = 2.0;   // m, waypoint-reached radius
    int max_steps = 4000;
    double divergence_limit = 20.0; // m of cross-track error

    void validate() const {
        if (speed <= 0.0) throw invalid_params_error("sim: speed must be positive");
        if (altitude <= 0.0) throw invalid_params_error("sim: altitude must be positive");
        if (dt <= 0.0) throw invalid_params_error("sim: dt must be positive");
        if (max_yaw_rate <= 0.0) throw invalid_params_error("sim: max_yaw_rate must be positive");
        if (waypoint_radius <= 0.0) throw invalid_params_error("sim: waypoint_radius must be positive");
        if (divergence_limit <= waypoint_radius) {
            throw invalid_params_error("sim: divergence_limit must exceed waypoint_radius");
        }
        if (max_steps < kAutoMaxSteps) {
            throw invalid_params_error("sim: max_steps must be >= 0, or -1 to auto-size");
        }
    }

    double max_turn_per_step() const { return max_yaw_rate * dt; }
};

enum class SimStatus { Running, Completed, Diverged, TimedOut };

inline std::string to_string(SimStatus s) {
    switch (s) {
        case SimStatus::Running: return "Running";
        case SimStatus::Completed: return "Completed";
        case SimStatus::Diverged: return "Diverged";
        case SimStatus::TimedOut: return "TimedOut";
    }
    return "Unknown";
}

inline SimStatus sim_status_from_string(const std::string& s) {
    if (s == "Running") return SimStatus::Running;
    if (s == "Completed") return SimStatus::Completed;
    if (s == "Diverged") return SimStatus::Diverged;
    if (s == "TimedOut") return SimStatus::TimedOut;
    throw validation_error("unknown sim status: '" + s + "'");
}

struct SimState {
    Pose pose;
    std::size_t next_waypoint_index = 1;
    int step_count = 0;
    SimStatus status = SimStatus::Running;
};

/// Concrete step budget for this path: resolves the auto sentinel.
inline SimConfig resolve_sim(const SimConfig& config, const WaypointPath& path) {
    SimConfig resolved = config;
    if (resolved.max_steps == kAutoMaxSteps) {
        resolved.max_steps = 4 * static_cast<int>(
            std::ceil(path_distance(path) / (resolved.speed * resolved.dt)));
    }
    return resolved;
}

/// Start state: at the first waypoint heading along the first segment
/// unless an explicit start pose is given. Altitude is pinned to the
/// configured value either way.
inline SimState initial_state(const WaypointPath& path, const SimConfig& config,
                              std::optional<Pose> start = std::nullopt) {
    config.validate();
    path.validate();
    SimState state;
    if (start) {
        state.pose = *start;
        state.pose.z = config.altitude;
        state.pose.yaw = wrap_angle(state.pose.yaw);
    } else {
        state.pose = Pose::at(path.waypoints[0],
                              bearing(path.waypoints[0], path.waypoints[1]), config.altitude);
    }
    if (config.max_steps == 0) state.status = SimStatus::TimedOut;
    return state;
}

/// One control step: clip the command to +-max_yaw_rate*dt, turn, then
/// translate speed*dt along the new heading; advance past every waypoint
/// now within waypoint_radius; finally settle status (Completed beats
/// Diverged beats TimedOut).
inline SimState step(const SimState& state, double yaw_command, const SimConfig& config,
                     const WaypointPath& path) {
    if (state.status != SimStatus::Running) {
        throw not_running_error("step: simulation already " + to_string(state.status));
    }
    if (!std::isfinite(yaw_command)) {
        throw validation_error("step: yaw command must be finite");
    }
    if (config.max_steps < 0) {
        throw invalid_params_error("step: max_steps is unresolved; call resolve_sim first");
    }
    SimState next = state;
    const double limit = config.max_turn_per_step();
    const double clipped = std::clamp(yaw_command, -limit, limit);
    next.pose.yaw = wrap_angle(next.pose.yaw + clipped);
    next.pose.x += config.speed * config.dt * std::sin(next.pose.yaw);
    next.pose.y += config.speed * config.dt * std::cos(next.pose.yaw);
    next.step_count = state.step_count + 1;

    const std::size_t last = path.waypoints.size() - 1;
    while (distance(next.pose.position(), path.waypoints[next.next_waypoint_index]) <=
           config.waypoint_radius) {
        if (next.next_waypoint_index == last) {
            next.status = SimStatus::Completed;
            return next;
        }
        ++next.next_waypoint_index;
    }
    if (cross_track_distance(path, next.pose.position()) > config.divergence_limit) {
        next.status = SimStatus::Diverged;
    } else if (next.step_count >= config.max_steps) {
        next.status = SimStatus::TimedOut;
    }
    return next;
}

/// Training-time direction rule and label source: the relative yaw from
/// the current pose to the next waypoint.
inline double oracle_command(const SimState& state, const WaypointPath& path) {
    if (state.status != SimStatus::Running) {
        throw not_running_error("oracle_command: simulation already " + to_string(state.status));
    }
    return relative_yaw(state.pose, path.waypoints[state.next_waypoint_index]);
}

/// Closed-loop steering policy. Controllers that ignore imagery opt out of
/// rendering; frames for them arrive empty.
class Controller {
public:
    virtual ~Controller() = default;
    virtual bool wants_frames() const { return true; }
    /// Called once at the start of every rollout.
    virtual void reset() {}
    virtual double command(const Frame& frame, const SimState& state,
                           const WaypointPath& path) = 0;
};

class OracleController final : public Controller {
public:
    bool wants_frames() const override { return false; }
    double command(const Frame&, const SimState& state, const WaypointPath& path) override {
        return oracle_command(state, path);
    }
};

/// Blind baseline: a constant command regardless of input.
class ConstantController final : public Controller {
public:
    explicit ConstantController(double value = 0.0) : value_(value) {}
    bool wants_frames() const override { return false; }
    double command(const Frame&, const SimState&, const WaypointPath&) override { return value_; }

private:
    double value_;
};

struct TraceRow {
    int step = 0;
    double t = 0.0;
    Pose pose;
    double command = 0.0;
    std::size_t next_waypoint_index = 1;
    SimStatus status = SimStatus::Running;
};

struct RolloutTrace {
    std::vector<TraceRow> rows;
    SimStatus final_status = SimStatus::Running;

    std::vector<Vec2> positions() const {
        std::vector<Vec2> out;
        out.reserve(rows.size());
        for (const auto& row : rows) out.push_back(row.pose.position());
        return out;
    }
};

/// Render -> controller -> step until a terminal status. Every visited
/// pose gets a trace row; the final row carries the terminal status and a
/// zero command (none is applied there).
inline RolloutTrace rollout(const WaypointPath& path, Controller& controller,
                            const BlockWorld& world, const CameraSpec& camera,
                            const SimConfig& config, std::optional<Pose> start = std::nullopt) {
    const SimConfig sim = resolve_sim(config, path);
    SimState state = initial_state(path, sim, start);
    if (point_segment_distance(state.pose.position(), path.waypoints[0], path.waypoints[1]) >
        sim.divergence_limit) {
        throw validation_error("rollout: start pose is beyond divergence_limit of the first segment");
    }
    controller.reset();
    RolloutTrace trace;
    const Frame no_frame;
    while (state.status == SimStatus::Running) {
        Frame frame;
        if (controller.wants_frames()) frame = render(world, state.pose, camera);
        const double cmd = controller.command(controller.wants_frames() ? frame : no_frame,
                                              state, path);
        trace.rows.push_back({state.step_count, state.step_count * sim.dt, state.pose, cmd,
                              state.next_waypoint_index, SimStatus::Running});
        state = step(state, cmd, sim, path);
    }
    trace.rows.push_back({state.step_count, state.step_count * sim.dt, state.pose, 0.0,
                          state.next_waypoint_index, state.status});
    trace.final_status = state.status;
    return trace;
}

// --- Trajectory log: CSV, one row per step, final row carries status. ---

inline std::string trace_to_csv(const RolloutTrace& trace) {
    std::string out = "step,t,x,y,z,yaw,command,next_wp,status\n";
    for (const auto& row : trace.rows) {
        out += std::to_string(row.step) + ',' + format_double(row.t) + ',' +
               format_double(row.pose.x) + ',' + format_double(row.pose.y) + ',' +
               format_double(row.pose.z) + ',' + format_double(row.pose.yaw) + ',' +
               format_double(row.command) + ',' + std::to_string(row.next_waypoint_index) +
               ',' + to_string(row.status) + '\n';
    }
    return out;
}

inline RolloutTrace trace_from_csv(const std::string& csv) {
    RolloutTrace trace;
    const auto lines = split(csv, '\n');
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        const auto cells = split(lines[i], ',');
        if (cells.size() != 9) {
            throw validation_error("trace csv: expected 9 columns, got " +
                                   std::to_string(cells.size()));
        }
        TraceRow row;
        row.step = static_cast<int>(parse_int(cells[0]));
        row.t = parse_double(cells[1]);
        row.pose = {parse_double(cells[2]), parse_double(cells[3]), parse_double(cells[4]),
                    parse_double(cells[5])};
        row.command = parse_double(cells[6]);
        row.next_waypoint_index = static_cast<std::size_t>(parse_int(cells[7]));
        row.status = sim_status_from_string(cells[8]);
        trace.rows.push_back(row);
    }
    if (trace.rows.empty()) throw validation_error("trace csv: no rows");
    trace.final_status = trace.rows.back().status;
    return trace;
}

inline void save_trace(const RolloutTrace& trace, const std::filesystem::path& file) {
    write_text_file(file, trace_to_csv(trace));
}

inline RolloutTrace load_trace(const std::filesystem::path& file) {
    return trace_from_csv(read_text_file(file));
}

}  // namespace waylab
