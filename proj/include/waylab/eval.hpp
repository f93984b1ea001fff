#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "waylab/dataset.hpp"
#include "waylab/model.hpp"
#include "waylab/sim.hpp"

namespace waylab {

struct EvalConfig {
    bool random_start = false;
    double start_position_noise = 1.0;   // meters, uniform per axis
    double start_yaw_noise = 0.1;        // radians
    double inflight_position_noise = 1.0;  // envelope-shaped in-flight noise
    double inflight_yaw_noise = 0.1;
    int trials = 5;
    std::uint64_t eval_seed = 0;

    void validate() const {
        if (trials < 1) throw invalid_params_error("eval: trials must be >= 1");
        if (start_position_noise < 0.0 || start_yaw_noise < 0.0 ||
            inflight_position_noise < 0.0 || inflight_yaw_noise < 0.0) {
            throw invalid_params_error("eval: noise magnitudes must be >= 0");
        }
    }
};

/// Steers with the trained model; keeps the last `timesteps` live frames,
/// zero-padded at the start of the rollout, and wraps the raw regression
/// output to (-pi, pi] at the control boundary.
class ModelController final : public Controller {
public:
    explicit ModelController(const Model<float>& model)
        : model_(model), zero_frame_(model.extractor.frame_size(), 0.0f) {}

    void reset() override { history_.clear(); }

    double command(const Frame& frame, const SimState&, const WaypointPath&) override {
        history_.push_back(frame.pixels);
        while (history_.size() > static_cast<std::size_t>(model_.spec.timesteps)) {
            history_.pop_front();
        }
        std::vector<std::span<const float>> window;
        for (std::size_t i = history_.size(); i < static_cast<std::size_t>(model_.spec.timesteps);
             ++i) {
            window.emplace_back(zero_frame_);
        }
        for (const auto& f : history_) window.emplace_back(f);
        return wrap_angle(model_.predict(window));
    }

private:
    const Model<float>& model_;
    std::vector<float> zero_frame_;
    std::deque<std::vector<float>> history_;
};

struct TrialResult {
    int trial = 0;
    SimStatus status = SimStatus::Running;
    double mwmd = 0.0;  // mean waypoint minimum distance, meters
    double mctd = 0.0;  // mean cross track distance, meters
    std::optional<std::string> error;
    RolloutTrace trace;

    bool counts_toward_means() const { return !error && status != SimStatus::Diverged; }
};

/// Per-trial results plus aggregates over the non-Diverged trials,
/// mirroring the reporting rule that drifted-away runs are listed by
/// status but excluded from distance means.
struct MetricsReport {
    std::string path_id;
    double path_distance_m = 0.0;
    double sum_angle_change_rad = 0.0;
    std::vector<TrialResult> trials;

    int completed_trials() const {
        int n = 0;
        for (const auto& t : trials) n += t.status == SimStatus::Completed ? 1 : 0;
        return n;
    }

    int diverged_trials() const {
        int n = 0;
        for (const auto& t : trials) n += t.status == SimStatus::Diverged ? 1 : 0;
        return n;
    }

    std::optional<double> mean_mwmd() const { return mean_of(&TrialResult::mwmd); }
    std::optional<double> mean_mctd() const { return mean_of(&TrialResult::mctd); }

private:
    std::optional<double> mean_of(double TrialResult::*field) const {
        double sum = 0.0;
        int n = 0;
        for (const auto& t : trials) {
            if (!t.counts_toward_means()) continue;
            sum += t.*field;
            ++n;
        }
        if (n == 0) return std::nullopt;
        return sum / n;
    }
};

namespace detail {

/// Closed-loop rollout with per-step envelope-shaped pose noise from the
/// given stream. Zero noise reduces exactly to the plain rollout.
inline RolloutTrace noisy_rollout(const WaypointPath& path, Controller& controller,
                                  const BlockWorld& world, const CameraSpec& camera,
                                  const SimConfig& config, CounterRng& rng,
                                  double position_noise, double yaw_noise, Pose start) {
    const SimConfig sim = resolve_sim(config, path);
    SimState state = initial_state(path, sim, start);
    if (point_segment_distance(state.pose.position(), path.waypoints[0], path.waypoints[1]) >
        sim.divergence_limit) {
        throw validation_error("evaluate: start pose is beyond divergence_limit of the first segment");
    }
    controller.reset();
    RolloutTrace trace;
    while (state.status == SimStatus::Running) {
        state.pose.x += rng.symmetric(position_noise);
        state.pose.y += rng.symmetric(position_noise);
        state.pose.yaw = wrap_angle(state.pose.yaw + rng.symmetric(yaw_noise));
        Frame frame;
        if (controller.wants_frames()) frame = render(world, state.pose, camera);
        const double cmd = controller.command(frame, state, path);
        trace.rows.push_back({state.step_count, state.step_count * sim.dt, state.pose, cmd,
                              state.next_waypoint_index, SimStatus::Running});
        state = step(state, cmd, sim, path);
    }
    trace.rows.push_back({state.step_count, state.step_count * sim.dt, state.pose, 0.0,
                          state.next_waypoint_index, state.status});
    trace.final_status = state.status;
    return trace;
}

}  // namespace detail

/// Run `trials` seeded rollouts of the controller on the true path, with
/// in-flight noise and (optionally) a perturbed start, and compute both
/// distance metrics per trial against the true path. Metrics are the
/// path-geometry functions applied to the recorded trace positions.
inline MetricsReport evaluate(Controller& controller, const WaypointPath& path,
                              const BlockWorld& world, const CameraSpec& camera,
                              const SimConfig& sim_config, const EvalConfig& eval_config) {
    eval_config.validate();
    sim_config.validate();
    MetricsReport report;
    report.path_id = path.id;
    report.path_distance_m = path_distance(path);
    report.sum_angle_change_rad = sum_angle_change(path);

    for (int trial = 0; trial < eval_config.trials; ++trial) {
        TrialResult result;
        result.trial = trial;
        Pose start = Pose::at(path.waypoints[0], bearing(path.waypoints[0], path.waypoints[1]),
                              sim_config.altitude);
        if (eval_config.random_start) {
            CounterRng srng(eval_config.eval_seed,
                            {0x7374617274ULL, static_cast<std::uint64_t>(trial)});  // "start"
            start.x += srng.symmetric(eval_config.start_position_noise);
            start.y += srng.symmetric(eval_config.start_position_noise);
            start.yaw = wrap_angle(start.yaw + srng.symmetric(eval_config.start_yaw_noise));
        }
        CounterRng frng(eval_config.eval_seed,
                        {0x666c79ULL, static_cast<std::uint64_t>(trial)});  // "fly"
        try {
            result.trace = detail::noisy_rollout(path, controller, world, camera, sim_config,
                                                 frng, eval_config.inflight_position_noise,
                                                 eval_config.inflight_yaw_noise, start);
            result.status = result.trace.final_status;
            const auto positions = result.trace.positions();
            result.mwmd = mean_waypoint_min_distance(path, positions);
            result.mctd = mean_cross_track_distance(path, positions);
        } catch (const std::exception& e) {
            result.error = e.what();  // a model error aborts only this trial
        }
        report.trials.push_back(std::move(result));
    }
    return report;
}

inline MetricsReport evaluate(const Model<float>& model, const WaypointPath& path,
                              const BlockWorld& world, const CameraSpec& camera,
                              const SimConfig& sim_config, const EvalConfig& eval_config) {
    ModelController controller(model);
    return evaluate(controller, path, world, camera, sim_config, eval_config);
}

/// Per-trial CSV with the aggregate row last. Diverged trials are listed
/// but excluded from the distance means, as the header comment states.
inline std::string report_to_csv(const MetricsReport& report) {
    std::string out;
    out += "# path " + report.path_id + ": distance_m=" + format_double(report.path_distance_m) +
           " sum_angle_change_rad=" + format_double(report.sum_angle_change_rad) + "\n";
    out += "# distance means aggregate non-Diverged trials only\n";
    out += "trial,status,mwmd,mctd\n";
    for (const auto& t : report.trials) {
        out += std::to_string(t.trial) + ',';
        out += t.error ? "Error" : to_string(t.status);
        if (t.error) {
            out += ",,";
        } else {
            out += ',' + format_double(t.mwmd) + ',' + format_double(t.mctd);
        }
        out += '\n';
    }
    const auto mwmd = report.mean_mwmd();
    const auto mctd = report.mean_mctd();
    out += "mean,";
    out += std::to_string(report.completed_trials()) + "_completed_of_" +
           std::to_string(report.trials.size());
    out += ',' + (mwmd ? format_double(*mwmd) : std::string("Diverged"));
    out += ',' + (mctd ? format_double(*mctd) : std::string("Diverged"));
    out += '\n';
    return out;
}

struct CompareRow {
    std::string variant;
    bool random_start = false;
    MetricsReport report;
};

/// One row per (variant, random start) pair on one path, in the layout of
/// a regressor-comparison table.
inline std::vector<CompareRow> compare_regressors(
    const std::vector<std::pair<std::string, const Model<float>*>>& variants,
    const WaypointPath& path, const BlockWorld& world, const CameraSpec& camera,
    const SimConfig& sim_config, const EvalConfig& eval_base) {
    std::vector<CompareRow> rows;
    for (const auto& [name, model] : variants) {
        if (model == nullptr) {
            throw missing_checkpoint_error("compare: no checkpoint for variant '" + name + "'");
        }
        for (const bool random_start : {false, true}) {
            EvalConfig cfg = eval_base;
            cfg.random_start = random_start;
            rows.push_back({name, random_start,
                            evaluate(*model, path, world, camera, sim_config, cfg)});
        }
    }
    return rows;
}

inline std::string compare_to_csv(const std::vector<CompareRow>& rows) {
    std::string out = "# distance cells say Diverged when every trial diverged\n";
    out += "path,variant,random_start,mwmd,mctd,completed_trials,diverged_trials,trials\n";
    for (const auto& row : rows) {
        const auto mwmd = row.report.mean_mwmd();
        const auto mctd = row.report.mean_mctd();
        out += row.report.path_id + ',' + row.variant + ',' + (row.random_start ? "Yes" : "No");
        out += ',' + (mwmd ? format_double(*mwmd) : std::string("Diverged"));
        out += ',' + (mctd ? format_double(*mctd) : std::string("Diverged"));
        out += ',' + std::to_string(row.report.completed_trials());
        out += ',' + std::to_string(row.report.diverged_trials());
        out += ',' + std::to_string(row.report.trials.size()) + '\n';
    }
    return out;
}

}  // namespace waylab
