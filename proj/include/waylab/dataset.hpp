#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "waylab/rng.hpp"
#include "waylab/sim.hpp"

namespace waylab {

/// Navigation-envelope augmentation parameters. Offsets are drawn uniform
/// in [-position_noise, +position_noise] per axis and
/// [-yaw_noise, +yaw_noise] per step (or once per flight when
/// per_path_offset is set).
struct EnvelopeConfig {
    int auxiliary_path_count = 32;
    double position_noise = 1.0;  // meters
    double yaw_noise = 0.1;       // radians
    std::uint64_t seed = 0;
    bool per_path_offset = false;

    void validate() const {
        if (auxiliary_path_count < 1) {
            throw invalid_params_error("envelope: auxiliary_path_count must be >= 1");
        }
        if (position_noise < 0.0 || yaw_noise < 0.0) {
            throw invalid_params_error("envelope: noise magnitudes must be >= 0");
        }
    }
};

struct Sample {
    std::size_t frame_ref = 0;  // index into the dataset frame store
    double label = 0.0;         // relative yaw at the recorded pose, (-pi, pi]
    int path_ordinal = 0;       // auxiliary flight id
    int step_ordinal = 0;       // step within that flight
};

struct DatasetManifest {
    std::string path_id;
    std::uint64_t world_seed = 0;
    CameraSpec camera;
    EnvelopeConfig envelope;
    SimConfig sim;
    std::size_t sample_count = 0;
    int frame_width = 0;
    int frame_height = 0;
    int discarded_flights = 0;
};

/// Samples plus a contiguous row-major frame store, one frame per sample.
struct Dataset {
    DatasetManifest manifest;
    std::vector<Sample> samples;
    std::vector<float> frames;

    std::size_t frame_size() const {
        return static_cast<std::size_t>(manifest.frame_width) * manifest.frame_height;
    }

    std::span<const float> frame(std::size_t ref) const {
        return {frames.data() + ref * frame_size(), frame_size()};
    }
};

struct PerturbedFlight {
    RolloutTrace trace;
    std::vector<Sample> samples;
    std::vector<float> frames;
    int discarded_before = 0;  // diverged attempts regenerated away
};

namespace detail {

/// Draw order per step is fixed (dx, dy, dyaw) so recorded flights can be
/// replayed from the stream key alone.
struct EnvelopeStream {
    CounterRng rng;

    EnvelopeStream(const EnvelopeConfig& cfg, int aux_index, int attempt)
        : rng(cfg.seed, {0x656e76ULL,  // "env"
                         static_cast<std::uint64_t>(aux_index),
                         static_cast<std::uint64_t>(attempt)}) {}

    void perturb(Pose& pose, const EnvelopeConfig& cfg) {
        pose.x += rng.symmetric(cfg.position_noise);
        pose.y += rng.symmetric(cfg.position_noise);
        pose.yaw = wrap_angle(pose.yaw + rng.symmetric(cfg.yaw_noise));
    }
};

}  // namespace detail

/// Fly one auxiliary path: an oracle-controlled flight whose pose is
/// perturbed from the stream derived from (seed, aux_index). Each step
/// applies the position offset and heading offset to the pose, then
/// records the frame rendered there with the clean oracle command from
/// that perturbed pose as its label — noise corrupts the flight, never
/// the label. Diverged flights are discarded and regenerated from the
/// next substream.
inline PerturbedFlight perturb_rollout(const WaypointPath& path, const EnvelopeConfig& envelope,
                                       int aux_index, const BlockWorld& world,
                                       const CameraSpec& camera, const SimConfig& sim_config) {
    envelope.validate();
    if (aux_index < 0 || aux_index >= envelope.auxiliary_path_count) {
        throw invalid_params_error("perturb_rollout: aux_index out of range");
    }
    const SimConfig sim = resolve_sim(sim_config, path);
    constexpr int kMaxAttempts = 32;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        detail::EnvelopeStream stream(envelope, aux_index, attempt);
        SimState state = initial_state(path, sim);
        if (envelope.per_path_offset) {
            stream.perturb(state.pose, envelope);
        }
        PerturbedFlight flight;
        flight.discarded_before = attempt;
        int step_ordinal = 0;
        while (state.status == SimStatus::Running) {
            if (!envelope.per_path_offset) {
                stream.perturb(state.pose, envelope);
            }
            const double label = oracle_command(state, path);
            const Frame frame = render(world, state.pose, camera);
            flight.samples.push_back(
                {flight.samples.size(), label, aux_index, step_ordinal++});
            flight.frames.insert(flight.frames.end(), frame.pixels.begin(), frame.pixels.end());
            flight.trace.rows.push_back({state.step_count, state.step_count * sim.dt,
                                         state.pose, label, state.next_waypoint_index,
                                         SimStatus::Running});
            state = step(state, label, sim, path);
        }
        flight.trace.rows.push_back({state.step_count, state.step_count * sim.dt,
                                     state.pose, 0.0, state.next_waypoint_index, state.status});
        flight.trace.final_status = state.status;
        if (state.status != SimStatus::Diverged) return flight;
    }
    throw std::runtime_error("perturb_rollout: auxiliary flight " + std::to_string(aux_index) +
                             " diverged on every substream; noise exceeds what the path tolerates");
}

/// Concatenate every auxiliary flight's samples and frames, in aux order.
/// The result is a pure function of the seeds and configs.
inline Dataset build_dataset(const WaypointPath& path, const BlockWorld& world,
                             const EnvelopeConfig& envelope, const CameraSpec& camera,
                             const SimConfig& sim_config) {
    envelope.validate();
    camera.validate();
    sim_config.validate();
    const SimConfig sim = resolve_sim(sim_config, path);
    for (const Vec2& w : path.waypoints) {
        if (std::abs(w.x) > world.params.area_extent || std::abs(w.y) > world.params.area_extent) {
            throw world_path_mismatch_error("build_dataset: path '" + path.id +
                                            "' leaves the world extent of " +
                                            format_double(world.params.area_extent) + " m");
        }
    }
    Dataset ds;
    ds.manifest.path_id = path.id;
    ds.manifest.world_seed = world.seed;
    ds.manifest.camera = camera;
    ds.manifest.envelope = envelope;
    ds.manifest.sim = sim;
    ds.manifest.frame_width = camera.width;
    ds.manifest.frame_height = camera.height;
    for (int aux = 0; aux < envelope.auxiliary_path_count; ++aux) {
        PerturbedFlight flight = perturb_rollout(path, envelope, aux, world, camera, sim);
        const std::size_t base = ds.samples.size();
        for (Sample s : flight.samples) {
            s.frame_ref += base;
            ds.samples.push_back(s);
        }
        ds.frames.insert(ds.frames.end(), flight.frames.begin(), flight.frames.end());
        ds.manifest.discarded_flights += flight.discarded_before;
    }
    ds.manifest.sample_count = ds.samples.size();
    return ds;
}

struct SequenceWindow {
    std::vector<std::size_t> frame_refs;  // length == timesteps
    double label = 0.0;                   // last sample's label
};

/// Sliding windows of consecutive samples within one auxiliary flight;
/// windows never span flights, and flights shorter than the window
/// contribute none. timesteps == 1 reduces to the plain sample list.
inline std::vector<SequenceWindow> sequence_windows(const Dataset& dataset, int timesteps) {
    if (timesteps < 1) throw invalid_params_error("sequence_windows: timesteps must be >= 1");
    std::vector<SequenceWindow> windows;
    const auto& samples = dataset.samples;
    std::size_t run_start = 0;
    for (std::size_t i = 0; i <= samples.size(); ++i) {
        const bool run_ends = i == samples.size() ||
                              (i > run_start && samples[i].path_ordinal != samples[run_start].path_ordinal);
        if (!run_ends) continue;
        const std::size_t run_len = i - run_start;
        if (run_len >= static_cast<std::size_t>(timesteps)) {
            for (std::size_t w = run_start; w + timesteps <= i; ++w) {
                SequenceWindow window;
                for (int t = 0; t < timesteps; ++t) {
                    window.frame_refs.push_back(samples[w + t].frame_ref);
                }
                window.label = samples[w + timesteps - 1].label;
                windows.push_back(std::move(window));
            }
        }
        run_start = i;
    }
    return windows;
}

// --- Disk format: manifest.json + samples.csv + frames.f32 (LE floats). ---

inline nlohmann::json camera_to_json(const CameraSpec& c) {
    return {{"width", c.width}, {"height", c.height}, {"horizontal_fov", c.horizontal_fov}};
}

inline CameraSpec camera_from_json(const nlohmann::json& j) {
    CameraSpec c;
    c.width = j.at("width").get<int>();
    c.height = j.at("height").get<int>();
    c.horizontal_fov = j.at("horizontal_fov").get<double>();
    c.validate();
    return c;
}

inline nlohmann::json envelope_to_json(const EnvelopeConfig& e) {
    return {{"auxiliary_path_count", e.auxiliary_path_count},
            {"position_noise", e.position_noise},
            {"yaw_noise", e.yaw_noise},
            {"seed", e.seed},
            {"per_path_offset", e.per_path_offset}};
}

inline EnvelopeConfig envelope_from_json(const nlohmann::json& j) {
    EnvelopeConfig e;
    e.auxiliary_path_count = j.at("auxiliary_path_count").get<int>();
    e.position_noise = j.at("position_noise").get<double>();
    e.yaw_noise = j.at("yaw_noise").get<double>();
    e.seed = j.at("seed").get<std::uint64_t>();
    e.per_path_offset = j.at("per_path_offset").get<bool>();
    e.validate();
    return e;
}

inline nlohmann::json sim_to_json(const SimConfig& s) {
    return {{"speed", s.speed},          {"altitude", s.altitude},
            {"dt", s.dt},                {"max_yaw_rate", s.max_yaw_rate},
            {"waypoint_radius", s.waypoint_radius}, {"max_steps", s.max_steps},
            {"divergence_limit", s.divergence_limit}};
}

inline SimConfig sim_from_json(const nlohmann::json& j) {
    SimConfig s;
    s.speed = j.at("speed").get<double>();
    s.altitude = j.at("altitude").get<double>();
    s.dt = j.at("dt").get<double>();
    s.max_yaw_rate = j.at("max_yaw_rate").get<double>();
    s.waypoint_radius = j.at("waypoint_radius").get<double>();
    s.max_steps = j.at("max_steps").get<int>();
    s.divergence_limit = j.at("divergence_limit").get<double>();
    s.validate();
    return s;
}

inline void write_f32_le(std::string& out, float v) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    out.push_back(static_cast<char>(bits & 0xff));
    out.push_back(static_cast<char>((bits >> 8) & 0xff));
    out.push_back(static_cast<char>((bits >> 16) & 0xff));
    out.push_back(static_cast<char>((bits >> 24) & 0xff));
}

inline float read_f32_le(const std::uint8_t* p) {
    const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                               (static_cast<std::uint32_t>(p[1]) << 8) |
                               (static_cast<std::uint32_t>(p[2]) << 16) |
                               (static_cast<std::uint32_t>(p[3]) << 24);
    return std::bit_cast<float>(bits);
}

inline void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["format_version"] = 1;
    manifest["path_id"] = ds.manifest.path_id;
    manifest["world_seed"] = ds.manifest.world_seed;
    manifest["camera"] = camera_to_json(ds.manifest.camera);
    manifest["envelope"] = envelope_to_json(ds.manifest.envelope);
    manifest["sim"] = sim_to_json(ds.manifest.sim);
    manifest["sample_count"] = ds.manifest.sample_count;
    manifest["frame_shape"] = {ds.manifest.frame_height, ds.manifest.frame_width};
    manifest["discarded_flights"] = ds.manifest.discarded_flights;
    write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");

    std::string csv = "frame_ref,label,path_ordinal,step_ordinal\n";
    for (const Sample& s : ds.samples) {
        csv += std::to_string(s.frame_ref) + ',' + format_double(s.label) + ',' +
               std::to_string(s.path_ordinal) + ',' + std::to_string(s.step_ordinal) + '\n';
    }
    write_text_file(dir / "samples.csv", csv);

    std::string blob;
    blob.reserve(ds.frames.size() * 4);
    for (float v : ds.frames) write_f32_le(blob, v);
    write_binary_file(dir / "frames.f32", blob.data(), blob.size());
}

inline Dataset load_dataset(const std::filesystem::path& dir) {
    Dataset ds;
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(read_text_file(dir / "manifest.json"));
    } catch (const nlohmann::json::parse_error& e) {
        throw validation_error("dataset manifest: " + std::string(e.what()));
    }
    ds.manifest.path_id = manifest.at("path_id").get<std::string>();
    ds.manifest.world_seed = manifest.at("world_seed").get<std::uint64_t>();
    ds.manifest.camera = camera_from_json(manifest.at("camera"));
    ds.manifest.envelope = envelope_from_json(manifest.at("envelope"));
    ds.manifest.sim = sim_from_json(manifest.at("sim"));
    ds.manifest.sample_count = manifest.at("sample_count").get<std::size_t>();
    ds.manifest.frame_height = manifest.at("frame_shape").at(0).get<int>();
    ds.manifest.frame_width = manifest.at("frame_shape").at(1).get<int>();
    ds.manifest.discarded_flights = manifest.at("discarded_flights").get<int>();

    const auto csv = read_text_file(dir / "samples.csv");
    const auto lines = split(csv, '\n');
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        const auto cells = split(lines[i], ',');
        if (cells.size() != 4) throw validation_error("dataset samples.csv: expected 4 columns");
        Sample s;
        s.frame_ref = static_cast<std::size_t>(parse_int(cells[0]));
        s.label = parse_double(cells[1]);
        s.path_ordinal = static_cast<int>(parse_int(cells[2]));
        s.step_ordinal = static_cast<int>(parse_int(cells[3]));
        ds.samples.push_back(s);
    }

    const auto blob = read_binary_file(dir / "frames.f32");
    if (blob.size() % 4 != 0) throw validation_error("dataset frames.f32: truncated file");
    ds.frames.resize(blob.size() / 4);
    for (std::size_t i = 0; i < ds.frames.size(); ++i) {
        ds.frames[i] = read_f32_le(blob.data() + i * 4);
    }

    if (ds.samples.size() != ds.manifest.sample_count) {
        throw validation_error("dataset: manifest sample_count does not match samples.csv");
    }
    if (ds.frames.size() != ds.manifest.sample_count * ds.frame_size()) {
        throw validation_error("dataset: frame store size does not match manifest shape");
    }
    for (const Sample& s : ds.samples) {
        if (s.frame_ref >= ds.manifest.sample_count) {
            throw validation_error("dataset: sample frame_ref out of range");
        }
    }
    return ds;
}

}  // namespace waylab
