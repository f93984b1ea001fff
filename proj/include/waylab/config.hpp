#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "waylab/dataset.hpp"
#include "waylab/eval.hpp"
#include "waylab/hash.hpp"
#include "waylab/model.hpp"
#include "waylab/path.hpp"
#include "waylab/train.hpp"
#include "waylab/world.hpp"

namespace waylab {

/// Parameters for the canonical test-path factories; `kind` selects which
/// of the other fields matter.
struct PathSection {
    std::string kind = "zigzag";  // straight | l | zigzag | loop
    double length = 100.0;        // straight
    int waypoint_count = 5;       // straight, loop
    double leg = 22.0;            // l, zigzag
    int segments = 7;             // zigzag
    double turn = kPi / 3.0;      // zigzag
    double radius = 25.0;         // loop

    WaypointPath make(const std::string& id = "") const {
        const std::string path_id = id.empty() ? kind : id;
        if (kind == "straight") return make_straight_path(length, waypoint_count, path_id);
        if (kind == "l") return make_l_path(leg, path_id);
        if (kind == "zigzag") return make_zigzag_path(segments, leg, turn, path_id);
        if (kind == "loop") return make_loop_path(radius, waypoint_count, path_id);
        throw invalid_params_error("path: unknown kind '" + kind + "'");
    }
};

/// Model architecture and optimizer settings, one section in the run
/// config. The extractor seed and the two training seeds default to
/// streams derived from the master seed.
struct TrainSection {
    std::string variant = "fcnn";  // fcnn | gru
    int timesteps = 2;             // GRU window; FCNN always uses 1
    int hidden1 = 64;
    int hidden2 = 32;
    int gru_hidden = 64;
    int conv1_channels = 4;
    int conv2_channels = 8;
    std::uint64_t extractor_seed = 0;
    TrainConfig train;

    RegressorVariant regressor_variant() const {
        if (variant == "fcnn") return RegressorVariant::Fcnn;
        if (variant == "gru") return RegressorVariant::Gru;
        throw invalid_params_error("train: unknown variant '" + variant + "'");
    }
};

/// The resolved run configuration: one master seed plus a section per
/// module. Loading rejects unknown keys; canonicalize() re-emits every
/// field in a fixed order so the byte hash can name the run directory.
struct RunConfig {
    std::uint64_t seed = 1;
    std::uint64_t world_seed = 0;
    WorldParams world;
    CameraSpec camera;
    PathSection path;
    SimConfig sim;
    EnvelopeConfig envelope;
    TrainSection train;
    EvalConfig eval;

    RunConfig() { sim.max_steps = kAutoMaxSteps; }  // runs size their step budget to the path

    ModelSpec model_spec() const {
        ModelSpec spec;
        spec.extractor.input_width = camera.width;
        spec.extractor.input_height = camera.height;
        spec.extractor.stage1_channels = train.conv1_channels;
        spec.extractor.stage2_channels = train.conv2_channels;
        spec.extractor.seed = train.extractor_seed;
        spec.variant = train.regressor_variant();
        spec.timesteps = spec.variant == RegressorVariant::Fcnn ? 1 : train.timesteps;
        spec.hidden1 = train.hidden1;
        spec.hidden2 = train.hidden2;
        spec.gru_hidden = train.gru_hidden;
        return spec;
    }

    void validate() const {
        world.validate();
        camera.validate();
        sim.validate();
        envelope.validate();
        train.train.validate();
        eval.validate();
        (void)train.regressor_variant();
        if (path.kind != "straight" && path.kind != "l" && path.kind != "zigzag" &&
            path.kind != "loop") {
            throw invalid_params_error("path: unknown kind '" + path.kind + "'");
        }
    }
};

namespace config_detail {

struct Field {
    std::string key;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

inline std::string bool_str(bool v) { return v ? "true" : "false"; }

inline bool parse_bool(const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw validation_error("config: expected true/false, got '" + v + "'");
}

inline std::uint64_t parse_u64(const std::string& v) {
    std::uint64_t n = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), n);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
        throw validation_error("config: expected a non-negative integer, got '" + v + "'");
    }
    return n;
}

#define WAYLAB_FIELD_D(key, expr)                                              \
    Field{key, [](const RunConfig& c) { return format_double(c.expr); },       \
          [](RunConfig& c, const std::string& v) { c.expr = parse_double(v); }}
#define WAYLAB_FIELD_I(key, expr)                                              \
    Field{key, [](const RunConfig& c) { return std::to_string(c.expr); },      \
          [](RunConfig& c, const std::string& v) { c.expr = static_cast<int>(parse_int(v)); }}
#define WAYLAB_FIELD_U(key, expr)                                              \
    Field{key, [](const RunConfig& c) { return std::to_string(c.expr); },      \
          [](RunConfig& c, const std::string& v) { c.expr = parse_u64(v); }}
#define WAYLAB_FIELD_B(key, expr)                                              \
    Field{key, [](const RunConfig& c) { return bool_str(c.expr); },            \
          [](RunConfig& c, const std::string& v) { c.expr = parse_bool(v); }}
#define WAYLAB_FIELD_S(key, expr)                                              \
    Field{key, [](const RunConfig& c) { return c.expr; },                      \
          [](RunConfig& c, const std::string& v) { c.expr = v; }}

/// Section and key order here fixes the canonical serialization.
inline const std::vector<std::pair<std::string, std::vector<Field>>>& schema() {
    static const std::vector<std::pair<std::string, std::vector<Field>>> s = {
        {"", {WAYLAB_FIELD_U("seed", seed)}},
        {"world",
         {WAYLAB_FIELD_U("seed", world_seed), WAYLAB_FIELD_I("block_count", world.block_count),
          WAYLAB_FIELD_D("area_extent", world.area_extent),
          WAYLAB_FIELD_D("size_min", world.size_min), WAYLAB_FIELD_D("size_max", world.size_max),
          WAYLAB_FIELD_D("shade_min", world.shade_min),
          WAYLAB_FIELD_D("shade_max", world.shade_max),
          WAYLAB_FIELD_D("ground_shade", world.ground_shade),
          WAYLAB_FIELD_D("sky_shade", world.sky_shade)}},
        {"camera",
         {WAYLAB_FIELD_I("width", camera.width), WAYLAB_FIELD_I("height", camera.height),
          WAYLAB_FIELD_D("horizontal_fov", camera.horizontal_fov)}},
        {"path",
         {WAYLAB_FIELD_S("kind", path.kind), WAYLAB_FIELD_D("length", path.length),
          WAYLAB_FIELD_I("waypoint_count", path.waypoint_count), WAYLAB_FIELD_D("leg", path.leg),
          WAYLAB_FIELD_I("segments", path.segments), WAYLAB_FIELD_D("turn", path.turn),
          WAYLAB_FIELD_D("radius", path.radius)}},
        {"sim",
         {WAYLAB_FIELD_D("speed", sim.speed), WAYLAB_FIELD_D("altitude", sim.altitude),
          WAYLAB_FIELD_D("dt", sim.dt), WAYLAB_FIELD_D("max_yaw_rate", sim.max_yaw_rate),
          WAYLAB_FIELD_D("waypoint_radius", sim.waypoint_radius),
          WAYLAB_FIELD_I("max_steps", sim.max_steps),
          WAYLAB_FIELD_D("divergence_limit", sim.divergence_limit)}},
        {"envelope",
         {WAYLAB_FIELD_I("auxiliary_path_count", envelope.auxiliary_path_count),
          WAYLAB_FIELD_D("position_noise", envelope.position_noise),
          WAYLAB_FIELD_D("yaw_noise", envelope.yaw_noise), WAYLAB_FIELD_U("seed", envelope.seed),
          WAYLAB_FIELD_B("per_path_offset", envelope.per_path_offset)}},
        {"train",
         {WAYLAB_FIELD_S("variant", train.variant), WAYLAB_FIELD_I("timesteps", train.timesteps),
          WAYLAB_FIELD_I("hidden1", train.hidden1), WAYLAB_FIELD_I("hidden2", train.hidden2),
          WAYLAB_FIELD_I("gru_hidden", train.gru_hidden),
          WAYLAB_FIELD_I("conv1_channels", train.conv1_channels),
          WAYLAB_FIELD_I("conv2_channels", train.conv2_channels),
          WAYLAB_FIELD_U("extractor_seed", train.extractor_seed),
          WAYLAB_FIELD_D("learning_rate", train.train.learning_rate),
          WAYLAB_FIELD_I("batch_size", train.train.batch_size),
          WAYLAB_FIELD_I("epochs", train.train.epochs),
          WAYLAB_FIELD_I("lr_halving_period", train.train.lr_halving_period),
          WAYLAB_FIELD_D("adam_beta1", train.train.adam_beta1),
          WAYLAB_FIELD_D("adam_beta2", train.train.adam_beta2),
          WAYLAB_FIELD_D("adam_epsilon", train.train.adam_epsilon),
          WAYLAB_FIELD_U("shuffle_seed", train.train.shuffle_seed),
          WAYLAB_FIELD_U("init_seed", train.train.init_seed)}},
        {"eval",
         {WAYLAB_FIELD_B("random_start", eval.random_start),
          WAYLAB_FIELD_D("start_position_noise", eval.start_position_noise),
          WAYLAB_FIELD_D("start_yaw_noise", eval.start_yaw_noise),
          WAYLAB_FIELD_D("inflight_position_noise", eval.inflight_position_noise),
          WAYLAB_FIELD_D("inflight_yaw_noise", eval.inflight_yaw_noise),
          WAYLAB_FIELD_I("trials", eval.trials), WAYLAB_FIELD_U("seed", eval.eval_seed)}},
    };
    return s;
}

#undef WAYLAB_FIELD_D
#undef WAYLAB_FIELD_I
#undef WAYLAB_FIELD_U
#undef WAYLAB_FIELD_B
#undef WAYLAB_FIELD_S

}  // namespace config_detail

/// Seed fields not given explicitly are derived from the master seed, one
/// independent stream per role.
inline void derive_seeds(RunConfig& config, const std::set<std::string>& explicit_keys) {
    auto derived = [&](const char* key, std::uint64_t role) -> std::optional<std::uint64_t> {
        if (explicit_keys.contains(key)) return std::nullopt;
        return derive_stream(config.seed, {role});
    };
    if (auto v = derived("world.seed", 1)) config.world_seed = *v;
    if (auto v = derived("envelope.seed", 2)) config.envelope.seed = *v;
    if (auto v = derived("train.extractor_seed", 3)) config.train.extractor_seed = *v;
    if (auto v = derived("train.init_seed", 4)) config.train.train.init_seed = *v;
    if (auto v = derived("train.shuffle_seed", 5)) config.train.train.shuffle_seed = *v;
    if (auto v = derived("eval.seed", 6)) config.eval.eval_seed = *v;
}

/// Parse the `key = value` config text. Unknown sections or keys are
/// rejected; duplicate keys too. Returns the resolved config.
inline RunConfig parse_config(const std::string& text,
                              std::optional<std::uint64_t> seed_override = std::nullopt) {
    RunConfig config;
    std::set<std::string> seen;
    std::string section;
    int line_no = 0;
    for (const auto& raw_line : split(text, '\n')) {
        ++line_no;
        std::string line = raw_line;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw validation_error("config line " + std::to_string(line_no) +
                                       ": unterminated section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            bool known = false;
            for (const auto& [name, fields] : config_detail::schema()) known |= name == section;
            if (!known) {
                throw validation_error("config line " + std::to_string(line_no) +
                                       ": unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw validation_error("config line " + std::to_string(line_no) +
                                   ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const config_detail::Field* field = nullptr;
        for (const auto& [name, fields] : config_detail::schema()) {
            if (name != section) continue;
            for (const auto& f : fields) {
                if (f.key == key) field = &f;
            }
        }
        if (field == nullptr) {
            throw validation_error("config line " + std::to_string(line_no) + ": unknown key '" +
                                   key + "' in section [" + section + "]");
        }
        const std::string qualified = section.empty() ? key : section + "." + key;
        if (!seen.insert(qualified).second) {
            throw validation_error("config line " + std::to_string(line_no) + ": duplicate key '" +
                                   qualified + "'");
        }
        field->set(config, value);
    }
    if (seed_override) {
        config.seed = *seed_override;
        seen.erase("seed");
    }
    derive_seeds(config, seen);
    config.validate();
    return config;
}

/// Canonical form: every field, fixed order, `key = value`. load ->
/// canonicalize -> load is a fixed point, and the FNV hash of these bytes
/// names the run directory.
inline std::string canonical_config(const RunConfig& config) {
    std::string out;
    for (const auto& [name, fields] : config_detail::schema()) {
        if (!name.empty()) out += "[" + name + "]\n";
        for (const auto& f : fields) out += f.key + " = " + f.get(config) + "\n";
    }
    return out;
}

inline std::string config_hash(const RunConfig& config) {
    return to_hex(fnv1a64(canonical_config(config)));
}

inline RunConfig load_config_file(const std::filesystem::path& file,
                                  std::optional<std::uint64_t> seed_override = std::nullopt) {
    return parse_config(read_text_file(file), seed_override);
}

inline RunConfig default_config(std::optional<std::uint64_t> seed_override = std::nullopt) {
    return parse_config("", seed_override);
}

}  // namespace waylab
