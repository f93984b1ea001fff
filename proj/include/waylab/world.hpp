#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "waylab/errors.hpp"
#include "waylab/rng.hpp"
#include "waylab/util.hpp"

namespace waylab {

/// Axis-aligned box resting in the scene; shade is flat grayscale in [0,1].
struct Block {
    std::array<double, 3> center{};
    std::array<double, 3> size{};
    double shade = 0.5;
};

struct WorldParams {
    int block_count = 80;
    double area_extent = 120.0;  // blocks are placed in [-extent, extent]^2
    double size_min = 2.0;
    double size_max = 8.0;
    double shade_min = 0.15;
    double shade_max = 0.9;
    double ground_shade = 0.45;
    double sky_shade = 0.95;

    void validate() const {
        if (block_count < 0) throw invalid_params_error("world: block_count must be >= 0");
        if (area_extent <= 0.0) throw invalid_params_error("world: area_extent must be positive");
        if (size_min <= 0.0 || size_max < size_min) {
            throw invalid_params_error("world: size range must be positive and ordered");
        }
        if (shade_min < 0.0 || shade_max > 1.0 || shade_max < shade_min) {
            throw invalid_params_error("world: shade range must be ordered within [0, 1]");
        }
        if (ground_shade < 0.0 || ground_shade > 1.0 || sky_shade < 0.0 || sky_shade > 1.0) {
            throw invalid_params_error("world: ground/sky shades must be in [0, 1]");
        }
    }
};

/// Deterministic synthetic blocks scene; a pure function of (seed, params).
struct BlockWorld {
    std::uint64_t seed = 0;
    WorldParams params;
    std::vector<Block> blocks;

    double ground_shade() const { return params.ground_shade; }
    double sky_shade() const { return params.sky_shade; }
};

/// Place `block_count` boxes uniformly in the area, sitting on the ground,
/// with per-axis sizes and shades drawn from the configured ranges. Draws
/// come from the documented CounterRng stream (seed, "world"), six per
/// block in a fixed order, so the same inputs always give the same world.
inline BlockWorld generate_world(std::uint64_t seed, const WorldParams& params) {
    params.validate();
    BlockWorld world;
    world.seed = seed;
    world.params = params;
    CounterRng rng(seed, {0x776f726c64ULL});  // "world"
    world.blocks.reserve(static_cast<std::size_t>(params.block_count));
    for (int i = 0; i < params.block_count; ++i) {
        Block b;
        const double cx = rng.symmetric(params.area_extent);
        const double cy = rng.symmetric(params.area_extent);
        b.size = {rng.uniform(params.size_min, params.size_max),
                  rng.uniform(params.size_min, params.size_max),
                  rng.uniform(params.size_min, params.size_max)};
        b.center = {cx, cy, b.size[2] / 2.0};
        b.shade = rng.uniform(params.shade_min, params.shade_max);
        world.blocks.push_back(b);
    }
    return world;
}

inline nlohmann::json world_params_to_json(const WorldParams& p) {
    return nlohmann::json{{"block_count", p.block_count},
                          {"area_extent", p.area_extent},
                          {"size_min", p.size_min},
                          {"size_max", p.size_max},
                          {"shade_min", p.shade_min},
                          {"shade_max", p.shade_max},
                          {"ground_shade", p.ground_shade},
                          {"sky_shade", p.sky_shade}};
}

inline WorldParams world_params_from_json(const nlohmann::json& j) {
    WorldParams p;
    p.block_count = j.at("block_count").get<int>();
    p.area_extent = j.at("area_extent").get<double>();
    p.size_min = j.at("size_min").get<double>();
    p.size_max = j.at("size_max").get<double>();
    p.shade_min = j.at("shade_min").get<double>();
    p.shade_max = j.at("shade_max").get<double>();
    p.ground_shade = j.at("ground_shade").get<double>();
    p.sky_shade = j.at("sky_shade").get<double>();
    return p;
}

inline nlohmann::json world_to_json(const BlockWorld& world) {
    nlohmann::json j;
    j["seed"] = world.seed;
    j["params"] = world_params_to_json(world.params);
    auto& blocks = j["blocks"] = nlohmann::json::array();
    for (const auto& b : world.blocks) {
        blocks.push_back({{"center", b.center}, {"size", b.size}, {"shade", b.shade}});
    }
    return j;
}

inline BlockWorld world_from_json(const nlohmann::json& j) {
    BlockWorld world;
    world.seed = j.at("seed").get<std::uint64_t>();
    world.params = world_params_from_json(j.at("params"));
    world.params.validate();
    for (const auto& bj : j.at("blocks")) {
        Block b;
        b.center = bj.at("center").get<std::array<double, 3>>();
        b.size = bj.at("size").get<std::array<double, 3>>();
        b.shade = bj.at("shade").get<double>();
        if (b.size[0] <= 0.0 || b.size[1] <= 0.0 || b.size[2] <= 0.0) {
            throw validation_error("world file: block sizes must be strictly positive");
        }
        world.blocks.push_back(b);
    }
    return world;
}

inline void save_world(const BlockWorld& world, const std::filesystem::path& file) {
    write_text_file(file, world_to_json(world).dump(2) + "\n");
}

inline BlockWorld load_world(const std::filesystem::path& file) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(file));
    } catch (const nlohmann::json::parse_error& e) {
        throw validation_error("world file " + file.string() + ": " + e.what());
    }
    return world_from_json(j);
}

}  // namespace waylab
