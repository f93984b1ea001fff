#include <catch2/catch_amalgamated.hpp>

#include "waylab/config.hpp"

using namespace waylab;

TEST_CASE("default config resolves, validates, and derives seeds") {
    const auto config = default_config();
    CHECK(config.seed == 1);
    CHECK(config.world_seed == derive_stream(1, {1}));
    CHECK(config.envelope.seed == derive_stream(1, {2}));
    CHECK(config.train.extractor_seed == derive_stream(1, {3}));
    CHECK(config.eval.eval_seed == derive_stream(1, {6}));
    CHECK(config.sim.max_steps == kAutoMaxSteps);
    CHECK(config.train.train.learning_rate == 1e-4);
    CHECK(config.train.train.batch_size == 64);
    CHECK(config.train.train.epochs == 100);
    CHECK(config.envelope.position_noise == 1.0);
    CHECK(config.envelope.yaw_noise == 0.1);
}

TEST_CASE("config parse applies overrides and keeps explicit seeds") {
    const std::string text = R"(
# comment line
seed = 9
[world]
block_count = 12
[envelope]
seed = 777
[train]
variant = gru
timesteps = 4
)";
    const auto config = parse_config(text);
    CHECK(config.seed == 9);
    CHECK(config.world.block_count == 12);
    CHECK(config.envelope.seed == 777);  // explicit beats derivation
    CHECK(config.world_seed == derive_stream(9, {1}));
    CHECK(config.train.variant == "gru");
    CHECK(config.model_spec().timesteps == 4);
}

TEST_CASE("seed override recomputes derived seeds but not explicit ones") {
    const std::string text = "seed = 3\n[envelope]\nseed = 55\n";
    const auto config = parse_config(text, 100);
    CHECK(config.seed == 100);
    CHECK(config.world_seed == derive_stream(100, {1}));
    CHECK(config.envelope.seed == 55);
}

TEST_CASE("unknown sections, unknown keys, duplicates, and junk are rejected") {
    CHECK_THROWS_AS(parse_config("[warp]\nspeed = 9\n"), validation_error);
    CHECK_THROWS_AS(parse_config("[world]\nblok_count = 9\n"), validation_error);
    CHECK_THROWS_AS(parse_config("[world]\nseed = 1\nseed = 2\n"), validation_error);
    CHECK_THROWS_AS(parse_config("not a key value line\n"), validation_error);
    CHECK_THROWS_AS(parse_config("[world\nseed = 1\n"), validation_error);
    CHECK_THROWS_AS(parse_config("[world]\nblock_count = plenty\n"), validation_error);
    // Top-level keys other than seed do not exist.
    CHECK_THROWS_AS(parse_config("block_count = 2\n"), validation_error);
}

TEST_CASE("invalid field values fail validation at load") {
    CHECK_THROWS_AS(parse_config("[sim]\nspeed = 0\n"), invalid_params_error);
    CHECK_THROWS_AS(parse_config("[camera]\nwidth = 2\n"), invalid_params_error);
    CHECK_THROWS_AS(parse_config("[train]\nvariant = transformer\n"), invalid_params_error);
    CHECK_THROWS_AS(parse_config("[path]\nkind = spiral\n"), invalid_params_error);
}

TEST_CASE("canonicalization is a fixed point and hashes are stable") {
    const auto config = parse_config("seed = 4\n[world]\nblock_count = 33\n");
    const std::string canon = canonical_config(config);
    const auto reloaded = parse_config(canon);
    CHECK(canonical_config(reloaded) == canon);
    CHECK(config_hash(reloaded) == config_hash(config));

    // Different content, different hash; formatting differences, same hash.
    const auto other = parse_config("seed = 4\n[world]\nblock_count = 34\n");
    CHECK(config_hash(other) != config_hash(config));
    const auto spaced = parse_config("seed=4\n[world]\n  block_count   =  33 # note\n");
    CHECK(config_hash(spaced) == config_hash(config));
}

TEST_CASE("canonical config lists every schema field exactly once") {
    const auto canon = canonical_config(default_config());
    for (const auto& key : {"seed = ", "block_count = ", "horizontal_fov = ", "kind = ",
                            "waypoint_radius = ", "auxiliary_path_count = ", "learning_rate = ",
                            "inflight_position_noise = "}) {
        CHECK(canon.find(key) != std::string::npos);
    }
    // Exactly one [train] section with one learning_rate.
    CHECK(canon.find("learning_rate") == canon.rfind("learning_rate"));
}

TEST_CASE("model_spec mirrors the camera and train sections") {
    auto config = default_config();
    config.camera.width = 512;
    config.camera.height = 288;
    config.train.variant = "gru";
    config.train.timesteps = 2;
    const auto spec = config.model_spec();
    CHECK(spec.extractor.input_width == 512);
    CHECK(spec.extractor.input_height == 288);
    CHECK(spec.variant == RegressorVariant::Gru);
    CHECK(spec.timesteps == 2);

    config.train.variant = "fcnn";
    CHECK(config.model_spec().timesteps == 1);
}
