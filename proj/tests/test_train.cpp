#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "waylab/checkpoint.hpp"
#include "waylab/dataset.hpp"
#include "waylab/train.hpp"

using namespace waylab;

namespace {

ExtractorConfig tiny_extractor() {
    ExtractorConfig cfg;
    cfg.input_width = 8;
    cfg.input_height = 8;
    cfg.stage1_channels = 2;
    cfg.stage2_channels = 3;
    cfg.seed = 404;
    return cfg;
}

ModelSpec tiny_fcnn_spec() {
    ModelSpec spec;
    spec.extractor = tiny_extractor();
    spec.hidden1 = 12;
    spec.hidden2 = 6;
    return spec;
}

/// Hand-built dataset: `flights` runs of `steps` samples each, every frame
/// generated from the stream (9, flight, step) and labels by `label_of`.
template <typename LabelFn>
Dataset synthetic_dataset(int flights, int steps, const ExtractorConfig& ex, LabelFn label_of) {
    Dataset ds;
    ds.manifest.frame_width = ex.input_width;
    ds.manifest.frame_height = ex.input_height;
    const std::size_t pixels = static_cast<std::size_t>(ex.input_width) * ex.input_height;
    for (int f = 0; f < flights; ++f) {
        for (int s = 0; s < steps; ++s) {
            CounterRng rng(9, {static_cast<std::uint64_t>(f), static_cast<std::uint64_t>(s)});
            for (std::size_t i = 0; i < pixels; ++i) {
                ds.frames.push_back(static_cast<float>(rng.next_double()));
            }
            ds.samples.push_back({ds.samples.size(), label_of(f, s), f, s});
        }
    }
    ds.manifest.sample_count = ds.samples.size();
    return ds;
}

}  // namespace

TEST_CASE("learning rate halves exactly every 25 epochs") {
    TrainConfig config;  // lr 1e-4, period 25
    CHECK(learning_rate_at(config, 0) == 1e-4);
    CHECK(learning_rate_at(config, 24) == 1e-4);
    CHECK(learning_rate_at(config, 25) == 1e-4 * 0.5);
    CHECK(learning_rate_at(config, 49) == 1e-4 * 0.5);
    CHECK(learning_rate_at(config, 50) == 1e-4 * 0.25);
    CHECK(learning_rate_at(config, 75) == 1e-4 * 0.125);
    CHECK(learning_rate_at(config, 99) == 1e-4 * 0.125);
}

TEST_CASE("training fits a constant-label constant-frame dataset") {
    // One distinct frame repeated everywhere, label 0.7.
    Dataset ds;
    const auto ex = tiny_extractor();
    ds.manifest.frame_width = ex.input_width;
    ds.manifest.frame_height = ex.input_height;
    const std::size_t pixels = static_cast<std::size_t>(ex.input_width) * ex.input_height;
    CounterRng rng(10, {0});
    std::vector<float> frame;
    for (std::size_t i = 0; i < pixels; ++i) frame.push_back(static_cast<float>(rng.next_double()));
    for (int s = 0; s < 32; ++s) {
        ds.frames.insert(ds.frames.end(), frame.begin(), frame.end());
        ds.samples.push_back({ds.samples.size(), 0.7, 0, s});
    }
    ds.manifest.sample_count = ds.samples.size();

    TrainConfig config;
    config.learning_rate = 0.01;
    config.batch_size = 8;
    config.epochs = 100;
    const auto result = train<double>(ds, tiny_fcnn_spec(), config);
    const double pred = result.model.predict_frame(frame);
    CHECK(pred == Catch::Approx(0.7).margin(1e-2));
}

TEST_CASE("training is deterministic: identical seeds, identical checkpoints") {
    const auto ds = synthetic_dataset(2, 12, tiny_extractor(),
                                      [](int f, int s) { return 0.05 * s - 0.1 * f; });
    TrainConfig config;
    config.epochs = 4;
    config.batch_size = 8;
    const auto dir = std::filesystem::temp_directory_path() / "waylab_train_test";
    std::filesystem::create_directories(dir);

    auto a = train<float>(ds, tiny_fcnn_spec(), config);
    auto b = train<float>(ds, tiny_fcnn_spec(), config);
    save_checkpoint(a.model, config, dir / "a.ckpt");
    save_checkpoint(b.model, config, dir / "b.ckpt");
    CHECK(read_binary_file(dir / "a.ckpt") == read_binary_file(dir / "b.ckpt"));
    CHECK(a.epoch_loss == b.epoch_loss);

    TrainConfig other = config;
    other.shuffle_seed = 777;
    auto c = train<float>(ds, tiny_fcnn_spec(), other);
    save_checkpoint(c.model, other, dir / "c.ckpt");
    CHECK(read_binary_file(dir / "a.ckpt") != read_binary_file(dir / "c.ckpt"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("extractor weights never move during training") {
    const auto ds = synthetic_dataset(1, 20, tiny_extractor(),
                                      [](int, int s) { return 0.02 * s; });
    TrainConfig config;
    config.epochs = 6;
    const auto result = train<double>(ds, tiny_fcnn_spec(), config);
    CHECK(result.extractor_hash_before == result.extractor_hash_after);
    CHECK(result.model.extractor.weight_hash() == result.extractor_hash_before);
}

TEST_CASE("loss decreases on the straight-path zero-label dataset") {
    // All labels are exactly zero on a noise-free straight flight, so the
    // epoch averages trend down; tolerate up to 3 violations after epoch 5.
    WorldParams wp;
    wp.block_count = 12;
    wp.area_extent = 60.0;
    const auto world = generate_world(6, wp);
    EnvelopeConfig envelope;
    envelope.auxiliary_path_count = 1;
    envelope.position_noise = 0.0;
    envelope.yaw_noise = 0.0;
    const CameraSpec camera{16, 9, kPi / 2};
    const auto ds = build_dataset(make_straight_path(20.0, 2), world, envelope, camera,
                                  SimConfig{});

    ModelSpec spec = tiny_fcnn_spec();
    spec.extractor.input_width = 16;
    spec.extractor.input_height = 9;
    TrainConfig config;
    config.epochs = 30;
    config.batch_size = 16;
    const auto result = train<double>(ds, spec, config);
    // Adam dithers at a floor of ~lr^2 once the loss is solved, so an
    // epoch only counts as violating when it climbs beyond that jitter.
    int violations = 0;
    for (std::size_t e = 5; e + 1 < result.epoch_loss.size(); ++e) {
        if (result.epoch_loss[e + 1] > result.epoch_loss[e] * 1.25 + 1e-12) ++violations;
    }
    CHECK(violations <= 3);
    CHECK(result.epoch_loss.back() < result.epoch_loss.front() / 10.0);
}

TEST_CASE("gru training runs over windows and respects flight boundaries") {
    const auto ds = synthetic_dataset(3, 10, tiny_extractor(),
                                      [](int f, int s) { return 0.03 * s - 0.05 * f; });
    ModelSpec spec = tiny_fcnn_spec();
    spec.variant = RegressorVariant::Gru;
    spec.timesteps = 4;
    spec.gru_hidden = 8;
    TrainConfig config;
    config.epochs = 3;
    config.batch_size = 8;
    const auto result = train<double>(ds, spec, config);
    CHECK(result.epoch_loss.size() == 3);
    CHECK(std::isfinite(result.epoch_loss.back()));

    // 3 flights of 10 samples at T=4: 7 windows each.
    CHECK(sequence_windows(ds, 4).size() == 21);
}

TEST_CASE("checkpoints round-trip bit-identically for float models") {
    const auto ds = synthetic_dataset(2, 10, tiny_extractor(),
                                      [](int, int s) { return 0.1 * s; });
    TrainConfig config;
    config.epochs = 2;
    const auto dir = std::filesystem::temp_directory_path() / "waylab_ckpt_test";
    std::filesystem::create_directories(dir);

    for (const bool use_gru : {false, true}) {
        ModelSpec spec = tiny_fcnn_spec();
        if (use_gru) {
            spec.variant = RegressorVariant::Gru;
            spec.timesteps = 2;
            spec.gru_hidden = 7;
        }
        auto result = train<float>(ds, spec, config);
        const auto file = dir / (use_gru ? "gru.ckpt" : "fcnn.ckpt");
        save_checkpoint(result.model, config, file);
        auto loaded = load_checkpoint(file);

        CounterRng rng(80, {static_cast<std::uint64_t>(use_gru)});
        std::vector<std::vector<float>> window;
        for (int t = 0; t < spec.timesteps; ++t) {
            std::vector<float> frame(result.model.extractor.frame_size());
            for (auto& v : frame) v = static_cast<float>(rng.next_double());
            window.push_back(std::move(frame));
        }
        std::vector<std::span<const float>> spans(window.begin(), window.end());
        CHECK(loaded.model.predict(spans) == result.model.predict(spans));
        CHECK(loaded.train_config.shuffle_seed == config.shuffle_seed);

        // Saving the loaded model reproduces the same bytes.
        save_checkpoint(loaded.model, loaded.train_config, dir / "again.ckpt");
        CHECK(read_binary_file(dir / "again.ckpt") == read_binary_file(file));
    }

    CHECK_THROWS_AS(load_checkpoint(dir / "missing.ckpt"), missing_checkpoint_error);
    write_text_file(dir / "junk.ckpt", "XXXX not a checkpoint");
    CHECK_THROWS_AS(load_checkpoint(dir / "junk.ckpt"), validation_error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("train validates inputs") {
    Dataset empty;
    empty.manifest.frame_width = 8;
    empty.manifest.frame_height = 8;
    CHECK_THROWS_AS(train<double>(empty, tiny_fcnn_spec(), TrainConfig{}), empty_batch_error);

    auto ds = synthetic_dataset(1, 3, tiny_extractor(), [](int, int) { return 0.0; });
    ModelSpec spec = tiny_fcnn_spec();
    spec.variant = RegressorVariant::Gru;
    spec.timesteps = 4;  // flights shorter than the window
    CHECK_THROWS_AS(train<double>(ds, spec, TrainConfig{}), empty_batch_error);

    TrainConfig bad;
    bad.batch_size = 0;
    CHECK_THROWS_AS(train<double>(ds, tiny_fcnn_spec(), bad), invalid_params_error);
}
