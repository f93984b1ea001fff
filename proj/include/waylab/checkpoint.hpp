#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <string>

#include "waylab/model.hpp"
#include "waylab/train.hpp"
#include "waylab/util.hpp"

namespace waylab {

/// Self-describing binary checkpoint: "WLCK" magic, version, the model
/// spec and training seeds/config, then named little-endian f32 parameter
/// blocks in the canonical params() order.
namespace ckpt_detail {

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::string& out, double v) {
    put_u64(out, std::bit_cast<std::uint64_t>(v));
}

inline void put_f32(std::string& out, float v) {
    put_u32(out, std::bit_cast<std::uint32_t>(v));
}

struct Reader {
    const std::uint8_t* p;
    const std::uint8_t* end;

    void need(std::size_t n) const {
        if (static_cast<std::size_t>(end - p) < n) {
            throw validation_error("checkpoint: truncated file");
        }
    }

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(*p++) << (8 * i);
        return v;
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(*p++) << (8 * i);
        return v;
    }

    double f64() { return std::bit_cast<double>(u64()); }
    float f32() { return std::bit_cast<float>(u32()); }

    std::string str(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(p), n);
        p += n;
        return s;
    }
};

}  // namespace ckpt_detail

inline constexpr std::uint32_t kCheckpointVersion = 1;

template <typename S>
void save_checkpoint(Model<S>& model, const TrainConfig& config,
                     const std::filesystem::path& file) {
    using namespace ckpt_detail;
    std::string out = "WLCK";
    put_u32(out, kCheckpointVersion);
    out.push_back(model.spec.variant == RegressorVariant::Fcnn ? '\0' : '\1');
    put_u32(out, static_cast<std::uint32_t>(model.spec.timesteps));
    put_u32(out, static_cast<std::uint32_t>(model.spec.extractor.input_width));
    put_u32(out, static_cast<std::uint32_t>(model.spec.extractor.input_height));
    put_u32(out, static_cast<std::uint32_t>(model.spec.extractor.stage1_channels));
    put_u32(out, static_cast<std::uint32_t>(model.spec.extractor.stage2_channels));
    put_u64(out, model.spec.extractor.seed);
    put_u32(out, static_cast<std::uint32_t>(model.spec.hidden1));
    put_u32(out, static_cast<std::uint32_t>(model.spec.hidden2));
    put_u32(out, static_cast<std::uint32_t>(model.spec.gru_hidden));
    put_f64(out, config.learning_rate);
    put_u32(out, static_cast<std::uint32_t>(config.batch_size));
    put_u32(out, static_cast<std::uint32_t>(config.epochs));
    put_u32(out, static_cast<std::uint32_t>(config.lr_halving_period));
    put_f64(out, config.adam_beta1);
    put_f64(out, config.adam_beta2);
    put_f64(out, config.adam_epsilon);
    put_u64(out, config.shuffle_seed);
    put_u64(out, config.init_seed);

    auto params = model.params();
    put_u32(out, static_cast<std::uint32_t>(params.size()));
    for (const auto& p : params) {
        put_u32(out, static_cast<std::uint32_t>(p.name.size()));
        out += p.name;
        put_u32(out, static_cast<std::uint32_t>(p.matrix->rows()));
        put_u32(out, static_cast<std::uint32_t>(p.matrix->cols()));
        for (Eigen::Index r = 0; r < p.matrix->rows(); ++r) {
            for (Eigen::Index c = 0; c < p.matrix->cols(); ++c) {
                put_f32(out, static_cast<float>((*p.matrix)(r, c)));
            }
        }
    }
    write_binary_file(file, out.data(), out.size());
}

struct LoadedCheckpoint {
    Model<float> model;
    TrainConfig train_config;
};

inline LoadedCheckpoint load_checkpoint(const std::filesystem::path& file) {
    using namespace ckpt_detail;
    if (!std::filesystem::exists(file)) {
        throw missing_checkpoint_error("checkpoint not found: " + file.string());
    }
    const auto bytes = read_binary_file(file);
    Reader in{bytes.data(), bytes.data() + bytes.size()};
    if (in.str(4) != "WLCK") throw validation_error("checkpoint: bad magic");
    if (in.u32() != kCheckpointVersion) throw validation_error("checkpoint: unsupported version");

    ModelSpec spec;
    in.need(1);
    spec.variant = *in.p++ == '\0' ? RegressorVariant::Fcnn : RegressorVariant::Gru;
    spec.timesteps = static_cast<int>(in.u32());
    spec.extractor.input_width = static_cast<int>(in.u32());
    spec.extractor.input_height = static_cast<int>(in.u32());
    spec.extractor.stage1_channels = static_cast<int>(in.u32());
    spec.extractor.stage2_channels = static_cast<int>(in.u32());
    spec.extractor.seed = in.u64();
    spec.hidden1 = static_cast<int>(in.u32());
    spec.hidden2 = static_cast<int>(in.u32());
    spec.gru_hidden = static_cast<int>(in.u32());

    TrainConfig config;
    config.learning_rate = in.f64();
    config.batch_size = static_cast<int>(in.u32());
    config.epochs = static_cast<int>(in.u32());
    config.lr_halving_period = static_cast<int>(in.u32());
    config.adam_beta1 = in.f64();
    config.adam_beta2 = in.f64();
    config.adam_epsilon = in.f64();
    config.shuffle_seed = in.u64();
    config.init_seed = in.u64();

    LoadedCheckpoint loaded{Model<float>::build(spec, config.init_seed), config};
    auto params = loaded.model.params();
    const std::uint32_t block_count = in.u32();
    if (block_count != params.size()) {
        throw validation_error("checkpoint: expected " + std::to_string(params.size()) +
                               " parameter blocks, found " + std::to_string(block_count));
    }
    for (auto& p : params) {
        const auto name = in.str(in.u32());
        if (name != p.name) {
            throw validation_error("checkpoint: block '" + name + "' where '" + p.name +
                                   "' was expected");
        }
        const auto rows = static_cast<Eigen::Index>(in.u32());
        const auto cols = static_cast<Eigen::Index>(in.u32());
        if (rows != p.matrix->rows() || cols != p.matrix->cols()) {
            throw validation_error("checkpoint: block '" + name + "' shape mismatch");
        }
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) {
                (*p.matrix)(r, c) = in.f32();
            }
        }
    }
    if (in.p != in.end) throw validation_error("checkpoint: trailing bytes");
    return loaded;
}

}  // namespace waylab
