#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "waylab/errors.hpp"
#include "waylab/hash.hpp"
#include "waylab/rng.hpp"

namespace waylab {

template <typename S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <typename S>
using RowX = Eigen::Matrix<S, 1, Eigen::Dynamic>;

struct ExtractorConfig {
    int input_width = 64;
    int input_height = 36;
    int stage1_channels = 4;
    int stage2_channels = 8;
    std::uint64_t seed = 101;

    void validate() const {
        if (input_width < 4 || input_height < 4) {
            throw invalid_params_error("extractor: input must be at least 4x4");
        }
        if (stage1_channels < 1 || stage2_channels < 1) {
            throw invalid_params_error("extractor: channel counts must be >= 1");
        }
    }
};

/// Frozen two-stage convolution stack: 3x3 kernels, stride 2, zero
/// padding 1, rectified-linear, no bias, then flatten. Filters are drawn
/// once from the documented stream (seed, "extractor") with fan-in-scaled
/// uniform weights and never change afterwards; features are a pure
/// function of the input frame.
template <typename S>
class FeatureExtractor {
public:
    explicit FeatureExtractor(const ExtractorConfig& config) : config_(config) {
        config.validate();
        stage1_w_ = config.input_width;
        stage1_h_ = config.input_height;
        stage2_w_ = conv_out(stage1_w_);
        stage2_h_ = conv_out(stage1_h_);
        out_w_ = conv_out(stage2_w_);
        out_h_ = conv_out(stage2_h_);

        CounterRng rng(config.seed, {0x657874726163ULL});  // "extrac"
        fill_filters(filters1_, config.stage1_channels, 1, rng);
        fill_filters(filters2_, config.stage2_channels, config.stage1_channels, rng);
    }

    const ExtractorConfig& config() const { return config_; }

    int feature_dim() const { return out_w_ * out_h_ * config_.stage2_channels; }

    std::size_t frame_size() const {
        return static_cast<std::size_t>(config_.input_width) * config_.input_height;
    }

    /// Flattened post-activation of stage 2, channel-major.
    VecX<S> features(std::span<const float> frame) const {
        if (frame.size() != frame_size()) {
            throw shape_mismatch_error("extractor: frame has " + std::to_string(frame.size()) +
                                       " pixels, expected " + std::to_string(frame_size()));
        }
        std::vector<S> input(frame.size());
        for (std::size_t i = 0; i < frame.size(); ++i) input[i] = static_cast<S>(frame[i]);

        std::vector<S> mid(static_cast<std::size_t>(config_.stage1_channels) * stage2_h_ * stage2_w_);
        convolve(input.data(), 1, stage1_h_, stage1_w_, filters1_, config_.stage1_channels,
                 mid.data(), stage2_h_, stage2_w_);
        std::vector<S> out(static_cast<std::size_t>(config_.stage2_channels) * out_h_ * out_w_);
        convolve(mid.data(), config_.stage1_channels, stage2_h_, stage2_w_, filters2_,
                 config_.stage2_channels, out.data(), out_h_, out_w_);

        VecX<S> v(out.size());
        for (std::size_t i = 0; i < out.size(); ++i) v(static_cast<Eigen::Index>(i)) = out[i];
        return v;
    }

    /// FNV-1a over the canonical little-endian f32 encoding of every
    /// filter, in draw order. Constant across a training run by contract.
    std::uint64_t weight_hash() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        auto fold = [&h](const std::vector<S>& ws) {
            for (S w : ws) {
                const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(w));
                const std::uint8_t bytes[4] = {
                    static_cast<std::uint8_t>(bits & 0xff),
                    static_cast<std::uint8_t>((bits >> 8) & 0xff),
                    static_cast<std::uint8_t>((bits >> 16) & 0xff),
                    static_cast<std::uint8_t>((bits >> 24) & 0xff)};
                h = fnv1a64(bytes, 4, h);
            }
        };
        fold(filters1_);
        fold(filters2_);
        return h;
    }

private:
    static constexpr int kKernel = 3;
    static constexpr int kStride = 2;
    static constexpr int kPad = 1;

    static int conv_out(int in) { return (in + 2 * kPad - kKernel) / kStride + 1; }

    void fill_filters(std::vector<S>& filters, int out_ch, int in_ch, CounterRng& rng) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(in_ch) * kKernel * kKernel);
        filters.resize(static_cast<std::size_t>(out_ch) * in_ch * kKernel * kKernel);
        for (S& w : filters) w = static_cast<S>(rng.uniform(-bound, bound));
    }

    // Layout: input/output [channel][row][col]; filters [out][in][ky][kx].
    void convolve(const S* input, int in_ch, int in_h, int in_w, const std::vector<S>& filters,
                  int out_ch, S* output, int out_h, int out_w) const {
        for (int oc = 0; oc < out_ch; ++oc) {
            for (int oy = 0; oy < out_h; ++oy) {
                for (int ox = 0; ox < out_w; ++ox) {
                    S acc = S(0);
                    const int base_y = oy * kStride - kPad;
                    const int base_x = ox * kStride - kPad;
                    for (int ic = 0; ic < in_ch; ++ic) {
                        const S* plane = input + static_cast<std::size_t>(ic) * in_h * in_w;
                        const S* kernel = filters.data() +
                                          ((static_cast<std::size_t>(oc) * in_ch + ic) * kKernel * kKernel);
                        for (int ky = 0; ky < kKernel; ++ky) {
                            const int y = base_y + ky;
                            if (y < 0 || y >= in_h) continue;
                            for (int kx = 0; kx < kKernel; ++kx) {
                                const int x = base_x + kx;
                                if (x < 0 || x >= in_w) continue;
                                acc += kernel[ky * kKernel + kx] * plane[y * in_w + x];
                            }
                        }
                    }
                    output[(static_cast<std::size_t>(oc) * out_h + oy) * out_w + ox] =
                        acc > S(0) ? acc : S(0);
                }
            }
        }
    }

    ExtractorConfig config_;
    std::vector<S> filters1_;
    std::vector<S> filters2_;
    int stage1_w_ = 0, stage1_h_ = 0;
    int stage2_w_ = 0, stage2_h_ = 0;
    int out_w_ = 0, out_h_ = 0;
};

}  // namespace waylab
