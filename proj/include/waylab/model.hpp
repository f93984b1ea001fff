#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "waylab/extractor.hpp"
#include "waylab/regressor.hpp"

namespace waylab {

enum class RegressorVariant { Fcnn, Gru };

inline std::string to_string(RegressorVariant v) {
    return v == RegressorVariant::Fcnn ? "fcnn" : "gru";
}

/// Architecture description: everything needed to rebuild an untrained
/// model deterministically.
struct ModelSpec {
    ExtractorConfig extractor;
    RegressorVariant variant = RegressorVariant::Fcnn;
    int timesteps = 1;   // window length; 1 for FCNN, typically 2 or 4 for GRU
    int hidden1 = 64;    // FCNN widths
    int hidden2 = 32;
    int gru_hidden = 64;

    void validate() const {
        extractor.validate();
        if (variant == RegressorVariant::Fcnn && timesteps != 1) {
            throw invalid_params_error("model: FCNN uses timesteps == 1");
        }
        if (timesteps < 1) throw invalid_params_error("model: timesteps must be >= 1");
        if (hidden1 < 1 || hidden2 < 1 || gru_hidden < 1) {
            throw invalid_params_error("model: hidden widths must be >= 1");
        }
    }
};

/// Frozen feature extractor plus the trainable regressor, as one value.
template <typename S>
struct Model {
    ModelSpec spec;
    FeatureExtractor<S> extractor;
    std::optional<Fcnn<S>> fcnn;
    std::optional<Gru<S>> gru;

    static Model build(const ModelSpec& spec, std::uint64_t init_seed) {
        spec.validate();
        Model model{spec, FeatureExtractor<S>(spec.extractor), std::nullopt, std::nullopt};
        if (spec.variant == RegressorVariant::Fcnn) {
            model.fcnn = Fcnn<S>::init(model.extractor.feature_dim(), spec.hidden1, spec.hidden2,
                                       init_seed);
        } else {
            model.gru = Gru<S>::init(model.extractor.feature_dim(), spec.gru_hidden,
                                     spec.timesteps, init_seed);
        }
        return model;
    }

    std::vector<ParamRef<S>> params() {
        return fcnn ? fcnn->params() : gru->params();
    }

    /// Predicted yaw for one window of frames (length == spec.timesteps).
    /// FCNN consumes the single frame; the GRU unrolls over the window
    /// from a zero hidden state.
    double predict(std::span<const std::span<const float>> window) const {
        if (window.size() != static_cast<std::size_t>(spec.timesteps)) {
            throw shape_mismatch_error("model: window of " + std::to_string(window.size()) +
                                       " frames, expected " + std::to_string(spec.timesteps));
        }
        if (fcnn) {
            MatX<S> x = extractor.features(window[0]);
            return static_cast<double>(fcnn->forward(x)(0));
        }
        std::vector<MatX<S>> xs;
        xs.reserve(window.size());
        for (const auto& frame : window) xs.push_back(extractor.features(frame));
        return static_cast<double>(gru->forward(xs)(0));
    }

    double predict_frame(std::span<const float> frame) const {
        const std::span<const float> window[1] = {frame};
        return predict(std::span<const std::span<const float>>(window, 1));
    }
};

}  // namespace waylab
