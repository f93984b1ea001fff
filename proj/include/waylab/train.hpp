#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "waylab/adam.hpp"
#include "waylab/dataset.hpp"
#include "waylab/model.hpp"

namespace waylab {

struct TrainConfig {
    double learning_rate = 1e-4;
    int batch_size = 64;
    int epochs = 100;
    int lr_halving_period = 25;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t shuffle_seed = 2;
    std::uint64_t init_seed = 1;

    void validate() const {
        if (learning_rate <= 0.0) throw invalid_params_error("train: learning_rate must be positive");
        if (batch_size < 1) throw invalid_params_error("train: batch_size must be >= 1");
        if (epochs < 1) throw invalid_params_error("train: epochs must be >= 1");
        if (lr_halving_period < 1) throw invalid_params_error("train: lr_halving_period must be >= 1");
    }

    AdamConfig adam() const { return {adam_beta1, adam_beta2, adam_epsilon}; }
};

/// Schedule contract: lr(e) = learning_rate * 0.5^floor(e / period).
inline double learning_rate_at(const TrainConfig& config, int epoch) {
    double lr = config.learning_rate;
    for (int k = 0; k < epoch / config.lr_halving_period; ++k) lr *= 0.5;
    return lr;
}

struct LossReport {
    std::size_t n = 0;
    double mse = 0.0;
};

/// Mean of (y_i - p_i)^2 over the batch.
inline LossReport mse_loss(std::span<const double> predictions, std::span<const double> labels) {
    if (predictions.size() != labels.size()) {
        throw shape_mismatch_error("mse_loss: prediction/label lengths differ");
    }
    if (predictions.empty()) throw empty_batch_error("mse_loss: empty batch");
    double sum = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double e = labels[i] - predictions[i];
        sum += e * e;
    }
    return {predictions.size(), sum / static_cast<double>(predictions.size())};
}

template <typename S>
struct TrainResult {
    Model<S> model;
    std::vector<double> epoch_loss;      // mean MSE per epoch, in epoch order
    std::uint64_t extractor_hash_before = 0;
    std::uint64_t extractor_hash_after = 0;
};

namespace detail {

/// Seeded Fisher-Yates; one independent stream per epoch.
inline std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed, int epoch) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    CounterRng rng(seed, {0x73687566ULL, static_cast<std::uint64_t>(epoch)});  // "shuf"
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

}  // namespace detail

/// Minibatch Adam on the MSE yaw loss. The extractor runs once over the
/// dataset up front (it is frozen, so features never change); each epoch
/// reshuffles with its own seeded stream and sweeps every window once.
/// Deterministic given (dataset, spec, config).
template <typename S>
TrainResult<S> train(const Dataset& dataset, const ModelSpec& spec, const TrainConfig& config) {
    config.validate();
    spec.validate();
    if (dataset.samples.empty()) throw empty_batch_error("train: dataset has no samples");
    if (dataset.frame_size() !=
        static_cast<std::size_t>(spec.extractor.input_width) * spec.extractor.input_height) {
        throw shape_mismatch_error("train: dataset frame shape does not match the extractor");
    }

    Model<S> model = Model<S>::build(spec, config.init_seed);
    TrainResult<S> result{std::move(model), {}, 0, 0};
    result.extractor_hash_before = result.model.extractor.weight_hash();

    // Frozen extractor: featurize every stored frame once.
    const int dim = result.model.extractor.feature_dim();
    MatX<S> features(dim, static_cast<Eigen::Index>(dataset.samples.size()));
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        features.col(static_cast<Eigen::Index>(i)) = result.model.extractor.features(dataset.frame(i));
    }

    const auto windows = sequence_windows(dataset, spec.timesteps);
    if (windows.empty()) throw empty_batch_error("train: no windows at this timestep count");

    AdamState<S> adam = result.model.fcnn ? AdamState<S>::for_net(*result.model.fcnn)
                                          : AdamState<S>::for_net(*result.model.gru);
    const int timesteps = spec.timesteps;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const double lr = learning_rate_at(config, epoch);
        const auto order = detail::shuffled_indices(windows.size(), config.shuffle_seed, epoch);
        double epoch_sq_sum = 0.0;

        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t count = std::min(order.size() - start,
                                               static_cast<std::size_t>(config.batch_size));
            std::vector<MatX<S>> xs(static_cast<std::size_t>(timesteps),
                                    MatX<S>(dim, static_cast<Eigen::Index>(count)));
            RowX<S> labels(static_cast<Eigen::Index>(count));
            for (std::size_t k = 0; k < count; ++k) {
                const auto& window = windows[order[start + k]];
                for (int t = 0; t < timesteps; ++t) {
                    xs[static_cast<std::size_t>(t)].col(static_cast<Eigen::Index>(k)) =
                        features.col(static_cast<Eigen::Index>(window.frame_refs[static_cast<std::size_t>(t)]));
                }
                labels(static_cast<Eigen::Index>(k)) = static_cast<S>(window.label);
            }

            RowX<S> preds;
            typename Fcnn<S>::Cache fcache;
            typename Gru<S>::Cache gcache;
            if (result.model.fcnn) {
                preds = result.model.fcnn->forward(xs[0], &fcache);
            } else {
                preds = result.model.gru->forward(xs, &gcache);
            }
            const RowX<S> err = preds - labels;
            epoch_sq_sum += static_cast<double>(err.cwiseProduct(err).sum());

            // d(mse)/d(pred) for batch-mean MSE.
            const RowX<S> dpred = (S(2) / static_cast<S>(count)) * err;
            if (result.model.fcnn) {
                Fcnn<S> grads = result.model.fcnn->zeros_like();
                result.model.fcnn->backward(fcache, dpred, grads);
                adam_step(result.model.fcnn->params(), grads.params(), adam, lr, config.adam());
            } else {
                Gru<S> grads = result.model.gru->zeros_like();
                result.model.gru->backward(gcache, dpred, grads);
                adam_step(result.model.gru->params(), grads.params(), adam, lr, config.adam());
            }
        }
        result.epoch_loss.push_back(epoch_sq_sum / static_cast<double>(windows.size()));
    }

    result.extractor_hash_after = result.model.extractor.weight_hash();
    return result;
}

}  // namespace waylab
