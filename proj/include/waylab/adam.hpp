#pragma once

#include <cmath>
#include <vector>

#include "waylab/extractor.hpp"
#include "waylab/regressor.hpp"

namespace waylab {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

template <typename S>
struct AdamState {
    std::vector<MatX<S>> m;
    std::vector<MatX<S>> v;
    long t = 0;

    template <typename Net>
    static AdamState for_net(Net& net) {
        AdamState state;
        for (const auto& p : net.params()) {
            state.m.push_back(MatX<S>::Zero(p.matrix->rows(), p.matrix->cols()));
            state.v.push_back(MatX<S>::Zero(p.matrix->rows(), p.matrix->cols()));
        }
        return state;
    }
};

/// One bias-corrected Adam update:
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2,
///   p <- p - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
template <typename S>
void adam_step(std::vector<ParamRef<S>> params, const std::vector<ParamRef<S>>& grads,
               AdamState<S>& state, double lr, const AdamConfig& config = {}) {
    if (params.size() != grads.size() || params.size() != state.m.size()) {
        throw shape_mismatch_error("adam_step: parameter/gradient/state block counts differ");
    }
    state.t += 1;
    const S bc1 = static_cast<S>(1.0 - std::pow(config.beta1, static_cast<double>(state.t)));
    const S bc2 = static_cast<S>(1.0 - std::pow(config.beta2, static_cast<double>(state.t)));
    const S b1 = static_cast<S>(config.beta1);
    const S b2 = static_cast<S>(config.beta2);
    const S eps = static_cast<S>(config.epsilon);
    for (std::size_t i = 0; i < params.size(); ++i) {
        MatX<S>& p = *params[i].matrix;
        const MatX<S>& g = *grads[i].matrix;
        if (p.rows() != g.rows() || p.cols() != g.cols()) {
            throw shape_mismatch_error("adam_step: block '" + params[i].name + "' shape mismatch");
        }
        state.m[i] = b1 * state.m[i] + (S(1) - b1) * g;
        state.v[i] = b2 * state.v[i] + (S(1) - b2) * g.cwiseProduct(g);
        const MatX<S> m_hat = state.m[i] / bc1;
        const MatX<S> v_hat = state.v[i] / bc2;
        p.array() -= static_cast<S>(lr) * m_hat.array() / (v_hat.array().sqrt() + eps);
    }
}

}  // namespace waylab
