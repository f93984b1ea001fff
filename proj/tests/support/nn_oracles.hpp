#pragma once

// Independent scalar-loop references for the neural components: a
// hand-expanded GRU unroll, a scalar Adam trace, and a central
// finite-difference gradient checker. No Eigen expressions here beyond
// element reads; everything is plain loops.

#include <cmath>
#include <functional>
#include <vector>

#include "waylab/regressor.hpp"

namespace oracles {

/// Scalar unroll of the GRU gate equations for a single window.
inline double gru_by_hand(const waylab::Gru<double>& net,
                          const std::vector<std::vector<double>>& window) {
    const int hidden = net.hidden_dim();
    const int in_dim = net.in_dim();
    std::vector<double> h(static_cast<std::size_t>(hidden), 0.0);
    for (const auto& x : window) {
        std::vector<double> z(h.size()), r(h.size()), c(h.size()), h_next(h.size());
        for (int i = 0; i < hidden; ++i) {
            double az = net.bz(i, 0), ar = net.br(i, 0);
            for (int j = 0; j < in_dim; ++j) {
                az += net.wz(i, j) * x[static_cast<std::size_t>(j)];
                ar += net.wr(i, j) * x[static_cast<std::size_t>(j)];
            }
            for (int j = 0; j < hidden; ++j) {
                az += net.uz(i, j) * h[static_cast<std::size_t>(j)];
                ar += net.ur(i, j) * h[static_cast<std::size_t>(j)];
            }
            z[static_cast<std::size_t>(i)] = 1.0 / (1.0 + std::exp(-az));
            r[static_cast<std::size_t>(i)] = 1.0 / (1.0 + std::exp(-ar));
        }
        for (int i = 0; i < hidden; ++i) {
            double ac = net.bc(i, 0);
            for (int j = 0; j < in_dim; ++j) {
                ac += net.wc(i, j) * x[static_cast<std::size_t>(j)];
            }
            for (int j = 0; j < hidden; ++j) {
                ac += net.uc(i, j) * r[static_cast<std::size_t>(j)] * h[static_cast<std::size_t>(j)];
            }
            c[static_cast<std::size_t>(i)] = std::tanh(ac);
            h_next[static_cast<std::size_t>(i)] =
                z[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(i)] +
                (1.0 - z[static_cast<std::size_t>(i)]) * c[static_cast<std::size_t>(i)];
        }
        h = h_next;
    }
    double out = net.b_out(0, 0);
    for (int i = 0; i < hidden; ++i) out += net.w_out(0, i) * h[static_cast<std::size_t>(i)];
    return out;
}

/// One Adam trajectory on a scalar parameter, written out longhand.
struct ScalarAdamTrace {
    std::vector<double> thetas;
};

inline ScalarAdamTrace scalar_adam(double theta0, const std::function<double(double)>& grad_of,
                                   int steps, double lr, double beta1 = 0.9,
                                   double beta2 = 0.999, double eps = 1e-8) {
    ScalarAdamTrace trace;
    double theta = theta0, m = 0.0, v = 0.0;
    for (int t = 1; t <= steps; ++t) {
        const double g = grad_of(theta);
        m = beta1 * m + (1.0 - beta1) * g;
        v = beta2 * v + (1.0 - beta2) * g * g;
        const double m_hat = m / (1.0 - std::pow(beta1, t));
        const double v_hat = v / (1.0 - std::pow(beta2, t));
        theta -= lr * m_hat / (std::sqrt(v_hat) + eps);
        trace.thetas.push_back(theta);
    }
    return trace;
}

/// Central finite differences over every element of every parameter block,
/// compared against the analytic gradient with the usual relative-error
/// form |a - n| / max(|a| + |n|, eps).
template <typename Net>
double max_gradient_rel_error(Net& net, Net& analytic,
                              const std::function<double()>& loss_of, double step = 1e-4) {
    double worst = 0.0;
    auto params = net.params();
    auto grads = analytic.params();
    for (std::size_t b = 0; b < params.size(); ++b) {
        auto& p = *params[b].matrix;
        const auto& g = *grads[b].matrix;
        for (Eigen::Index r = 0; r < p.rows(); ++r) {
            for (Eigen::Index c = 0; c < p.cols(); ++c) {
                const double original = p(r, c);
                p(r, c) = original + step;
                const double up = loss_of();
                p(r, c) = original - step;
                const double down = loss_of();
                p(r, c) = original;
                const double numeric = (up - down) / (2.0 * step);
                const double denom = std::max(std::abs(numeric) + std::abs(g(r, c)), 1e-8);
                worst = std::max(worst, std::abs(numeric - g(r, c)) / denom);
            }
        }
    }
    return worst;
}

}  // namespace oracles
