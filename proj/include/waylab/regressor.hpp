#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "waylab/extractor.hpp"

namespace waylab {

namespace detail {

/// Fan-in-scaled uniform init, filled row-major in declaration order from
/// one stream so checkpoints are reproducible from (seed, shapes) alone.
template <typename S>
void init_matrix(MatX<S>& m, Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in,
                 CounterRng& rng) {
    m.resize(rows, cols);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = static_cast<S>(rng.uniform(-bound, bound));
        }
    }
}

template <typename S>
MatX<S> zeros(Eigen::Index rows, Eigen::Index cols) {
    return MatX<S>::Zero(rows, cols);
}

template <typename S>
MatX<S> sigmoid(const MatX<S>& a) {
    return ((-a.array()).exp() + S(1)).inverse().matrix();
}

}  // namespace detail

/// Named view of one parameter matrix; the same order is used by the
/// optimizer, the gradient structures, and the checkpoint format.
template <typename S>
struct ParamRef {
    std::string name;
    MatX<S>* matrix;
};

/// Two rectified-linear hidden layers and a scalar linear head. Batched
/// interface: inputs are feature columns, predictions a row vector.
template <typename S>
struct Fcnn {
    MatX<S> w1, b1;  // h1 x d, h1 x 1
    MatX<S> w2, b2;  // h2 x h1, h2 x 1
    MatX<S> w3, b3;  // 1 x h2, 1 x 1

    static Fcnn init(int in_dim, int hidden1, int hidden2, std::uint64_t seed) {
        Fcnn net;
        CounterRng rng(seed, {0x66636e6eULL});  // "fcnn"
        detail::init_matrix(net.w1, hidden1, in_dim, in_dim, rng);
        net.b1 = detail::zeros<S>(hidden1, 1);
        detail::init_matrix(net.w2, hidden2, hidden1, hidden1, rng);
        net.b2 = detail::zeros<S>(hidden2, 1);
        detail::init_matrix(net.w3, 1, hidden2, hidden2, rng);
        net.b3 = detail::zeros<S>(1, 1);
        return net;
    }

    Fcnn zeros_like() const {
        Fcnn g;
        g.w1 = detail::zeros<S>(w1.rows(), w1.cols());
        g.b1 = detail::zeros<S>(b1.rows(), 1);
        g.w2 = detail::zeros<S>(w2.rows(), w2.cols());
        g.b2 = detail::zeros<S>(b2.rows(), 1);
        g.w3 = detail::zeros<S>(w3.rows(), w3.cols());
        g.b3 = detail::zeros<S>(1, 1);
        return g;
    }

    int in_dim() const { return static_cast<int>(w1.cols()); }

    struct Cache {
        MatX<S> x;   // d x n
        MatX<S> h1;  // post-activation
        MatX<S> h2;
    };

    RowX<S> forward(const MatX<S>& x, Cache* cache = nullptr) const {
        const MatX<S> h1 = ((w1 * x).colwise() + VecX<S>(b1.col(0))).cwiseMax(S(0));
        const MatX<S> h2 = ((w2 * h1).colwise() + VecX<S>(b2.col(0))).cwiseMax(S(0));
        RowX<S> pred = (w3 * h2).array() + b3(0, 0);
        if (cache) {
            cache->x = x;
            cache->h1 = h1;
            cache->h2 = h2;
        }
        return pred;
    }

    /// Accumulate exact reverse-mode gradients into `grads` given
    /// d(loss)/d(prediction) for each batch column.
    void backward(const Cache& cache, const RowX<S>& dpred, Fcnn& grads) const {
        grads.w3 += dpred * cache.h2.transpose();
        grads.b3(0, 0) += dpred.sum();
        MatX<S> dh2 = w3.transpose() * dpred;
        dh2 = dh2.cwiseProduct((cache.h2.array() > S(0)).template cast<S>().matrix());
        grads.w2 += dh2 * cache.h1.transpose();
        grads.b2.col(0) += dh2.rowwise().sum();
        MatX<S> dh1 = w2.transpose() * dh2;
        dh1 = dh1.cwiseProduct((cache.h1.array() > S(0)).template cast<S>().matrix());
        grads.w1 += dh1 * cache.x.transpose();
        grads.b1.col(0) += dh1.rowwise().sum();
    }

    std::vector<ParamRef<S>> params() {
        return {{"w1", &w1}, {"b1", &b1}, {"w2", &w2},
                {"b2", &b2}, {"w3", &w3}, {"b3", &b3}};
    }
};

/// Single gated-recurrent layer unrolled over a fixed window, scalar
/// linear head on the final hidden state. Gates follow
///   z = sig(wz x + uz h + bz)      update
///   r = sig(wr x + ur h + br)      reset
///   c = tanh(wc x + uc (r.h) + bc) candidate
///   h' = z.h + (1 - z).c
/// with h reset to zero at every window boundary.
template <typename S>
struct Gru {
    int timesteps = 2;
    MatX<S> wz, uz, bz;
    MatX<S> wr, ur, br;
    MatX<S> wc, uc, bc;
    MatX<S> w_out, b_out;  // 1 x h, 1 x 1

    static Gru init(int in_dim, int hidden, int timesteps, std::uint64_t seed) {
        Gru net;
        net.timesteps = timesteps;
        CounterRng rng(seed, {0x677275ULL});  // "gru"
        detail::init_matrix(net.wz, hidden, in_dim, in_dim, rng);
        detail::init_matrix(net.uz, hidden, hidden, hidden, rng);
        net.bz = detail::zeros<S>(hidden, 1);
        detail::init_matrix(net.wr, hidden, in_dim, in_dim, rng);
        detail::init_matrix(net.ur, hidden, hidden, hidden, rng);
        net.br = detail::zeros<S>(hidden, 1);
        detail::init_matrix(net.wc, hidden, in_dim, in_dim, rng);
        detail::init_matrix(net.uc, hidden, hidden, hidden, rng);
        net.bc = detail::zeros<S>(hidden, 1);
        detail::init_matrix(net.w_out, 1, hidden, hidden, rng);
        net.b_out = detail::zeros<S>(1, 1);
        return net;
    }

    Gru zeros_like() const {
        Gru g;
        g.timesteps = timesteps;
        auto z = [](const MatX<S>& m) { return detail::zeros<S>(m.rows(), m.cols()); };
        g.wz = z(wz); g.uz = z(uz); g.bz = z(bz);
        g.wr = z(wr); g.ur = z(ur); g.br = z(br);
        g.wc = z(wc); g.uc = z(uc); g.bc = z(bc);
        g.w_out = z(w_out); g.b_out = z(b_out);
        return g;
    }

    int in_dim() const { return static_cast<int>(wz.cols()); }
    int hidden_dim() const { return static_cast<int>(wz.rows()); }

    struct Cache {
        std::vector<MatX<S>> x, z, r, c, h;  // one entry per timestep, n columns each
    };

    /// xs[t] holds the feature columns for timestep t (all length == timesteps).
    RowX<S> forward(const std::vector<MatX<S>>& xs, Cache* cache = nullptr) const {
        if (static_cast<int>(xs.size()) != timesteps) {
            throw shape_mismatch_error("gru: expected " + std::to_string(timesteps) +
                                       " timesteps, got " + std::to_string(xs.size()));
        }
        const Eigen::Index n = xs[0].cols();
        const Eigen::Index hd = hidden_dim();
        MatX<S> h = detail::zeros<S>(hd, n);
        if (cache) *cache = Cache{};
        for (int t = 0; t < timesteps; ++t) {
            const MatX<S>& x = xs[static_cast<std::size_t>(t)];
            const MatX<S> z = detail::sigmoid<S>(((wz * x + uz * h).colwise() + VecX<S>(bz.col(0))));
            const MatX<S> r = detail::sigmoid<S>(((wr * x + ur * h).colwise() + VecX<S>(br.col(0))));
            const MatX<S> c =
                ((wc * x + uc * r.cwiseProduct(h)).colwise() + VecX<S>(bc.col(0)))
                    .array().tanh().matrix();
            const MatX<S> h_next = z.cwiseProduct(h) + (MatX<S>::Ones(hd, n) - z).cwiseProduct(c);
            if (cache) {
                cache->x.push_back(x);
                cache->z.push_back(z);
                cache->r.push_back(r);
                cache->c.push_back(c);
                cache->h.push_back(h_next);
            }
            h = h_next;
        }
        return (w_out * h).array() + b_out(0, 0);
    }

    /// Backpropagation through the unrolled window.
    void backward(const Cache& cache, const RowX<S>& dpred, Gru& grads) const {
        const Eigen::Index n = dpred.cols();
        const Eigen::Index hd = hidden_dim();
        grads.w_out += dpred * cache.h.back().transpose();
        grads.b_out(0, 0) += dpred.sum();
        MatX<S> dh = w_out.transpose() * dpred;
        for (int t = timesteps - 1; t >= 0; --t) {
            const auto& x = cache.x[static_cast<std::size_t>(t)];
            const auto& z = cache.z[static_cast<std::size_t>(t)];
            const auto& r = cache.r[static_cast<std::size_t>(t)];
            const auto& c = cache.c[static_cast<std::size_t>(t)];
            const MatX<S> h_prev =
                t == 0 ? detail::zeros<S>(hd, n) : cache.h[static_cast<std::size_t>(t) - 1];

            const MatX<S> dz = dh.cwiseProduct(h_prev - c);
            const MatX<S> dc = dh.cwiseProduct(MatX<S>::Ones(hd, n) - z);
            const MatX<S> da_c =
                dc.cwiseProduct((MatX<S>::Ones(hd, n) - c.cwiseProduct(c)));
            grads.wc += da_c * x.transpose();
            grads.uc += da_c * r.cwiseProduct(h_prev).transpose();
            grads.bc.col(0) += da_c.rowwise().sum();
            const MatX<S> drh = uc.transpose() * da_c;
            const MatX<S> dr = drh.cwiseProduct(h_prev);

            const MatX<S> da_z =
                dz.cwiseProduct(z.cwiseProduct(MatX<S>::Ones(hd, n) - z));
            grads.wz += da_z * x.transpose();
            grads.uz += da_z * h_prev.transpose();
            grads.bz.col(0) += da_z.rowwise().sum();

            const MatX<S> da_r =
                dr.cwiseProduct(r.cwiseProduct(MatX<S>::Ones(hd, n) - r));
            grads.wr += da_r * x.transpose();
            grads.ur += da_r * h_prev.transpose();
            grads.br.col(0) += da_r.rowwise().sum();

            dh = dh.cwiseProduct(z) + uz.transpose() * da_z + ur.transpose() * da_r +
                 drh.cwiseProduct(r);
        }
    }

    std::vector<ParamRef<S>> params() {
        return {{"wz", &wz}, {"uz", &uz}, {"bz", &bz}, {"wr", &wr},
                {"ur", &ur}, {"br", &br}, {"wc", &wc}, {"uc", &uc},
                {"bc", &bc}, {"w_out", &w_out}, {"b_out", &b_out}};
    }
};

}  // namespace waylab
