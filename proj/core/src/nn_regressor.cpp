#include "gravlearn/nn_regressor.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gravlearn/adam.hpp"
#include "gravlearn/rng.hpp"

namespace gravlearn {

void NnTrainConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("nn config: epochs must be >= 1");
    if (!(learning_rate > 0.0))
        throw std::invalid_argument("nn config: learning_rate must be > 0");
    if (batch_size < 0) throw std::invalid_argument("nn config: batch_size must be >= 1");
    if (!(lipschitz_budget > 0.0))
        throw std::invalid_argument("nn config: lipschitz_budget must be > 0");
}

SpectralNormResult spectral_normalize(const Eigen::MatrixXd& weight, Eigen::VectorXd u,
                                      Eigen::VectorXd v, double budget, int iterations) {
    SpectralNormResult out;
    out.u = std::move(u);
    out.v = std::move(v);
    for (int it = 0; it < iterations; ++it) {
        Eigen::VectorXd wtu = weight.transpose() * out.u;
        const double nv = wtu.norm();
        if (nv == 0.0) {
            out.normalized = weight;
            out.sigma = 0.0;
            return out;
        }
        out.v = wtu / nv;
        Eigen::VectorXd wv = weight * out.v;
        const double nu = wv.norm();
        if (nu == 0.0) {
            out.normalized = weight;
            out.sigma = 0.0;
            return out;
        }
        out.u = wv / nu;
    }
    out.sigma = out.u.dot(weight * out.v);
    const double scale = (out.sigma > budget) ? budget / out.sigma : 1.0;
    out.normalized = scale * weight;
    return out;
}

double MlpNetwork::per_layer_budget() const {
    return std::pow(lipschitz_budget_, 1.0 / kAffineLayers);
}

MlpNetwork::MlpNetwork(double lipschitz_budget, std::uint64_t seed)
    : lipschitz_budget_(lipschitz_budget) {
    Rng rng(derive_seed(seed, 0, 0, "nn_init"));
    const auto dims = [] {
        std::vector<std::pair<int, int>> d; // (out, in)
        d.emplace_back(kHiddenWidth, 3);
        for (int l = 1; l < kHiddenLayers; ++l) d.emplace_back(kHiddenWidth, kHiddenWidth);
        d.emplace_back(3, kHiddenWidth);
        return d;
    }();

    layers_.resize(dims.size());
    for (std::size_t l = 0; l < dims.size(); ++l) {
        auto& layer = layers_[l];
        const auto [rows, cols] = dims[l];
        const double he_std = std::sqrt(2.0 / cols);
        layer.weight.resize(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) layer.weight(i, j) = he_std * rng.normal();
        layer.bias = Eigen::VectorXd::Zero(rows);
        layer.u.resize(rows);
        layer.v.resize(cols);
        for (Eigen::Index i = 0; i < rows; ++i) layer.u[i] = rng.normal();
        for (Eigen::Index j = 0; j < cols; ++j) layer.v[j] = rng.normal();
        layer.u.normalize();
        layer.v.normalize();
        power_iterate(static_cast<int>(l), 10);
    }
}

void MlpNetwork::power_iterate(int layer, int iterations) {
    auto& l = layers_[layer];
    SpectralNormResult r = spectral_normalize(l.weight, l.u, l.v, per_layer_budget(), iterations);
    l.u = std::move(r.u);
    l.v = std::move(r.v);
    l.sigma = r.sigma;
    l.normalized = std::move(r.normalized);
}

void MlpNetwork::refresh_normalized(int layer) {
    auto& l = layers_[layer];
    l.sigma = l.u.dot(l.weight * l.v);
    const double s = per_layer_budget();
    const double scale = (l.sigma > s) ? s / l.sigma : 1.0;
    l.normalized = scale * l.weight;
}

void MlpNetwork::set_layer_weight(int layer, const Eigen::MatrixXd& w) {
    layers_.at(layer).weight = w;
    refresh_normalized(layer);
}

void MlpNetwork::set_layer_bias(int layer, const Eigen::VectorXd& b) {
    layers_.at(layer).bias = b;
}

Vec3 MlpNetwork::forward(const Vec3& position) const {
    Eigen::VectorXd h = position;
    for (int l = 0; l < kAffineLayers; ++l) {
        h = (layers_[l].normalized * h + layers_[l].bias).eval();
        if (l < kHiddenLayers) h = h.cwiseMax(0.0);
    }
    return Vec3(h[0], h[1], h[2]);
}

std::vector<Vec3> MlpNetwork::predict(const std::vector<Vec3>& positions) const {
    std::vector<Vec3> out;
    out.reserve(positions.size());
    for (const auto& x : positions) out.push_back(forward(x));
    return out;
}

namespace {

struct ForwardCache {
    // activations[l] feeds affine layer l; activations.back() is the output.
    std::vector<Eigen::MatrixXd> activations;
};

Eigen::MatrixXd to_matrix(const std::vector<Vec3>& xs, const std::vector<std::size_t>* idx,
                          std::size_t begin, std::size_t end) {
    const auto n = static_cast<Eigen::Index>(end - begin);
    Eigen::MatrixXd m(3, n);
    for (Eigen::Index c = 0; c < n; ++c)
        m.col(c) = idx ? xs[(*idx)[begin + c]] : xs[begin + c];
    return m;
}

ForwardCache forward_batch(const std::vector<NnLayer>& layers, Eigen::MatrixXd input) {
    ForwardCache cache;
    cache.activations.reserve(layers.size() + 1);
    cache.activations.push_back(std::move(input));
    for (std::size_t l = 0; l < layers.size(); ++l) {
        Eigen::MatrixXd z =
            (layers[l].normalized * cache.activations.back()).colwise() + layers[l].bias;
        if (l + 1 < layers.size()) z = z.cwiseMax(0.0);
        cache.activations.push_back(std::move(z));
    }
    return cache;
}

// Backprop with (u, v) frozen; gradients pass through sigma_hat = u^T W v.
std::vector<MlpNetwork::LayerGrads> backward_batch(const std::vector<NnLayer>& layers,
                                                   double per_layer_budget,
                                                   const ForwardCache& cache,
                                                   const Eigen::MatrixXd& targets) {
    const auto batch = static_cast<double>(targets.cols());
    const int n_layers = static_cast<int>(layers.size());
    std::vector<MlpNetwork::LayerGrads> grads(n_layers);

    Eigen::MatrixXd delta = 2.0 / batch * (cache.activations.back() - targets);
    for (int l = n_layers - 1; l >= 0; --l) {
        const NnLayer& layer = layers[l];
        Eigen::MatrixXd grad_normalized = delta * cache.activations[l].transpose();
        grads[l].bias = delta.rowwise().sum();

        if (layer.sigma > per_layer_budget) {
            // Wn = (s / sigma) W with sigma = u^T W v:
            // dL/dW = (s/sigma) [G - (<G, Wn> / s) u v^T]
            const double scale = per_layer_budget / layer.sigma;
            const double inner = grad_normalized.cwiseProduct(layer.normalized).sum();
            grads[l].weight =
                scale * (grad_normalized -
                         (inner / per_layer_budget) * (layer.u * layer.v.transpose()));
        } else {
            grads[l].weight = std::move(grad_normalized);
        }

        if (l > 0) {
            delta = layer.normalized.transpose() * delta;
            // ReLU mask from the stored (post-activation) values.
            delta = delta.cwiseProduct(
                (cache.activations[l].array() > 0.0).cast<double>().matrix());
        }
    }
    return grads;
}

} // namespace

double MlpNetwork::batch_loss(const std::vector<Vec3>& x, const std::vector<Vec3>& y) const {
    const ForwardCache cache = forward_batch(layers_, to_matrix(x, nullptr, 0, x.size()));
    const Eigen::MatrixXd targets = to_matrix(y, nullptr, 0, y.size());
    return (cache.activations.back() - targets).squaredNorm() / static_cast<double>(x.size());
}

std::vector<MlpNetwork::LayerGrads> MlpNetwork::batch_gradients(
    const std::vector<Vec3>& x, const std::vector<Vec3>& y) const {
    const ForwardCache cache = forward_batch(layers_, to_matrix(x, nullptr, 0, x.size()));
    const Eigen::MatrixXd targets = to_matrix(y, nullptr, 0, y.size());
    return backward_batch(layers_, per_layer_budget(), cache, targets);
}

MlpNetwork train_nn(const SampledDataset& ds, const NnTrainConfig& cfg) {
    cfg.validate();
    const std::size_t n = ds.size();
    if (n == 0) throw std::invalid_argument("train_nn: empty dataset");
    const std::size_t batch_size =
        cfg.batch_size == 0 ? std::min<std::size_t>(64, n)
                            : static_cast<std::size_t>(cfg.batch_size);
    if (batch_size > n)
        throw std::invalid_argument("train_nn: batch_size exceeds dataset size");

    MlpNetwork net(cfg.lipschitz_budget, cfg.seed);
    const double s = net.per_layer_budget();

    std::vector<AdamOptimizer<Eigen::MatrixXd>> adam_w;
    std::vector<AdamOptimizer<Eigen::VectorXd>> adam_b;
    for (const auto& layer : net.layers_) {
        adam_w.emplace_back(cfg.learning_rate, layer.weight.rows(), layer.weight.cols());
        adam_b.emplace_back(cfg.learning_rate, layer.bias.size());
    }

    Rng shuffle_rng(derive_seed(cfg.seed, 0, 0, "nn_batch"));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    const Eigen::MatrixXd all_targets = to_matrix(ds.targets, nullptr, 0, n);
    double epoch_loss = 0.0;

    for (int epoch = 0; epoch < cfg.epochs && !net.diverged_; ++epoch) {
        for (std::size_t i = n - 1; i > 0; --i) {
            auto j = static_cast<std::size_t>(shuffle_rng.uniform() * static_cast<double>(i + 1));
            if (j > i) j = i;
            std::swap(order[i], order[j]);
        }
        epoch_loss = 0.0;
        for (std::size_t begin = 0; begin < n; begin += batch_size) {
            const std::size_t end = std::min(begin + batch_size, n);
            for (int l = 0; l < MlpNetwork::kAffineLayers; ++l) net.power_iterate(l, 1);

            const ForwardCache cache =
                forward_batch(net.layers_, to_matrix(ds.inputs, &order, begin, end));
            Eigen::MatrixXd targets(3, end - begin);
            for (std::size_t c = begin; c < end; ++c)
                targets.col(c - begin) = all_targets.col(order[c]);

            const double loss = (cache.activations.back() - targets).squaredNorm() /
                                static_cast<double>(end - begin);
            if (!std::isfinite(loss)) {
                net.diverged_ = true;
                break;
            }
            epoch_loss += loss * static_cast<double>(end - begin);

            auto grads = backward_batch(net.layers_, s, cache, targets);
            for (int l = 0; l < MlpNetwork::kAffineLayers; ++l) {
                adam_w[l].step(net.layers_[l].weight, grads[l].weight);
                adam_b[l].step(net.layers_[l].bias, grads[l].bias);
                net.refresh_normalized(l);
            }
            ++net.optimizer_steps_;
        }
        if (!net.diverged_) {
            net.final_loss_ = epoch_loss / static_cast<double>(n);
            net.epochs_run_ = epoch + 1;
        }
    }

    // Tighten the spectral estimates before freezing the network.
    for (int l = 0; l < MlpNetwork::kAffineLayers; ++l) net.power_iterate(l, 30);
    return net;
}

} // namespace gravlearn
