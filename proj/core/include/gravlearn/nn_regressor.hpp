// Fully connected network (6 hidden layers x 80 nodes, ReLU) with spectral
// normalization on every affine layer, trained by Adam on mean squared error
// at a fixed number of epochs and a constant learning rate. The per-layer
// budget gamma^(1/7) certifies a global Lipschitz bound of gamma.
#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "gravlearn/dataset.hpp"
#include "gravlearn/regressor.hpp"

namespace gravlearn {

struct NnTrainConfig {
    int epochs = 2000;
    double learning_rate = 1e-3;
    int batch_size = 0; // 0 means min(64, N)
    double lipschitz_budget = 100.0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// One power-iteration refinement of (u, v) followed by the projection
/// W * min(1, budget / sigma_hat). sigma_hat = u^T W v is a Rayleigh-quotient
/// lower bound on the true spectral norm. A zero matrix is returned unchanged
/// with sigma_hat = 0.
struct SpectralNormResult {
    Eigen::MatrixXd normalized;
    double sigma = 0.0;
    Eigen::VectorXd u, v;
};
SpectralNormResult spectral_normalize(const Eigen::MatrixXd& weight, Eigen::VectorXd u,
                                      Eigen::VectorXd v, double budget,
                                      int iterations = 1);

struct NnLayer {
    Eigen::MatrixXd weight; // raw, out x in
    Eigen::VectorXd bias;
    Eigen::VectorXd u, v; // power-iteration state
    double sigma = 0.0;   // current spectral-norm estimate
    Eigen::MatrixXd normalized;
};

class MlpNetwork final : public Regressor {
public:
    static constexpr int kHiddenLayers = 6;
    static constexpr int kHiddenWidth = 80;
    static constexpr int kAffineLayers = kHiddenLayers + 1;

    /// He-initialized network with seeded power-iteration vectors.
    MlpNetwork(double lipschitz_budget, std::uint64_t seed);

    Vec3 forward(const Vec3& position) const;
    std::vector<Vec3> predict(const std::vector<Vec3>& positions) const override;

    std::string kind() const override { return "nn"; }
    bool instability_flag() const override { return diverged_; }

    double lipschitz_budget() const { return lipschitz_budget_; }
    double per_layer_budget() const;
    const std::vector<NnLayer>& layers() const { return layers_; }

    double final_loss() const { return final_loss_; }
    int epochs_run() const { return epochs_run_; }
    long optimizer_steps() const { return optimizer_steps_; }

    /// Mean over the batch of the squared residual norm, using the current
    /// normalized weights (power-iteration state is not advanced).
    double batch_loss(const std::vector<Vec3>& x, const std::vector<Vec3>& y) const;

    struct LayerGrads {
        Eigen::MatrixXd weight;
        Eigen::VectorXd bias;
    };
    /// Backpropagated gradients of batch_loss w.r.t. raw weights and biases,
    /// with (u, v) held constant (gradients pass through sigma_hat = u^T W v).
    std::vector<LayerGrads> batch_gradients(const std::vector<Vec3>& x,
                                            const std::vector<Vec3>& y) const;

    /// Replaces one raw weight matrix and refreshes sigma_hat and the
    /// normalized weight from the frozen (u, v). Test hook for finite
    /// differencing through the normalization.
    void set_layer_weight(int layer, const Eigen::MatrixXd& w);
    void set_layer_bias(int layer, const Eigen::VectorXd& b);

private:
    friend MlpNetwork train_nn(const SampledDataset&, const NnTrainConfig&);

    void refresh_normalized(int layer);
    void power_iterate(int layer, int iterations);

    std::vector<NnLayer> layers_;
    double lipschitz_budget_;
    bool diverged_ = false;
    double final_loss_ = 0.0;
    int epochs_run_ = 0;
    long optimizer_steps_ = 0;
};

/// Adam on MSE over the observed (input, target) pairs for exactly cfg.epochs
/// epochs of ceil(N / batch_size) steps, one power-iteration update per step
/// per layer. A non-finite loss halts training and sets the diagnostic flag.
/// Throws std::invalid_argument when N < batch_size.
MlpNetwork train_nn(const SampledDataset& ds, const NnTrainConfig& cfg);

} // namespace gravlearn
