// Exact Gaussian process regression from positions to accelerations: constant
// mean, ARD radial-basis kernel, exact marginal log likelihood maximized by
// Adam at a fixed number of epochs and a constant learning rate. One
// independent single-output GP per acceleration component.
#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "gravlearn/dataset.hpp"
#include "gravlearn/regressor.hpp"

namespace gravlearn {

/// Kernel/likelihood parameters for one output dimension, stored in log space
/// so positivity is structural.
struct GpHyperparams {
    Eigen::Vector3d log_lengthscales = Eigen::Vector3d::Zero();
    double log_signal_variance = 0.0;
    double log_noise_variance = std::log(1e-2);
    double constant_mean = 0.0;
};

struct GpTrainConfig {
    int epochs = 500;
    double learning_rate = 0.01;
    // Jitter escalation, as fractions of the signal variance.
    double jitter_start = 1e-6;
    double jitter_max = 1e-2;
    // Desk-scale exact-GP guard: O(N^3) per epoch.
    int max_training_points = 4000;
};

/// sigma_f^2 exp(-1/2 sum_d (x1_d - x2_d)^2 / l_d^2)
double rbf_kernel(const Vec3& x1, const Vec3& x2, const GpHyperparams& hp);

/// Exact MLL for one output component. `targets` must already have the
/// constant mean subtracted. Throws std::runtime_error if the Cholesky fails
/// after jitter escalation.
double marginal_log_likelihood(const GpHyperparams& hp, const std::vector<Vec3>& inputs,
                               const Eigen::VectorXd& targets,
                               double jitter_start = 1e-6, double jitter_max = 1e-2);

/// MLL and its analytic gradient w.r.t. [log l1, log l2, log l3, log sf2,
/// log sn2, constant_mean]. The constant mean is subtracted from raw_targets
/// internally.
std::pair<double, Eigen::Matrix<double, 6, 1>> marginal_log_likelihood_gradient(
    const GpHyperparams& hp, const std::vector<Vec3>& inputs,
    const Eigen::VectorXd& raw_targets, double jitter_start = 1e-6,
    double jitter_max = 1e-2);

class TrainedGp final : public Regressor {
public:
    std::vector<Vec3> predict(const std::vector<Vec3>& positions) const override;

    /// Posterior mean and marginal variance (clamped at zero) per output.
    std::pair<std::vector<Vec3>, std::vector<Vec3>> predict_with_variance(
        const std::vector<Vec3>& positions) const;

    std::string kind() const override { return "gp"; }
    bool instability_flag() const override { return instability_flag_; }

    const std::array<GpHyperparams, 3>& hyperparams() const { return hyperparams_; }
    double final_loss() const { return final_loss_; } // summed MLL
    int epochs_run() const { return epochs_run_; }
    const std::vector<Vec3>& training_inputs() const { return inputs_; }

private:
    friend TrainedGp train_gp(const SampledDataset&, const GpTrainConfig&);

    std::array<GpHyperparams, 3> hyperparams_;
    std::vector<Vec3> inputs_;
    std::array<Eigen::VectorXd, 3> targets_;
    // Cached per-output factorization of K + sigma_n^2 I + jitter.
    std::array<Eigen::MatrixXd, 3> chol_lower_;
    std::array<Eigen::VectorXd, 3> alpha_;
    std::array<double, 3> jitter_used_{0.0, 0.0, 0.0};
    bool instability_flag_ = false;
    double final_loss_ = 0.0;
    int epochs_run_ = 0;
};

/// Trains three independent GPs by Adam ascent on the exact MLL for exactly
/// cfg.epochs full-batch steps. A non-finite loss or a persistent Cholesky
/// failure sets the instability flag and freezes the last finite state.
/// Throws std::invalid_argument for N < 2 or N > cfg.max_training_points.
TrainedGp train_gp(const SampledDataset& ds, const GpTrainConfig& cfg);

} // namespace gravlearn
