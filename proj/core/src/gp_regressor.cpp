#include "gravlearn/gp_regressor.hpp"

#include <cmath>
#include <stdexcept>

#include "gravlearn/adam.hpp"

namespace gravlearn {

namespace {

constexpr double kLogTwoPi = 1.8378770664093453; // log(2 pi)
constexpr double kNoiseFloor = 1e-10;            // lower bound on sigma_n^2

// Squared per-dimension differences, shared by every output GP.
struct SquaredDiffs {
    std::array<Eigen::MatrixXd, 3> d;

    explicit SquaredDiffs(const std::vector<Vec3>& x) {
        const Eigen::Index n = static_cast<Eigen::Index>(x.size());
        for (int k = 0; k < 3; ++k) d[k].resize(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j <= i; ++j)
                for (int k = 0; k < 3; ++k) {
                    const double diff = x[i][k] - x[j][k];
                    d[k](i, j) = d[k](j, i) = diff * diff;
                }
    }
};

Eigen::MatrixXd kernel_matrix(const SquaredDiffs& sq, const GpHyperparams& hp) {
    const double sf2 = std::exp(hp.log_signal_variance);
    const Eigen::Array3d inv_l2 = (-2.0 * hp.log_lengthscales.array()).exp();
    return sf2 * (-0.5 * (inv_l2[0] * sq.d[0].array() + inv_l2[1] * sq.d[1].array() +
                          inv_l2[2] * sq.d[2].array()))
                     .exp()
                     .matrix();
}

// Cholesky of K + sigma_n^2 I with jitter escalation. Returns false if every
// attempt fails.
bool factorize(const Eigen::MatrixXd& kmat, double sn2, double sf2, double jitter_start,
               double jitter_max, Eigen::LLT<Eigen::MatrixXd>& llt, double& jitter_used) {
    Eigen::MatrixXd c = kmat;
    c.diagonal().array() += sn2;
    llt.compute(c);
    if (llt.info() == Eigen::Success) {
        jitter_used = 0.0;
        return true;
    }
    for (double j = jitter_start; j <= jitter_max * (1.0 + 1e-12); j *= 10.0) {
        c = kmat;
        c.diagonal().array() += sn2 + j * sf2;
        llt.compute(c);
        if (llt.info() == Eigen::Success) {
            jitter_used = j * sf2;
            return true;
        }
    }
    return false;
}

struct MllGradient {
    double mll = 0.0;
    Eigen::Matrix<double, 6, 1> grad = Eigen::Matrix<double, 6, 1>::Zero();
    double jitter_used = 0.0;
    bool ok = false;
};

// MLL and its gradient w.r.t. [log l1, log l2, log l3, log sf2, log sn2, mean].
MllGradient mll_with_gradient(const GpHyperparams& hp, const SquaredDiffs& sq,
                              const Eigen::VectorXd& y, const GpTrainConfig& cfg) {
    MllGradient out;
    const Eigen::Index n = y.size();
    const double sf2 = std::exp(hp.log_signal_variance);
    const double sn2 = std::exp(hp.log_noise_variance);
    const Eigen::Array3d inv_l2 = (-2.0 * hp.log_lengthscales.array()).exp();

    const Eigen::MatrixXd kmat = kernel_matrix(sq, hp);
    Eigen::LLT<Eigen::MatrixXd> llt;
    if (!factorize(kmat, sn2, sf2, cfg.jitter_start, cfg.jitter_max, llt, out.jitter_used))
        return out;

    const Eigen::VectorXd resid = y.array() - hp.constant_mean;
    const Eigen::VectorXd alpha = llt.solve(resid);
    const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    out.mll = -0.5 * resid.dot(alpha) - 0.5 * log_det - 0.5 * n * kLogTwoPi;
    if (!std::isfinite(out.mll)) return out;

    // W = alpha alpha^T - C^-1; each gradient is 1/2 tr(W dC/dtheta).
    Eigen::MatrixXd w = -llt.solve(Eigen::MatrixXd::Identity(n, n));
    const double trace_cinv = -w.trace();
    w.noalias() += alpha * alpha.transpose();

    for (int k = 0; k < 3; ++k)
        out.grad[k] = 0.5 * inv_l2[k] *
                      (w.array() * kmat.array() * sq.d[k].array()).sum();
    out.grad[3] = 0.5 * (w.array() * kmat.array()).sum();
    out.grad[4] = 0.5 * sn2 * (alpha.squaredNorm() - trace_cinv);
    out.grad[5] = alpha.sum();
    out.ok = std::isfinite(out.grad.norm());
    return out;
}

Eigen::Matrix<double, 6, 1> pack(const GpHyperparams& hp) {
    Eigen::Matrix<double, 6, 1> p;
    p << hp.log_lengthscales, hp.log_signal_variance, hp.log_noise_variance,
        hp.constant_mean;
    return p;
}

GpHyperparams unpack(const Eigen::Matrix<double, 6, 1>& p) {
    GpHyperparams hp;
    hp.log_lengthscales = p.head<3>();
    hp.log_signal_variance = p[3];
    hp.log_noise_variance = std::max(p[4], std::log(kNoiseFloor));
    hp.constant_mean = p[5];
    return hp;
}

} // namespace

double rbf_kernel(const Vec3& x1, const Vec3& x2, const GpHyperparams& hp) {
    const Eigen::Array3d inv_l2 = (-2.0 * hp.log_lengthscales.array()).exp();
    const Eigen::Array3d diff = (x1 - x2).array();
    return std::exp(hp.log_signal_variance) *
           std::exp(-0.5 * (diff.square() * inv_l2).sum());
}

double marginal_log_likelihood(const GpHyperparams& hp, const std::vector<Vec3>& inputs,
                               const Eigen::VectorXd& targets, double jitter_start,
                               double jitter_max) {
    if (inputs.empty() || targets.size() != static_cast<Eigen::Index>(inputs.size()))
        throw std::invalid_argument("marginal_log_likelihood: need N >= 1 matching targets");
    const SquaredDiffs sq(inputs);
    const Eigen::MatrixXd kmat = kernel_matrix(sq, hp);
    const double sf2 = std::exp(hp.log_signal_variance);
    const double sn2 = std::exp(hp.log_noise_variance);
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0.0;
    if (!factorize(kmat, sn2, sf2, jitter_start, jitter_max, llt, jitter))
        throw std::runtime_error("marginal_log_likelihood: Cholesky failed after jitter escalation");
    const Eigen::VectorXd alpha = llt.solve(targets);
    const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    return -0.5 * targets.dot(alpha) - 0.5 * log_det -
           0.5 * static_cast<double>(targets.size()) * kLogTwoPi;
}

std::pair<double, Eigen::Matrix<double, 6, 1>> marginal_log_likelihood_gradient(
    const GpHyperparams& hp, const std::vector<Vec3>& inputs,
    const Eigen::VectorXd& raw_targets, double jitter_start, double jitter_max) {
    if (inputs.empty() || raw_targets.size() != static_cast<Eigen::Index>(inputs.size()))
        throw std::invalid_argument("marginal_log_likelihood_gradient: bad sizes");
    GpTrainConfig cfg;
    cfg.jitter_start = jitter_start;
    cfg.jitter_max = jitter_max;
    const SquaredDiffs sq(inputs);
    const MllGradient g = mll_with_gradient(hp, sq, raw_targets, cfg);
    if (!g.ok)
        throw std::runtime_error("marginal_log_likelihood_gradient: Cholesky failed");
    return {g.mll, g.grad};
}

TrainedGp train_gp(const SampledDataset& ds, const GpTrainConfig& cfg) {
    const Eigen::Index n = static_cast<Eigen::Index>(ds.size());
    if (n < 2) throw std::invalid_argument("train_gp: need at least 2 samples");
    if (n > cfg.max_training_points)
        throw std::invalid_argument("train_gp: N exceeds the exact-GP cap");
    if (cfg.epochs < 0 || !(cfg.learning_rate > 0.0))
        throw std::invalid_argument("train_gp: bad epochs or learning rate");

    TrainedGp model;
    model.inputs_ = ds.inputs;
    for (int d = 0; d < 3; ++d) {
        model.targets_[d].resize(n);
        for (Eigen::Index i = 0; i < n; ++i) model.targets_[d][i] = ds.targets[i][d];
        model.hyperparams_[d] = GpHyperparams{};
        model.hyperparams_[d].constant_mean = model.targets_[d].mean();
    }

    const SquaredDiffs sq(ds.inputs);
    using Pvec = Eigen::Matrix<double, 6, 1>;
    std::array<AdamOptimizer<Pvec>, 3> adam{
        AdamOptimizer<Pvec>(cfg.learning_rate, 6), AdamOptimizer<Pvec>(cfg.learning_rate, 6),
        AdamOptimizer<Pvec>(cfg.learning_rate, 6)};

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::array<GpHyperparams, 3> proposed = model.hyperparams_;
        bool ok = true;
        for (int d = 0; d < 3; ++d) {
            const MllGradient g = mll_with_gradient(model.hyperparams_[d], sq,
                                                    model.targets_[d], cfg);
            if (!g.ok || !std::isfinite(g.mll)) {
                ok = false;
                break;
            }
            Pvec p = pack(model.hyperparams_[d]);
            adam[d].step(p, (-g.grad).eval()); // ascend
            proposed[d] = unpack(p);
        }
        if (!ok) {
            model.instability_flag_ = true;
            break;
        }
        model.hyperparams_ = proposed;
        model.epochs_run_ = epoch + 1;
    }

    // Cache the factorization and MLL at the final (or last finite) state.
    double final_loss = 0.0;
    for (int d = 0; d < 3; ++d) {
        const GpHyperparams& hp = model.hyperparams_[d];
        const Eigen::MatrixXd kmat = kernel_matrix(sq, hp);
        const double sf2 = std::exp(hp.log_signal_variance);
        const double sn2 = std::exp(hp.log_noise_variance);
        Eigen::LLT<Eigen::MatrixXd> llt;
        if (!factorize(kmat, sn2, sf2, cfg.jitter_start, cfg.jitter_max, llt,
                       model.jitter_used_[d])) {
            // Freeze on the prior: predictions revert to the constant mean.
            model.instability_flag_ = true;
            model.chol_lower_[d] = std::sqrt(sf2 + sn2) * Eigen::MatrixXd::Identity(n, n);
            model.alpha_[d] = Eigen::VectorXd::Zero(n);
            continue;
        }
        model.chol_lower_[d] = llt.matrixL();
        const Eigen::VectorXd resid = (model.targets_[d].array() - hp.constant_mean).matrix();
        model.alpha_[d] = llt.solve(resid);
        final_loss += -0.5 * resid.dot(model.alpha_[d]) -
                      llt.matrixLLT().diagonal().array().log().sum() -
                      0.5 * n * kLogTwoPi;
    }
    model.final_loss_ = final_loss;
    return model;
}

std::vector<Vec3> TrainedGp::predict(const std::vector<Vec3>& positions) const {
    return predict_with_variance(positions).first;
}

std::pair<std::vector<Vec3>, std::vector<Vec3>> TrainedGp::predict_with_variance(
    const std::vector<Vec3>& positions) const {
    const Eigen::Index n = static_cast<Eigen::Index>(inputs_.size());
    const Eigen::Index m = static_cast<Eigen::Index>(positions.size());
    std::vector<Vec3> means(m), variances(m);

    for (int d = 0; d < 3; ++d) {
        const GpHyperparams& hp = hyperparams_[d];
        const double sf2 = std::exp(hp.log_signal_variance);
        constexpr Eigen::Index kBlock = 512;
        for (Eigen::Index start = 0; start < m; start += kBlock) {
            const Eigen::Index len = std::min(kBlock, m - start);
            Eigen::MatrixXd kstar(n, len);
            for (Eigen::Index c = 0; c < len; ++c)
                for (Eigen::Index i = 0; i < n; ++i)
                    kstar(i, c) = rbf_kernel(inputs_[i], positions[start + c], hp);
            const Eigen::VectorXd mu = kstar.transpose() * alpha_[d];
            chol_lower_[d].triangularView<Eigen::Lower>().solveInPlace(kstar);
            for (Eigen::Index c = 0; c < len; ++c) {
                means[start + c][d] = hp.constant_mean + mu[c];
                variances[start + c][d] =
                    std::max(0.0, sf2 - kstar.col(c).squaredNorm());
            }
        }
    }
    return {std::move(means), std::move(variances)};
}

} // namespace gravlearn
