// Adam with a constant learning rate, over Eigen arrays.
#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace gravlearn {

template <typename Mat>
class AdamOptimizer {
public:
    AdamOptimizer(double learning_rate, Eigen::Index rows, Eigen::Index cols = 1,
                  double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8)
        : lr_(learning_rate),
          beta1_(beta1),
          beta2_(beta2),
          eps_(epsilon),
          m_(Mat::Zero(rows, cols)),
          v_(Mat::Zero(rows, cols)) {}

    /// One descent step (pass -gradient to ascend).
    void step(Mat& param, const Mat& grad) {
        ++t_;
        m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
        v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
        const double bc1 = 1.0 - std::pow(beta1_, t_);
        const double bc2 = 1.0 - std::pow(beta2_, t_);
        param.array() -= lr_ * (m_.array() / bc1) /
                         ((v_.array() / bc2).sqrt() + eps_);
    }

    long steps_taken() const { return t_; }

private:
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    Mat m_, v_;
};

} // namespace gravlearn
