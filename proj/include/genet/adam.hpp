#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "genet/error.hpp"

namespace genet {

/// Adam with bias correction, beta = (0.9, 0.999), eps = 1e-8.
class AdamState {
 public:
  AdamState(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  /// One update over a set of parameter matrices and matching gradients.
  /// All slots advance together on a shared step counter.
  void step(std::vector<Eigen::MatrixXd*> params, std::vector<const Eigen::MatrixXd*> grads,
            double lr) {
    if (params.size() != grads.size()) fail(Errc::ShapeMismatch, "params/grads count mismatch");
    if (m_.empty()) {
      for (const auto* g : grads) {
        m_.push_back(Eigen::MatrixXd::Zero(g->rows(), g->cols()));
        v_.push_back(Eigen::MatrixXd::Zero(g->rows(), g->cols()));
      }
    }
    if (m_.size() != params.size()) fail(Errc::ShapeMismatch, "optimizer slot count changed");
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (size_t k = 0; k < params.size(); ++k) {
      Eigen::MatrixXd& p = *params[k];
      const Eigen::MatrixXd& g = *grads[k];
      if (p.rows() != g.rows() || p.cols() != g.cols())
        fail(Errc::ShapeMismatch, "gradient shape does not match parameter");
      m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * g;
      v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * g.cwiseProduct(g);
      const Eigen::MatrixXd m_hat = m_[k] / bc1;
      const Eigen::MatrixXd denom =
          (v_[k] / bc2).cwiseSqrt() + Eigen::MatrixXd::Constant(p.rows(), p.cols(), eps_);
      p -= lr * m_hat.cwiseQuotient(denom);
    }
  }

  long step_count() const { return t_; }

 private:
  double beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Eigen::MatrixXd> m_;
  std::vector<Eigen::MatrixXd> v_;
};

}  // namespace genet
