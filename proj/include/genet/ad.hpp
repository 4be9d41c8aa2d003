#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "genet/error.hpp"

namespace genet::ad {

/// Registry of trainable matrices and their gradient accumulators.
class Params {
 public:
  int add(std::string name, Eigen::MatrixXd value) {
    names_.push_back(std::move(name));
    grads_.push_back(Eigen::MatrixXd::Zero(value.rows(), value.cols()));
    values_.push_back(std::move(value));
    return static_cast<int>(values_.size()) - 1;
  }

  Eigen::MatrixXd& value(int pid) { return values_[pid]; }
  const Eigen::MatrixXd& value(int pid) const { return values_[pid]; }
  Eigen::MatrixXd& grad(int pid) { return grads_[pid]; }
  const Eigen::MatrixXd& grad(int pid) const { return grads_[pid]; }
  const std::string& name(int pid) const { return names_[pid]; }
  int count() const { return static_cast<int>(values_.size()); }

  void zero_grads() {
    for (auto& g : grads_) g.setZero();
  }

  bool grads_finite() const {
    for (const auto& g : grads_)
      if (!g.allFinite()) return false;
    return true;
  }

 private:
  std::vector<std::string> names_;
  std::vector<Eigen::MatrixXd> values_;
  std::vector<Eigen::MatrixXd> grads_;
};

struct Var {
  int32_t i = -1;
  bool valid() const { return i >= 0; }
};
struct Sc {
  int32_t i = -1;
  bool valid() const { return i >= 0; }
};

/// Reverse-mode tape over row vectors and scalars. Nodes are appended
/// during the forward pass; backward() replays them in reverse and
/// accumulates parameter gradients into the bound Params registry.
class Tape {
 public:
  explicit Tape(Params& params) : params_(&params) {}

  // vector nodes
  Var constant(Eigen::RowVectorXd v);
  Var zero(Eigen::Index dim);
  Var param_row(int pid, Eigen::Index row);
  Var combine(std::span<const Var> xs, std::span<const double> coeffs);
  Var mean_of(std::span<const Var> xs);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var scale(Var a, double c);
  Var shift(Var a, Eigen::RowVectorXd c);
  Var matmul(Var a, int pid);  // a * P, P trainable
  Var hadamard(Var a, Var b);
  Var sigmoid_v(Var a);
  Var tanh_v(Var a);
  Var one_minus(Var a);

  // scalar nodes
  Sc constant_s(double c);
  Sc dot(Var a, Var b);
  Sc add_s(Sc a, Sc b);
  Sc sub_s(Sc a, Sc b);
  Sc scale_s(Sc a, double c);
  Sc neg_s(Sc a);
  Sc sigmoid_s(Sc a);
  Sc log_sigmoid(Sc a);
  Sc mean_s(std::span<const Sc> xs);
  Sc weighted_sum(std::span<const Sc> xs, std::span<const double> weights);

  /// Grouped InfoNCE with cosine similarity: for anchor i the positive
  /// logit is sim(a_i, p_i)/tau and the negative logits are
  /// sim(a_i, a_j)/tau over the other anchors of the group. Returns the
  /// mean of the per-anchor losses as one scalar node.
  Sc infonce(std::span<const Var> anchors, std::span<const Var> positives, double tau);

  double value(Sc s) const { return sval_[s.i]; }
  const Eigen::RowVectorXd& value(Var v) const { return vval_[v.i]; }

  /// Seeds d(root) = 1 and accumulates parameter gradients. One sweep
  /// per tape.
  void backward(Sc root);

  size_t vec_nodes() const { return vval_.size(); }

 private:
  Var new_vec(Eigen::RowVectorXd v) {
    vval_.push_back(std::move(v));
    return Var{static_cast<int32_t>(vval_.size()) - 1};
  }
  Sc new_sc(double v) {
    sval_.push_back(v);
    return Sc{static_cast<int32_t>(sval_.size()) - 1};
  }

  Params* params_;
  std::vector<Eigen::RowVectorXd> vval_;
  std::vector<double> sval_;
  std::vector<Eigen::RowVectorXd> vadj_;
  std::vector<double> sadj_;
  std::vector<std::function<void()>> back_;
  bool swept_ = false;
};

}  // namespace genet::ad
