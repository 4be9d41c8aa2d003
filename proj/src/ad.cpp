#include "genet/ad.hpp"

#include <cmath>

namespace genet::ad {

namespace {

double stable_log_sigmoid(double x) {
  // -softplus(-x)
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

constexpr double kNormFloor = 1e-12;

}  // namespace

Var Tape::constant(Eigen::RowVectorXd v) {
  Var out = new_vec(std::move(v));
  back_.emplace_back([] {});
  return out;
}

Var Tape::zero(Eigen::Index dim) { return constant(Eigen::RowVectorXd::Zero(dim)); }

Var Tape::param_row(int pid, Eigen::Index row) {
  Var out = new_vec(params_->value(pid).row(row));
  back_.emplace_back([this, pid, row, out] { params_->grad(pid).row(row) += vadj_[out.i]; });
  return out;
}

Var Tape::combine(std::span<const Var> xs, std::span<const double> coeffs) {
  if (xs.empty() || xs.size() != coeffs.size())
    fail(Errc::ShapeMismatch, "combine needs matching non-empty inputs");
  Eigen::RowVectorXd acc = vval_[xs[0].i] * coeffs[0];
  for (size_t k = 1; k < xs.size(); ++k) acc += vval_[xs[k].i] * coeffs[k];
  Var out = new_vec(std::move(acc));
  std::vector<Var> xs_own(xs.begin(), xs.end());
  std::vector<double> c_own(coeffs.begin(), coeffs.end());
  back_.emplace_back([this, xs_own = std::move(xs_own), c_own = std::move(c_own), out] {
    for (size_t k = 0; k < xs_own.size(); ++k) vadj_[xs_own[k].i] += c_own[k] * vadj_[out.i];
  });
  return out;
}

Var Tape::mean_of(std::span<const Var> xs) {
  std::vector<double> c(xs.size(), 1.0 / static_cast<double>(xs.size()));
  return combine(xs, c);
}

Var Tape::add(Var a, Var b) {
  Var out = new_vec(vval_[a.i] + vval_[b.i]);
  back_.emplace_back([this, a, b, out] {
    vadj_[a.i] += vadj_[out.i];
    vadj_[b.i] += vadj_[out.i];
  });
  return out;
}

Var Tape::sub(Var a, Var b) {
  Var out = new_vec(vval_[a.i] - vval_[b.i]);
  back_.emplace_back([this, a, b, out] {
    vadj_[a.i] += vadj_[out.i];
    vadj_[b.i] -= vadj_[out.i];
  });
  return out;
}

Var Tape::scale(Var a, double c) {
  Var out = new_vec(vval_[a.i] * c);
  back_.emplace_back([this, a, c, out] { vadj_[a.i] += c * vadj_[out.i]; });
  return out;
}

Var Tape::shift(Var a, Eigen::RowVectorXd c) {
  Var out = new_vec(vval_[a.i] + c);
  back_.emplace_back([this, a, out] { vadj_[a.i] += vadj_[out.i]; });
  return out;
}

Var Tape::matmul(Var a, int pid) {
  Var out = new_vec(vval_[a.i] * params_->value(pid));
  back_.emplace_back([this, a, pid, out] {
    vadj_[a.i] += vadj_[out.i] * params_->value(pid).transpose();
    params_->grad(pid) += vval_[a.i].transpose() * vadj_[out.i];
  });
  return out;
}

Var Tape::hadamard(Var a, Var b) {
  Var out = new_vec(vval_[a.i].cwiseProduct(vval_[b.i]));
  back_.emplace_back([this, a, b, out] {
    vadj_[a.i] += vadj_[out.i].cwiseProduct(vval_[b.i]);
    vadj_[b.i] += vadj_[out.i].cwiseProduct(vval_[a.i]);
  });
  return out;
}

Var Tape::sigmoid_v(Var a) {
  Eigen::RowVectorXd y = vval_[a.i].unaryExpr([](double x) { return sigmoid(x); });
  Var out = new_vec(std::move(y));
  back_.emplace_back([this, a, out] {
    const auto& y = vval_[out.i];
    vadj_[a.i] += vadj_[out.i].cwiseProduct(y.cwiseProduct(Eigen::RowVectorXd::Ones(y.size()) - y));
  });
  return out;
}

Var Tape::tanh_v(Var a) {
  Eigen::RowVectorXd y = vval_[a.i].array().tanh();
  Var out = new_vec(std::move(y));
  back_.emplace_back([this, a, out] {
    const auto& y = vval_[out.i];
    vadj_[a.i] += vadj_[out.i].cwiseProduct(
        (Eigen::RowVectorXd::Ones(y.size()) - y.cwiseProduct(y)).eval());
  });
  return out;
}

Var Tape::one_minus(Var a) {
  Var out = new_vec(Eigen::RowVectorXd::Ones(vval_[a.i].size()) - vval_[a.i]);
  back_.emplace_back([this, a, out] { vadj_[a.i] -= vadj_[out.i]; });
  return out;
}

Sc Tape::constant_s(double c) {
  Sc out = new_sc(c);
  back_.emplace_back([] {});
  return out;
}

Sc Tape::dot(Var a, Var b) {
  Sc out = new_sc(vval_[a.i].dot(vval_[b.i]));
  back_.emplace_back([this, a, b, out] {
    vadj_[a.i] += sadj_[out.i] * vval_[b.i];
    vadj_[b.i] += sadj_[out.i] * vval_[a.i];
  });
  return out;
}

Sc Tape::add_s(Sc a, Sc b) {
  Sc out = new_sc(sval_[a.i] + sval_[b.i]);
  back_.emplace_back([this, a, b, out] {
    sadj_[a.i] += sadj_[out.i];
    sadj_[b.i] += sadj_[out.i];
  });
  return out;
}

Sc Tape::sub_s(Sc a, Sc b) {
  Sc out = new_sc(sval_[a.i] - sval_[b.i]);
  back_.emplace_back([this, a, b, out] {
    sadj_[a.i] += sadj_[out.i];
    sadj_[b.i] -= sadj_[out.i];
  });
  return out;
}

Sc Tape::scale_s(Sc a, double c) {
  Sc out = new_sc(sval_[a.i] * c);
  back_.emplace_back([this, a, c, out] { sadj_[a.i] += c * sadj_[out.i]; });
  return out;
}

Sc Tape::neg_s(Sc a) { return scale_s(a, -1.0); }

Sc Tape::sigmoid_s(Sc a) {
  Sc out = new_sc(sigmoid(sval_[a.i]));
  back_.emplace_back([this, a, out] {
    const double y = sval_[out.i];
    sadj_[a.i] += sadj_[out.i] * y * (1.0 - y);
  });
  return out;
}

Sc Tape::log_sigmoid(Sc a) {
  Sc out = new_sc(stable_log_sigmoid(sval_[a.i]));
  back_.emplace_back([this, a, out] { sadj_[a.i] += sadj_[out.i] * sigmoid(-sval_[a.i]); });
  return out;
}

Sc Tape::mean_s(std::span<const Sc> xs) {
  if (xs.empty()) fail(Errc::EmptyBatch, "mean over no scalars");
  double acc = 0.0;
  for (Sc s : xs) acc += sval_[s.i];
  const double inv = 1.0 / static_cast<double>(xs.size());
  Sc out = new_sc(acc * inv);
  std::vector<Sc> own(xs.begin(), xs.end());
  back_.emplace_back([this, own = std::move(own), inv, out] {
    for (Sc s : own) sadj_[s.i] += inv * sadj_[out.i];
  });
  return out;
}

Sc Tape::weighted_sum(std::span<const Sc> xs, std::span<const double> weights) {
  if (xs.empty() || xs.size() != weights.size())
    fail(Errc::ShapeMismatch, "weighted_sum needs matching non-empty inputs");
  double acc = 0.0;
  for (size_t k = 0; k < xs.size(); ++k) acc += sval_[xs[k].i] * weights[k];
  Sc out = new_sc(acc);
  std::vector<Sc> own(xs.begin(), xs.end());
  std::vector<double> w_own(weights.begin(), weights.end());
  back_.emplace_back([this, own = std::move(own), w_own = std::move(w_own), out] {
    for (size_t k = 0; k < own.size(); ++k) sadj_[own[k].i] += w_own[k] * sadj_[out.i];
  });
  return out;
}

Sc Tape::infonce(std::span<const Var> anchors, std::span<const Var> positives, double tau) {
  const size_t n = anchors.size();
  if (n == 0 || positives.size() != n) fail(Errc::EmptyBatch, "infonce needs anchors + positives");
  const Eigen::Index d = vval_[anchors[0].i].size();

  // Normalized copies, with inverse norms kept for the backward
  // unprojection. Degenerate (near-zero) vectors normalize to zero and
  // receive no gradient through the cosine.
  Eigen::MatrixXd A(n, d), P(n, d);
  Eigen::VectorXd inv_an(n), inv_pn(n);
  for (size_t i = 0; i < n; ++i) {
    const auto& a = vval_[anchors[i].i];
    const auto& p = vval_[positives[i].i];
    const double na = a.norm(), np = p.norm();
    inv_an(i) = na >= kNormFloor ? 1.0 / na : 0.0;
    inv_pn(i) = np >= kNormFloor ? 1.0 / np : 0.0;
    A.row(i) = a * inv_an(i);
    P.row(i) = p * inv_pn(i);
  }

  Eigen::MatrixXd S = A * A.transpose();               // anchor-anchor cosines
  Eigen::VectorXd sp = (A.cwiseProduct(P)).rowwise().sum();  // anchor-positive cosines

  const double inv_tau = 1.0 / tau;
  double loss = 0.0;
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);  // negative softmax weights
  Eigen::VectorXd wp(n);                            // positive softmax weights
  for (size_t i = 0; i < n; ++i) {
    double m = sp(i);
    for (size_t j = 0; j < n; ++j)
      if (j != i) m = std::max(m, S(i, j));
    double z = std::exp((sp(i) - m) * inv_tau);
    for (size_t j = 0; j < n; ++j)
      if (j != i) z += std::exp((S(i, j) - m) * inv_tau);
    const double lse = m + tau * std::log(z);  // tau * log sum exp(s/tau)
    loss += (lse - sp(i)) * inv_tau;
    wp(i) = std::exp((sp(i) - lse) * inv_tau);
    for (size_t j = 0; j < n; ++j)
      if (j != i) W(i, j) = std::exp((S(i, j) - lse) * inv_tau);
  }
  loss /= static_cast<double>(n);

  Sc out = new_sc(loss);
  std::vector<Var> a_own(anchors.begin(), anchors.end());
  std::vector<Var> p_own(positives.begin(), positives.end());
  back_.emplace_back([this, a_own = std::move(a_own), p_own = std::move(p_own), A = std::move(A),
                      P = std::move(P), inv_an = std::move(inv_an), inv_pn = std::move(inv_pn),
                      W = std::move(W), wp = std::move(wp), inv_tau, out] {
    const double g = sadj_[out.i] * inv_tau / static_cast<double>(a_own.size());
    // d loss / d cosines, then chain through the normalization.
    Eigen::MatrixXd GA = ((wp.array() - 1.0).matrix().asDiagonal() * P) + W * A + W.transpose() * A;
    Eigen::MatrixXd GP = (wp.array() - 1.0).matrix().asDiagonal() * A;
    for (size_t i = 0; i < a_own.size(); ++i) {
      Eigen::RowVectorXd ga = GA.row(i) * g;
      Eigen::RowVectorXd gp = GP.row(i) * g;
      vadj_[a_own[i].i] += (ga - ga.dot(A.row(i)) * A.row(i)) * inv_an(i);
      vadj_[p_own[i].i] += (gp - gp.dot(P.row(i)) * P.row(i)) * inv_pn(i);
    }
  });
  return out;
}

void Tape::backward(Sc root) {
  if (swept_) fail(Errc::ShapeMismatch, "tape already swept");
  swept_ = true;
  vadj_.resize(vval_.size());
  for (size_t i = 0; i < vval_.size(); ++i) vadj_[i] = Eigen::RowVectorXd::Zero(vval_[i].size());
  sadj_.assign(sval_.size(), 0.0);
  sadj_[root.i] = 1.0;
  for (auto it = back_.rbegin(); it != back_.rend(); ++it) (*it)();
}

}  // namespace genet::ad
