#include "genet/finetune.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "genet/adam.hpp"
#include "genet/rng.hpp"

namespace genet {

namespace {

double stable_log_sigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

double bpr_term(double diff, LossForm form) {
  return form == LossForm::LogSigmoid ? -stable_log_sigmoid(diff) : -sigmoid(diff);
}

}  // namespace

void FinetuneConfig::validate() const {
  if (epochs < 0) fail(Errc::EmptyInput, "epochs must be non-negative");
  if (learning_rate <= 0) fail(Errc::EmptyInput, "learning_rate must be positive");
  if (warm_epochs < 0) fail(Errc::EmptyInput, "warm_epochs must be non-negative");
  if (lightgcn_layers < 0) fail(Errc::EmptyInput, "lightgcn_layers must be non-negative");
  if (seq_len <= 0) fail(Errc::EmptyInput, "seq_len must be positive");
}

BipartiteGraph BipartiteGraph::build(const InteractionLog& log, size_t user_count,
                                     size_t item_count) {
  BipartiteGraph A;
  A.user_items_.resize(user_count);
  A.item_users_.resize(item_count);
  for (const InteractionRecord& r : log) {
    if (r.user >= user_count)
      fail(Errc::UnknownNode, "user index " + std::to_string(r.user) + " out of range");
    if (r.item < user_count || r.item >= user_count + item_count)
      fail(Errc::UnknownNode, "item index " + std::to_string(r.item) + " outside the item block");
    A.user_items_[r.user].push_back(static_cast<uint32_t>(r.item - user_count));
  }
  for (size_t u = 0; u < user_count; ++u) {
    auto& v = A.user_items_[u];
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    for (uint32_t i : v) A.item_users_[i].push_back(static_cast<uint32_t>(u));
  }
  return A;
}

std::pair<EmbeddingMatrix, EmbeddingMatrix> lightgcn_propagate(const BipartiteGraph& A,
                                                               const EmbeddingMatrix& users0,
                                                               const EmbeddingMatrix& items0,
                                                               int layers) {
  if (static_cast<size_t>(users0.rows()) != A.user_count() ||
      static_cast<size_t>(items0.rows()) != A.item_count() || users0.cols() != items0.cols())
    fail(Errc::DimensionMismatch, "layer-0 shapes do not match the bipartite graph");

  EmbeddingMatrix u_layer = users0, i_layer = items0;
  EmbeddingMatrix u_acc = users0, i_acc = items0;
  for (int k = 0; k < layers; ++k) {
    EmbeddingMatrix u_next = EmbeddingMatrix::Zero(users0.rows(), users0.cols());
    EmbeddingMatrix i_next = EmbeddingMatrix::Zero(items0.rows(), items0.cols());
    for (size_t u = 0; u < A.user_count(); ++u) {
      const double du = static_cast<double>(A.user_degree(static_cast<uint32_t>(u)));
      for (uint32_t i : A.items_of(static_cast<uint32_t>(u))) {
        const double norm = 1.0 / std::sqrt(du * static_cast<double>(A.item_degree(i)));
        u_next.row(u) += norm * i_layer.row(i);
        i_next.row(i) += norm * u_layer.row(u);
      }
    }
    u_layer = std::move(u_next);
    i_layer = std::move(i_next);
    u_acc += u_layer;
    i_acc += i_layer;
  }

  const double inv = 1.0 / static_cast<double>(layers + 1);
  EmbeddingMatrix users = u_acc * inv;
  EmbeddingMatrix items = i_acc * inv;
  // Isolated nodes bypass propagation and keep their layer-0 rows.
  for (size_t u = 0; u < A.user_count(); ++u)
    if (A.user_degree(static_cast<uint32_t>(u)) == 0) users.row(u) = users0.row(u);
  for (size_t i = 0; i < A.item_count(); ++i)
    if (A.item_degree(static_cast<uint32_t>(i)) == 0) items.row(i) = items0.row(i);
  return {std::move(users), std::move(items)};
}

double topn_loss(const std::vector<BprSample>& batch, const EmbeddingMatrix& users,
                 const EmbeddingMatrix& items, LossForm form) {
  if (batch.empty()) fail(Errc::EmptyBatch, "no ranking samples");
  double acc = 0.0;
  for (const BprSample& s : batch) {
    const double diff =
        users.row(s.user).dot(items.row(s.pos)) - users.row(s.user).dot(items.row(s.neg));
    acc += bpr_term(diff, form);
  }
  return acc / static_cast<double>(batch.size());
}

GruParams GruParams::init(int dim, uint64_t seed) {
  GruParams p = zero(dim);
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  KeyedRng rng(seed, "gru-init");
  auto fill = [&](Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        m(i, j) = (2.0 * rng.next_double() - 1.0) * bound;
  };
  fill(p.wz);
  fill(p.uz);
  fill(p.wr);
  fill(p.ur);
  fill(p.wh);
  fill(p.uh);
  return p;
}

GruParams GruParams::zero(int dim) {
  GruParams p;
  p.wz = p.uz = p.wr = p.ur = p.wh = p.uh = Eigen::MatrixXd::Zero(dim, dim);
  p.bz = p.br = p.bh = Eigen::RowVectorXd::Zero(dim);
  return p;
}

Eigen::RowVectorXd gru_forward(const GruParams& p, const std::vector<Eigen::RowVectorXd>& seq) {
  if (seq.empty()) fail(Errc::EmptySequence, "GRU input sequence is empty");
  const Eigen::Index d = p.wz.rows();
  Eigen::RowVectorXd h = Eigen::RowVectorXd::Zero(d);
  for (const Eigen::RowVectorXd& x : seq) {
    if (x.size() != d) fail(Errc::DimensionMismatch, "GRU input size mismatch");
    const Eigen::RowVectorXd z =
        (x * p.wz + h * p.uz + p.bz).unaryExpr([](double v) { return sigmoid(v); });
    const Eigen::RowVectorXd r =
        (x * p.wr + h * p.ur + p.br).unaryExpr([](double v) { return sigmoid(v); });
    const Eigen::RowVectorXd cand =
        (x * p.wh + r.cwiseProduct(h) * p.uh + p.bh).array().tanh();
    h = (Eigen::RowVectorXd::Ones(d) - z).cwiseProduct(h) + z.cwiseProduct(cand);
  }
  return h;
}

double seq_loss(const std::vector<SeqSample>& batch, const EmbeddingMatrix& users,
                const EmbeddingMatrix& items, const GruParams& gru, LossForm form) {
  if (batch.empty()) fail(Errc::EmptyBatch, "no sequential samples");
  double acc = 0.0;
  for (const SeqSample& s : batch) {
    std::vector<Eigen::RowVectorXd> seq;
    seq.reserve(s.prefix.size());
    for (uint32_t i : s.prefix) seq.push_back(items.row(i));
    const Eigen::RowVectorXd hidden =
        seq.empty() ? Eigen::RowVectorXd::Zero(users.cols()).eval() : gru_forward(gru, seq);
    const Eigen::RowVectorXd ut = seq_user_representation(users.row(s.user), hidden);
    acc += bpr_term(ut.dot(items.row(s.pos)) - ut.dot(items.row(s.neg)), form);
  }
  return acc / static_cast<double>(batch.size());
}

GruPids register_gru(ad::Params& params, const GruParams& init) {
  GruPids pids;
  pids.wz = params.add("gru.wz", init.wz);
  pids.uz = params.add("gru.uz", init.uz);
  pids.wr = params.add("gru.wr", init.wr);
  pids.ur = params.add("gru.ur", init.ur);
  pids.wh = params.add("gru.wh", init.wh);
  pids.uh = params.add("gru.uh", init.uh);
  pids.bz = params.add("gru.bz", init.bz);
  pids.br = params.add("gru.br", init.br);
  pids.bh = params.add("gru.bh", init.bh);
  return pids;
}

GruParams gru_from_params(const ad::Params& params, const GruPids& pids) {
  GruParams p;
  p.wz = params.value(pids.wz);
  p.uz = params.value(pids.uz);
  p.wr = params.value(pids.wr);
  p.ur = params.value(pids.ur);
  p.wh = params.value(pids.wh);
  p.uh = params.value(pids.uh);
  p.bz = params.value(pids.bz);
  p.br = params.value(pids.br);
  p.bh = params.value(pids.bh);
  return p;
}

ad::Var gru_forward_tape(ad::Tape& tape, const GruPids& pids, const std::vector<ad::Var>& inputs) {
  if (inputs.empty()) fail(Errc::EmptySequence, "GRU input sequence is empty");
  ad::Var h = tape.zero(tape.value(inputs[0]).size());
  for (ad::Var x : inputs) {
    ad::Var z = tape.sigmoid_v(tape.add(tape.add(tape.matmul(x, pids.wz), tape.matmul(h, pids.uz)),
                                        tape.param_row(pids.bz, 0)));
    ad::Var r = tape.sigmoid_v(tape.add(tape.add(tape.matmul(x, pids.wr), tape.matmul(h, pids.ur)),
                                        tape.param_row(pids.br, 0)));
    ad::Var cand = tape.tanh_v(
        tape.add(tape.add(tape.matmul(x, pids.wh), tape.matmul(tape.hadamard(r, h), pids.uh)),
                 tape.param_row(pids.bh, 0)));
    h = tape.add(tape.hadamard(tape.one_minus(z), h), tape.hadamard(z, cand));
  }
  return h;
}

namespace {

/// LightGCN layer stack over trainable table rows; outputs are the
/// layer means with the isolated-node bypass.
struct PropagatedVars {
  std::vector<ad::Var> users;
  std::vector<ad::Var> items;
};

PropagatedVars build_propagation(ad::Tape& tape, const BipartiteGraph& A, int table_pid,
                                 int layers) {
  const size_t user_count = A.user_count();
  const size_t item_count = A.item_count();
  std::vector<std::vector<ad::Var>> u_layers(layers + 1), i_layers(layers + 1);
  u_layers[0].resize(user_count);
  i_layers[0].resize(item_count);
  for (size_t u = 0; u < user_count; ++u)
    u_layers[0][u] = tape.param_row(table_pid, static_cast<Eigen::Index>(u));
  for (size_t i = 0; i < item_count; ++i)
    i_layers[0][i] = tape.param_row(table_pid, static_cast<Eigen::Index>(user_count + i));

  for (int k = 0; k < layers; ++k) {
    u_layers[k + 1].resize(user_count);
    i_layers[k + 1].resize(item_count);
    for (size_t u = 0; u < user_count; ++u) {
      const auto& items = A.items_of(static_cast<uint32_t>(u));
      if (items.empty()) continue;
      std::vector<ad::Var> vars;
      std::vector<double> coeffs;
      vars.reserve(items.size());
      coeffs.reserve(items.size());
      const double du = static_cast<double>(items.size());
      for (uint32_t i : items) {
        vars.push_back(i_layers[k][i]);
        coeffs.push_back(1.0 / std::sqrt(du * static_cast<double>(A.item_degree(i))));
      }
      u_layers[k + 1][u] = tape.combine(vars, coeffs);
    }
    for (size_t i = 0; i < item_count; ++i) {
      const auto& users = A.users_of(static_cast<uint32_t>(i));
      if (users.empty()) continue;
      std::vector<ad::Var> vars;
      std::vector<double> coeffs;
      vars.reserve(users.size());
      coeffs.reserve(users.size());
      const double di = static_cast<double>(users.size());
      for (uint32_t u : users) {
        vars.push_back(u_layers[k][u]);
        coeffs.push_back(1.0 / std::sqrt(di * static_cast<double>(A.user_degree(u))));
      }
      i_layers[k + 1][i] = tape.combine(vars, coeffs);
    }
  }

  auto combined = [&](const std::vector<std::vector<ad::Var>>& stack, size_t n) {
    std::vector<ad::Var> out(n);
    for (size_t i = 0; i < n; ++i) {
      if (layers == 0 || !stack[1][i].valid()) {
        out[i] = stack[0][i];  // isolated: layer-0 bypass
        continue;
      }
      std::vector<ad::Var> per_layer;
      per_layer.reserve(stack.size());
      for (const auto& l : stack) per_layer.push_back(l[i]);
      out[i] = tape.mean_of(per_layer);
    }
    return out;
  };
  return {combined(u_layers, user_count), combined(i_layers, item_count)};
}

ad::Sc build_finetune_loss(ad::Tape& tape, const BipartiteGraph& A, int table_pid,
                           const GruPids* gru, Task task, const FinetuneBatch& batch,
                           LossForm form, int layers) {
  const PropagatedVars out = build_propagation(tape, A, table_pid, layers);
  std::vector<ad::Sc> terms;
  auto bpr = [&](ad::Var user_vec, uint32_t pos, uint32_t neg) {
    ad::Sc diff =
        tape.sub_s(tape.dot(user_vec, out.items[pos]), tape.dot(user_vec, out.items[neg]));
    terms.push_back(form == LossForm::LogSigmoid ? tape.log_sigmoid(diff) : tape.sigmoid_s(diff));
  };
  if (task == Task::TopN) {
    for (const BprSample& s : batch.topn) bpr(out.users[s.user], s.pos, s.neg);
  } else {
    for (const SeqSample& s : batch.seq) {
      std::vector<ad::Var> inputs;
      inputs.reserve(s.prefix.size());
      for (uint32_t i : s.prefix) inputs.push_back(out.items[i]);
      ad::Var hidden = gru_forward_tape(tape, *gru, inputs);
      bpr(tape.add(out.users[s.user], hidden), s.pos, s.neg);
    }
  }
  if (terms.empty()) fail(Errc::EmptyBatch, "no trainable samples for this task");
  return tape.neg_s(tape.mean_s(terms));
}

struct TrainIndex {
  std::vector<std::vector<uint32_t>> chronological;  // per user, local item ids in time order
  std::vector<std::unordered_set<uint32_t>> seen;    // per user, trained items
};

TrainIndex index_training(const InteractionLog& train, size_t user_count, size_t item_count) {
  TrainIndex idx;
  idx.chronological.resize(user_count);
  idx.seen.resize(user_count);
  InteractionLog sorted = train;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const InteractionRecord& a, const InteractionRecord& b) {
                     return a.user != b.user ? a.user < b.user : a.timestamp < b.timestamp;
                   });
  for (const InteractionRecord& r : sorted) {
    if (r.user >= user_count || r.item < user_count || r.item >= user_count + item_count)
      fail(Errc::UnknownNode, "interaction outside the user/item blocks");
    idx.chronological[r.user].push_back(static_cast<uint32_t>(r.item - user_count));
    idx.seen[r.user].insert(static_cast<uint32_t>(r.item - user_count));
  }
  return idx;
}

uint32_t sample_negative(const TrainIndex& idx, uint32_t user, size_t item_count, KeyedRng& rng) {
  uint32_t neg;
  do {
    neg = static_cast<uint32_t>(rng.next_below(item_count));
  } while (idx.seen[user].count(neg) > 0);
  return neg;
}

/// Negatives resampled per epoch; one BPR term per training pair, one
/// sequential pair per user with enough history.
FinetuneBatch make_finetune_batch(Task task, const TrainIndex& idx, size_t item_count,
                                  const FinetuneConfig& cfg, int epoch) {
  FinetuneBatch batch;
  if (task == Task::TopN) {
    KeyedRng rng(cfg.seed, "topn-neg", static_cast<uint64_t>(epoch));
    for (uint32_t u = 0; u < idx.chronological.size(); ++u) {
      if (idx.seen[u].size() >= item_count) continue;  // nothing left to contrast against
      for (uint32_t pos : idx.chronological[u])
        batch.topn.push_back({u, pos, sample_negative(idx, u, item_count, rng)});
    }
  } else {
    KeyedRng rng(cfg.seed, "seq-neg", static_cast<uint64_t>(epoch));
    for (uint32_t u = 0; u < idx.chronological.size(); ++u) {
      const auto& items = idx.chronological[u];
      if (items.size() < 2 || idx.seen[u].size() >= item_count) continue;
      SeqSample s;
      s.user = u;
      const size_t end = items.size() - 1;  // last trained item is the target
      const size_t start =
          end > static_cast<size_t>(cfg.seq_len) ? end - static_cast<size_t>(cfg.seq_len) : 0;
      s.prefix.assign(items.begin() + start, items.begin() + end);
      s.pos = items[end];
      s.neg = sample_negative(idx, u, item_count, rng);
      batch.seq.push_back(std::move(s));
    }
  }
  return batch;
}

}  // namespace

double evaluate_finetune_loss(Task task, const BipartiteGraph& A, const Eigen::MatrixXd& table,
                              const GruParams* gru, const FinetuneBatch& batch,
                              const FinetuneConfig& cfg) {
  ad::Params reg;
  const int table_pid = reg.add("table", table);
  GruPids pids{};
  if (task == Task::Sequential) {
    if (gru == nullptr) fail(Errc::ShapeMismatch, "sequential loss needs GRU parameters");
    pids = register_gru(reg, *gru);
  }
  ad::Tape tape(reg);
  return tape.value(build_finetune_loss(tape, A, table_pid, &pids, task, batch, cfg.loss_form,
                                        cfg.lightgcn_layers));
}

FinetuneGradients finetune_gradients(Task task, const BipartiteGraph& A,
                                     const Eigen::MatrixXd& table, const GruParams* gru,
                                     const FinetuneBatch& batch, const FinetuneConfig& cfg) {
  ad::Params reg;
  const int table_pid = reg.add("table", table);
  GruPids pids{};
  if (task == Task::Sequential) {
    if (gru == nullptr) fail(Errc::ShapeMismatch, "sequential loss needs GRU parameters");
    pids = register_gru(reg, *gru);
  }
  ad::Tape tape(reg);
  ad::Sc loss =
      build_finetune_loss(tape, A, table_pid, &pids, task, batch, cfg.loss_form,
                          cfg.lightgcn_layers);
  tape.backward(loss);
  if (!reg.grads_finite()) fail(Errc::NonFiniteGradient, "non-finite fine-tuning gradient");
  FinetuneGradients out;
  out.loss = tape.value(loss);
  out.table_grad = reg.grad(table_pid);
  out.gru_grad = GruParams::zero(static_cast<int>(table.cols()));
  if (task == Task::Sequential) {
    out.gru_grad.wz = reg.grad(pids.wz);
    out.gru_grad.uz = reg.grad(pids.uz);
    out.gru_grad.wr = reg.grad(pids.wr);
    out.gru_grad.ur = reg.grad(pids.ur);
    out.gru_grad.wh = reg.grad(pids.wh);
    out.gru_grad.uh = reg.grad(pids.uh);
    out.gru_grad.bz = reg.grad(pids.bz);
    out.gru_grad.br = reg.grad(pids.br);
    out.gru_grad.bh = reg.grad(pids.bh);
  }
  return out;
}

FinetuneResult run_finetune(Task task, const Hypergraph& g_side, const PretrainResult& pre,
                            const InteractionLog& train, size_t user_count, size_t item_count,
                            const FinetuneConfig& cfg) {
  cfg.validate();
  if (train.empty()) fail(Errc::EmptyLog, "no training interactions");
  if (static_cast<size_t>(pre.node_embeddings.rows()) != user_count + item_count)
    fail(Errc::DimensionMismatch, "pre-trained embeddings do not cover the node set");

  const Eigen::Index d = pre.node_embeddings.cols();
  const Hypergraph g_upd = g_side.updated_with(train);
  const EmbeddingMatrix table0 = updated_node_embeddings(g_upd, pre.node_embeddings,
                                                         pre.edge_embeddings, pre.params.w);

  const BipartiteGraph A = BipartiteGraph::build(train, user_count, item_count);
  const TrainIndex idx = index_training(train, user_count, item_count);

  ad::Params reg;
  const int table_pid = reg.add("table", table0);
  GruPids gru_pids{};
  if (task == Task::Sequential)
    gru_pids = register_gru(reg, GruParams::init(static_cast<int>(d), cfg.seed));

  std::vector<Eigen::MatrixXd*> values;
  std::vector<const Eigen::MatrixXd*> grads;
  for (int pid = 0; pid < reg.count(); ++pid) {
    values.push_back(&reg.value(pid));
    grads.push_back(&reg.grad(pid));
  }

  AdamState adam;
  FinetuneResult result;
  result.history.reserve(cfg.epochs);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = epoch < cfg.warm_epochs ? cfg.learning_rate * cfg.warm_factor
                                              : cfg.learning_rate;
    const FinetuneBatch batch = make_finetune_batch(task, idx, item_count, cfg, epoch);
    ad::Tape tape(reg);
    ad::Sc loss = build_finetune_loss(tape, A, table_pid, &gru_pids, task, batch, cfg.loss_form,
                                      cfg.lightgcn_layers);
    result.history.push_back(tape.value(loss));
    tape.backward(loss);
    if (!reg.grads_finite()) fail(Errc::NonFiniteGradient, "non-finite fine-tuning gradient");
    adam.step(values, grads, lr);
    reg.zero_grads();
  }

  result.table = reg.value(table_pid);
  auto [users, items] = lightgcn_propagate(A, result.table.topRows(user_count),
                                           result.table.bottomRows(item_count),
                                           cfg.lightgcn_layers);
  result.user_embeddings = std::move(users);
  result.item_embeddings = std::move(items);
  result.gru = task == Task::Sequential ? gru_from_params(reg, gru_pids)
                                        : GruParams::zero(static_cast<int>(d));
  return result;
}

}  // namespace genet
