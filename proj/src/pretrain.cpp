#include "genet/pretrain.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "genet/ad.hpp"
#include "genet/adam.hpp"

namespace genet {

namespace {

double stable_log_sigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

double cosine(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
  const double na = a.norm(), nb = b.norm();
  if (na < 1e-12 || nb < 1e-12) return 0.0;
  return a.dot(b) / (na * nb);
}

/// Edges that can seed a triple: at least two members and at least one
/// node outside the edge.
std::vector<uint32_t> eligible_edges(const Hypergraph& g) {
  std::vector<uint32_t> out;
  for (uint32_t e = 0; e < g.edge_count(); ++e)
    if (g.edge_degree(e) >= 2 && g.edge_degree(e) < g.node_count()) out.push_back(e);
  return out;
}

Triple sample_one(const Hypergraph& g, const std::vector<uint32_t>& eligible, KeyedRng& rng) {
  Triple t;
  t.edge = eligible[rng.next_below(eligible.size())];
  auto members = g.members_of(t.edge);
  const size_t a = rng.next_below(members.size());
  size_t p = rng.next_below(members.size() - 1);
  if (p >= a) ++p;
  t.anchor = members[a];
  t.positive = members[p];
  do {
    t.negative = static_cast<uint32_t>(rng.next_below(g.node_count()));
  } while (g.incident(t.negative, t.edge));
  return t;
}

}  // namespace

void PretrainConfig::validate() const {
  if (dim <= 0) fail(Errc::DimensionMismatch, "dim must be positive");
  if (batch_size <= 0) fail(Errc::EmptyBatch, "batch_size must be positive");
  if (learning_rate <= 0) fail(Errc::EmptyInput, "learning_rate must be positive");
  if (epochs < 0) fail(Errc::EmptyInput, "epochs must be non-negative");
  if (lambda < 0) fail(Errc::EmptyInput, "lambda must be non-negative");
  if (tau <= 0) fail(Errc::EmptyInput, "tau must be positive");
  if (k_intra <= 0) fail(Errc::EmptyInput, "k_intra must be positive");
}

std::vector<Triple> sample_triples(const Hypergraph& g, int count, KeyedRng& rng) {
  const auto eligible = eligible_edges(g);
  if (eligible.empty())
    fail(Errc::NoEligibleEdge, "no hyperedge with >= 2 members and an outside node");
  std::vector<Triple> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(sample_one(g, eligible, rng));
  return out;
}

Eigen::RowVectorXd node_perturb(const Eigen::RowVectorXd& x, double lambda, KeyedRng& rng) {
  if (lambda < 0) fail(Errc::EmptyInput, "lambda must be non-negative");
  Eigen::RowVectorXd out = x;
  if (lambda == 0.0) return out;
  const double s = std::sqrt(lambda);
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) += s * rng.next_normal();
  return out;
}

Eigen::RowVectorXd corrupt_positive(const Hypergraph& g, const EmbeddingMatrix& edge_embeddings,
                                    const EmbeddingMatrix& X, const Eigen::MatrixXd& w,
                                    const Triple& t, double lambda,
                                    const Eigen::RowVectorXd& noise, CorruptionToggles toggles) {
  Eigen::RowVectorXd out = X.row(t.positive);
  if (toggles.np) out += std::sqrt(lambda) * noise;
  if (toggles.imp) {
    PerturbedView view(g, t.positive, t.edge);
    out += encode_perturbed_node(view, edge_embeddings, w, t.positive);
  }
  return out;
}

double hyperlink_loss(const std::vector<Triple>& triples, const EmbeddingMatrix& X,
                      const std::vector<Eigen::RowVectorXd>& corrupted, LossForm form) {
  if (triples.empty()) fail(Errc::EmptyBatch, "no triples");
  if (corrupted.size() != triples.size())
    fail(Errc::ShapeMismatch, "corrupted positives do not match triples");
  double acc = 0.0;
  for (size_t i = 0; i < triples.size(); ++i) {
    const Triple& t = triples[i];
    const double diff = X.row(t.anchor).dot(corrupted[i]) - X.row(t.anchor).dot(X.row(t.negative));
    acc += form == LossForm::LogSigmoid ? -stable_log_sigmoid(diff) : -sigmoid(diff);
  }
  return acc / static_cast<double>(triples.size());
}

namespace {

/// Shared softmax body for both contrastive forms: anchors vs their
/// augmented views, negatives drawn from the other anchors of the group.
double infonce_group(const std::vector<Eigen::RowVectorXd>& anchors,
                     const std::vector<Eigen::RowVectorXd>& augmented, double tau) {
  const size_t n = anchors.size();
  double loss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double pos = cosine(anchors[i], augmented[i]) / tau;
    double m = pos;
    std::vector<double> negs;
    negs.reserve(n - 1);
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      negs.push_back(cosine(anchors[i], anchors[j]) / tau);
      m = std::max(m, negs.back());
    }
    double z = std::exp(pos - m);
    for (double s : negs) z += std::exp(s - m);
    loss += (m + std::log(z)) - pos;
  }
  return loss / static_cast<double>(n);
}

}  // namespace

double inter_contrastive_loss(const std::vector<Eigen::RowVectorXd>& anchors,
                              const std::vector<Eigen::RowVectorXd>& augmented, double tau) {
  if (anchors.size() < 2) fail(Errc::EmptyBatch, "inter-contrastive batch needs >= 2 nodes");
  if (anchors.size() != augmented.size())
    fail(Errc::ShapeMismatch, "anchors and augmented rows differ in count");
  return infonce_group(anchors, augmented, tau);
}

double intra_contrastive_loss(const std::vector<std::vector<Eigen::RowVectorXd>>& edge_anchors,
                              const std::vector<std::vector<Eigen::RowVectorXd>>& edge_augmented,
                              double tau) {
  if (edge_anchors.empty()) fail(Errc::EmptyBatch, "no hyperedges in the batch");
  if (edge_anchors.size() != edge_augmented.size())
    fail(Errc::ShapeMismatch, "anchor and augmented edge groups differ");
  double acc = 0.0;
  for (size_t e = 0; e < edge_anchors.size(); ++e) {
    if (edge_anchors[e].size() < 2)
      fail(Errc::EmptyBatch, "sampled node set needs >= 2 members");
    acc += infonce_group(edge_anchors[e], edge_augmented[e], tau);
  }
  return acc / static_cast<double>(edge_anchors.size());
}

double pretrain_objective(double loss_p, double loss_intra, double loss_inter,
                          const PretrainConfig& cfg) {
  if (!cfg.hscl_enabled) return loss_p;
  return loss_p + cfg.beta1_intra * loss_intra + cfg.beta2_inter * loss_inter;
}

EpochBatch make_epoch_batch(const Hypergraph& g, const PretrainConfig& cfg, int epoch) {
  EpochBatch batch;
  const auto eligible = eligible_edges(g);
  if (eligible.empty())
    fail(Errc::NoEligibleEdge, "no hyperedge with >= 2 members and an outside node");

  // Resampling on IMP isolation only makes sense when some eligible edge
  // offers a positive that survives the perturbation.
  bool deep_positive_exists = false;
  if (cfg.imp_enabled) {
    for (uint32_t e : eligible) {
      for (uint32_t x : g.members_of(e))
        if (g.node_degree(x) >= 2) {
          deep_positive_exists = true;
          break;
        }
      if (deep_positive_exists) break;
    }
  }

  KeyedRng rng_triples(cfg.seed, "triples", static_cast<uint64_t>(epoch));
  batch.triples.reserve(cfg.batch_size);
  for (int i = 0; i < cfg.batch_size; ++i) {
    Triple t = sample_one(g, eligible, rng_triples);
    if (cfg.imp_enabled && deep_positive_exists) {
      int attempts = 0;
      while (g.node_degree(t.positive) < 2 && ++attempts < 200)
        t = sample_one(g, eligible, rng_triples);
    }
    batch.triples.push_back(t);
  }

  if (cfg.np_enabled) {
    KeyedRng rng_noise(cfg.seed, "noise", static_cast<uint64_t>(epoch));
    batch.noise.reserve(batch.triples.size());
    for (size_t i = 0; i < batch.triples.size(); ++i) {
      Eigen::RowVectorXd z(cfg.dim);
      for (int j = 0; j < cfg.dim; ++j) z(j) = rng_noise.next_normal();
      batch.noise.push_back(std::move(z));
    }
  }

  if (cfg.hscl_enabled) {
    KeyedRng rng_intra(cfg.seed, "intra", static_cast<uint64_t>(epoch));
    std::vector<bool> seen(g.edge_count(), false);
    for (const Triple& t : batch.triples) {
      if (seen[t.edge]) continue;
      seen[t.edge] = true;
      batch.intra_edges.push_back(t.edge);
      auto members = g.members_of(t.edge);
      std::vector<uint32_t> pool(members.begin(), members.end());
      const size_t k_eff = std::min<size_t>(cfg.k_intra, pool.size());
      for (size_t i = 0; i < k_eff; ++i)
        std::swap(pool[i], pool[i + rng_intra.next_below(pool.size() - i)]);
      pool.resize(k_eff);
      std::vector<Eigen::RowVectorXd> zs;
      if (cfg.np_enabled) {
        zs.reserve(k_eff);
        for (size_t i = 0; i < k_eff; ++i) {
          Eigen::RowVectorXd z(cfg.dim);
          for (int j = 0; j < cfg.dim; ++j) z(j) = rng_intra.next_normal();
          zs.push_back(std::move(z));
        }
      }
      batch.intra_members.push_back(std::move(pool));
      batch.intra_noise.push_back(std::move(zs));
    }
  }
  return batch;
}

namespace {

/// Lazily materializes the propagation graph referenced by a batch on
/// the tape: edge means, projected edge rows, node means, and the
/// single-removal IMP rows.
class ObjectiveBuilder {
 public:
  ObjectiveBuilder(ad::Tape& tape, const Hypergraph& g, const PretrainConfig& cfg, int theta_pid,
                   int w_pid)
      : tape_(tape), g_(g), cfg_(cfg), theta_pid_(theta_pid), w_pid_(w_pid),
        edge_vars_(g.edge_count()), edge_proj_vars_(g.edge_count()), node_vars_(g.node_count()) {}

  ad::Var edge_var(uint32_t e) {
    if (!edge_vars_[e].valid()) {
      auto members = g_.members_of(e);
      std::vector<ad::Var> rows;
      rows.reserve(members.size());
      for (uint32_t x : members) rows.push_back(tape_.param_row(theta_pid_, x));
      edge_vars_[e] = tape_.mean_of(rows);
    }
    return edge_vars_[e];
  }

  ad::Var edge_proj_var(uint32_t e) {
    if (!edge_proj_vars_[e].valid()) edge_proj_vars_[e] = tape_.matmul(edge_var(e), w_pid_);
    return edge_proj_vars_[e];
  }

  ad::Var node_var(uint32_t x) {
    if (!node_vars_[x].valid()) {
      auto edges = g_.edges_of(x);
      if (edges.empty())
        fail(Errc::EmptyInput, "node " + std::to_string(x) + " has degree 0");
      std::vector<ad::Var> rows;
      rows.reserve(edges.size());
      for (uint32_t e : edges) rows.push_back(edge_var(e));
      node_vars_[x] = tape_.mean_of(rows);
    }
    return node_vars_[x];
  }

  /// IMP row for (x, e): mean over surviving edges of the projected edge
  /// rows. Invalid when the removal isolates the node.
  ad::Var imp_var(uint32_t x, uint32_t e) {
    auto edges = g_.edges_of(x);
    std::vector<ad::Var> rows;
    rows.reserve(edges.size());
    for (uint32_t other : edges) {
      if (other == e) continue;
      rows.push_back(edge_proj_var(other));
    }
    if (rows.empty()) return ad::Var{};
    return tape_.mean_of(rows);
  }

  /// Corrupted positive (Eq.-4 form) honoring toggles; the IMP term
  /// vanishes when the removal isolates the node.
  ad::Var corrupted_var(const Triple& t, const Eigen::RowVectorXd* noise) {
    ad::Var base = node_var(t.positive);
    ad::Var xg = (cfg_.np_enabled && noise != nullptr)
                     ? tape_.shift(base, std::sqrt(cfg_.lambda) * (*noise))
                     : base;
    if (!cfg_.imp_enabled) return xg;
    ad::Var xa = imp_var(t.positive, t.edge);
    return xa.valid() ? tape_.add(xg, xa) : xg;
  }

  /// HSCL augmented view for node x conditioned on edge e. Falls back
  /// to the Gaussian view, then to the plain embedding, when the
  /// incidence perturbation would isolate the node.
  ad::Var augmented_var(uint32_t x, uint32_t e, const Eigen::RowVectorXd* noise) {
    if (cfg_.imp_enabled) {
      ad::Var xa = imp_var(x, e);
      if (xa.valid()) return xa;
    }
    if (cfg_.np_enabled && noise != nullptr)
      return tape_.shift(node_var(x), std::sqrt(cfg_.lambda) * (*noise));
    return node_var(x);
  }

  struct Roots {
    ad::Sc hyperlink, intra, inter, total;
    EpochLoss values;
  };

  Roots build(const EpochBatch& batch) {
    Roots roots;

    // Hyperlink prediction over the triple batch.
    std::vector<ad::Sc> terms;
    terms.reserve(batch.triples.size());
    std::vector<ad::Var> corrupted;
    corrupted.reserve(batch.triples.size());
    for (size_t i = 0; i < batch.triples.size(); ++i) {
      const Triple& t = batch.triples[i];
      const Eigen::RowVectorXd* z = batch.noise.empty() ? nullptr : &batch.noise[i];
      ad::Var xi = node_var(t.anchor);
      ad::Var xk = node_var(t.negative);
      ad::Var xj = corrupted_var(t, z);
      corrupted.push_back(xj);
      ad::Sc diff = tape_.sub_s(tape_.dot(xi, xj), tape_.dot(xi, xk));
      terms.push_back(cfg_.loss_form == LossForm::LogSigmoid ? tape_.log_sigmoid(diff)
                                                             : tape_.sigmoid_s(diff));
    }
    roots.hyperlink = tape_.neg_s(tape_.mean_s(terms));
    roots.values.hyperlink = tape_.value(roots.hyperlink);

    if (cfg_.hscl_enabled) {
      // Inter: distinct positives of the batch, first occurrence wins.
      std::vector<ad::Var> anchors, augmented;
      std::vector<bool> seen(g_.node_count(), false);
      for (size_t i = 0; i < batch.triples.size(); ++i) {
        const Triple& t = batch.triples[i];
        if (seen[t.positive]) continue;
        seen[t.positive] = true;
        const Eigen::RowVectorXd* z = batch.noise.empty() ? nullptr : &batch.noise[i];
        anchors.push_back(node_var(t.positive));
        augmented.push_back(augmented_var(t.positive, t.edge, z));
      }
      roots.inter = tape_.infonce(anchors, augmented, cfg_.tau);
      roots.values.inter = tape_.value(roots.inter);

      // Intra: per distinct edge, the sampled member set.
      std::vector<ad::Sc> per_edge;
      per_edge.reserve(batch.intra_edges.size());
      for (size_t k = 0; k < batch.intra_edges.size(); ++k) {
        const uint32_t e = batch.intra_edges[k];
        const auto& members = batch.intra_members[k];
        std::vector<ad::Var> a, p;
        a.reserve(members.size());
        p.reserve(members.size());
        for (size_t i = 0; i < members.size(); ++i) {
          const Eigen::RowVectorXd* z =
              batch.intra_noise.empty() || batch.intra_noise[k].empty() ? nullptr
                                                                        : &batch.intra_noise[k][i];
          a.push_back(node_var(members[i]));
          p.push_back(augmented_var(members[i], e, z));
        }
        per_edge.push_back(tape_.infonce(a, p, cfg_.tau));
      }
      roots.intra = tape_.mean_s(per_edge);
      roots.values.intra = tape_.value(roots.intra);

      const std::vector<ad::Sc> parts{roots.hyperlink, roots.intra, roots.inter};
      const std::vector<double> weights{1.0, cfg_.beta1_intra, cfg_.beta2_inter};
      roots.total = tape_.weighted_sum(parts, weights);
    } else {
      roots.intra = tape_.constant_s(0.0);
      roots.inter = tape_.constant_s(0.0);
      roots.total = roots.hyperlink;
    }
    roots.values.total = tape_.value(roots.total);
    return roots;
  }

 private:
  ad::Tape& tape_;
  const Hypergraph& g_;
  const PretrainConfig& cfg_;
  int theta_pid_, w_pid_;
  std::vector<ad::Var> edge_vars_, edge_proj_vars_, node_vars_;
};

}  // namespace

EpochLoss evaluate_objective(const Hypergraph& g, const PretrainConfig& cfg,
                             const Eigen::MatrixXd& theta, const Eigen::MatrixXd& w,
                             const EpochBatch& batch) {
  ad::Params reg;
  const int theta_pid = reg.add("theta", theta);
  const int w_pid = reg.add("w", w);
  ad::Tape tape(reg);
  ObjectiveBuilder builder(tape, g, cfg, theta_pid, w_pid);
  return builder.build(batch).values;
}

ObjectiveGradients objective_gradients(const Hypergraph& g, const PretrainConfig& cfg,
                                       const Eigen::MatrixXd& theta, const Eigen::MatrixXd& w,
                                       const EpochBatch& batch, int component) {
  ad::Params reg;
  const int theta_pid = reg.add("theta", theta);
  const int w_pid = reg.add("w", w);
  ad::Tape tape(reg);
  ObjectiveBuilder builder(tape, g, cfg, theta_pid, w_pid);
  auto roots = builder.build(batch);
  ad::Sc root = component == 0   ? roots.hyperlink
                : component == 1 ? roots.intra
                : component == 2 ? roots.inter
                                 : roots.total;
  tape.backward(root);
  if (!reg.grads_finite()) fail(Errc::NonFiniteGradient, "non-finite pre-training gradient");
  return {roots.values, reg.grad(theta_pid), reg.grad(w_pid)};
}

PretrainResult run_pretraining(const Hypergraph& g, const PretrainConfig& cfg) {
  cfg.validate();
  if (g.edge_count() == 0) fail(Errc::EmptyHypergraph, "hypergraph has no hyperedges");

  ParamStore p = ParamStore::init(g.node_count(), cfg.dim, cfg.seed);
  ad::Params reg;
  const int theta_pid = reg.add("theta", p.theta);
  const int w_pid = reg.add("w", p.w);
  AdamState adam;

  PretrainResult result;
  result.history.reserve(cfg.epochs);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const EpochBatch batch = make_epoch_batch(g, cfg, epoch);
    ad::Tape tape(reg);
    ObjectiveBuilder builder(tape, g, cfg, theta_pid, w_pid);
    auto roots = builder.build(batch);
    result.history.push_back(roots.values);
    tape.backward(roots.total);
    if (!reg.grads_finite()) fail(Errc::NonFiniteGradient, "non-finite pre-training gradient");
    adam.step({&reg.value(theta_pid), &reg.value(w_pid)},
              {&reg.grad(theta_pid), &reg.grad(w_pid)}, cfg.learning_rate);
    reg.zero_grads();
  }

  p.theta = reg.value(theta_pid);
  p.w = reg.value(w_pid);
  result.params = std::move(p);
  result.edge_embeddings = encode_edges(g, result.params.theta);
  result.node_embeddings = encode_nodes(g, result.edge_embeddings);
  return result;
}

}  // namespace genet
