#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "genet/encoder.hpp"
#include "genet/hypergraph.hpp"
#include "genet/rng.hpp"

namespace genet {

/// Hyperlink-prediction sample: anchor and positive share the edge,
/// the negative is not incident with it.
struct Triple {
  uint32_t edge = 0;
  uint32_t anchor = 0;
  uint32_t positive = 0;
  uint32_t negative = 0;
};

enum class LossForm : uint8_t {
  LogSigmoid,  // -log sigmoid(diff), standard BPR
  RawSigmoid,  // -sigmoid(diff), the literal printed form
};

struct PretrainConfig {
  int dim = 64;
  int batch_size = 4096;
  double learning_rate = 0.0005;
  int epochs = 500;
  double lambda = 0.1;        // noise covariance scalar
  double beta1_intra = 0.005;
  double beta2_inter = 0.01;
  double tau = 0.2;
  int k_intra = 8;            // nodes sampled per hyperedge
  LossForm loss_form = LossForm::LogSigmoid;
  bool np_enabled = true;
  bool imp_enabled = true;
  bool hscl_enabled = true;
  uint64_t seed = 1;

  void validate() const;
};

/// Uniform over eligible edges (>= 2 members, >= 1 outside node), then a
/// uniform ordered distinct (anchor, positive) pair within the edge and a
/// uniform non-member negative (rejection sampled).
std::vector<Triple> sample_triples(const Hypergraph& g, int count, KeyedRng& rng);

/// Gaussian corruption with covariance lambda * I: x + sqrt(lambda) * z.
Eigen::RowVectorXd node_perturb(const Eigen::RowVectorXd& x, double lambda, KeyedRng& rng);

struct CorruptionToggles {
  bool np = true;
  bool imp = true;
};

/// Corrupted positive representation: the Gaussian-perturbed embedding
/// plus the incidence-perturbed propagation, honoring toggles. The
/// Gaussian draw is passed in explicitly so re-evaluation is exact.
Eigen::RowVectorXd corrupt_positive(const Hypergraph& g, const EmbeddingMatrix& edge_embeddings,
                                    const EmbeddingMatrix& X, const Eigen::MatrixXd& w,
                                    const Triple& t, double lambda,
                                    const Eigen::RowVectorXd& noise, CorruptionToggles toggles);

/// Ranking loss over triples given anchor/negative rows of X and the
/// corrupted positives, mean over the batch.
double hyperlink_loss(const std::vector<Triple>& triples, const EmbeddingMatrix& X,
                      const std::vector<Eigen::RowVectorXd>& corrupted, LossForm form);

/// InfoNCE with cosine similarity. For anchor i the positive logit is
/// sim(anchor_i, augmented_i)/tau; negatives are the other anchors of
/// the batch. The self term is excluded, the positive included.
double inter_contrastive_loss(const std::vector<Eigen::RowVectorXd>& anchors,
                              const std::vector<Eigen::RowVectorXd>& augmented, double tau);

/// Same softmax form per hyperedge over its sampled node set; the
/// result is the mean over edges of the per-edge anchor means.
double intra_contrastive_loss(const std::vector<std::vector<Eigen::RowVectorXd>>& edge_anchors,
                              const std::vector<std::vector<Eigen::RowVectorXd>>& edge_augmented,
                              double tau);

/// Weighted pre-training objective. HSCL disabled drops the beta terms.
double pretrain_objective(double loss_p, double loss_intra, double loss_inter,
                          const PretrainConfig& cfg);

struct EpochLoss {
  double hyperlink = 0.0;
  double intra = 0.0;
  double inter = 0.0;
  double total = 0.0;
};

struct PretrainResult {
  ParamStore params;               // trained theta and w
  EmbeddingMatrix node_embeddings; // final X
  EmbeddingMatrix edge_embeddings; // final E
  std::vector<EpochLoss> history;
};

/// Everything one epoch consumes: the sampled triples, the per-triple
/// Gaussian draws (reparameterized constants), and the intra-hyperedge
/// sample sets with their fallback draws. Fixing the batch makes the
/// objective a pure function of (theta, w).
struct EpochBatch {
  std::vector<Triple> triples;
  std::vector<Eigen::RowVectorXd> noise;               // one per triple when NP is on
  std::vector<uint32_t> intra_edges;                   // distinct triple edges, first seen
  std::vector<std::vector<uint32_t>> intra_members;    // sampled per edge
  std::vector<std::vector<Eigen::RowVectorXd>> intra_noise;
};

/// Deterministic batch for the given epoch index.
EpochBatch make_epoch_batch(const Hypergraph& g, const PretrainConfig& cfg, int epoch);

/// Combined objective value at the given parameters over a fixed batch.
EpochLoss evaluate_objective(const Hypergraph& g, const PretrainConfig& cfg,
                             const Eigen::MatrixXd& theta, const Eigen::MatrixXd& w,
                             const EpochBatch& batch);

struct ObjectiveGradients {
  EpochLoss values;
  Eigen::MatrixXd theta_grad;
  Eigen::MatrixXd w_grad;
};

/// Gradient of one objective component over a fixed batch.
/// component: 0 = hyperlink, 1 = intra, 2 = inter, 3 = total.
ObjectiveGradients objective_gradients(const Hypergraph& g, const PretrainConfig& cfg,
                                       const Eigen::MatrixXd& theta, const Eigen::MatrixXd& w,
                                       const EpochBatch& batch, int component = 3);

/// Full pre-training loop: one triple batch + HSCL batches per epoch,
/// one Adam step per epoch. Deterministic per config seed.
PretrainResult run_pretraining(const Hypergraph& g, const PretrainConfig& cfg);

}  // namespace genet
