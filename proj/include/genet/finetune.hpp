#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "genet/ad.hpp"
#include "genet/encoder.hpp"
#include "genet/hypergraph.hpp"
#include "genet/pretrain.hpp"

namespace genet {

enum class Task : uint8_t { TopN, Sequential };

/// User-item adjacency from training interactions, deduplicated.
class BipartiteGraph {
 public:
  static BipartiteGraph build(const InteractionLog& log, size_t user_count, size_t item_count);

  size_t user_count() const { return user_items_.size(); }
  size_t item_count() const { return item_users_.size(); }
  const std::vector<uint32_t>& items_of(uint32_t user) const { return user_items_[user]; }
  const std::vector<uint32_t>& users_of(uint32_t item) const { return item_users_[item]; }
  size_t user_degree(uint32_t user) const { return user_items_[user].size(); }
  size_t item_degree(uint32_t item) const { return item_users_[item].size(); }

 private:
  std::vector<std::vector<uint32_t>> user_items_;
  std::vector<std::vector<uint32_t>> item_users_;
};

/// Symmetric-normalized propagation with layer averaging. Rows of the
/// inputs are layer 0; isolated nodes bypass propagation and keep their
/// layer-0 row. Returns (user matrix, item matrix).
std::pair<EmbeddingMatrix, EmbeddingMatrix> lightgcn_propagate(const BipartiteGraph& A,
                                                               const EmbeddingMatrix& users0,
                                                               const EmbeddingMatrix& items0,
                                                               int layers);

struct BprSample {
  uint32_t user = 0;
  uint32_t pos = 0;
  uint32_t neg = 0;
};

/// Pairwise ranking loss, mean over the batch.
double topn_loss(const std::vector<BprSample>& batch, const EmbeddingMatrix& users,
                 const EmbeddingMatrix& items, LossForm form = LossForm::LogSigmoid);

/// Gated recurrent unit parameters; hidden size equals the embedding
/// dimension.
struct GruParams {
  Eigen::MatrixXd wz, uz, wr, ur, wh, uh;  // d x d each
  Eigen::RowVectorXd bz, br, bh;           // d each

  static GruParams init(int dim, uint64_t seed);
  static GruParams zero(int dim);
};

/// Standard GRU recurrence over a sequence of item vectors, h0 = 0;
/// returns the hidden state at the final position.
Eigen::RowVectorXd gru_forward(const GruParams& p, const std::vector<Eigen::RowVectorXd>& seq);

/// Short- plus long-term user representation.
inline Eigen::RowVectorXd seq_user_representation(const Eigen::RowVectorXd& user_long,
                                                  const Eigen::RowVectorXd& hidden) {
  if (user_long.size() != hidden.size()) fail(Errc::DimensionMismatch, "vector sizes differ");
  return user_long + hidden;
}

struct SeqSample {
  uint32_t user = 0;
  std::vector<uint32_t> prefix;  // most recent items, oldest first
  uint32_t pos = 0;
  uint32_t neg = 0;
};

/// Sequential ranking loss: BPR on (long + short term) user vectors.
double seq_loss(const std::vector<SeqSample>& batch, const EmbeddingMatrix& users,
                const EmbeddingMatrix& items, const GruParams& gru,
                LossForm form = LossForm::LogSigmoid);

struct FinetuneConfig {
  int epochs = 10;
  double learning_rate = 0.0005;
  int warm_epochs = 3;   // amplified learning rate for the first epochs
  double warm_factor = 10.0;
  int lightgcn_layers = 2;
  int seq_len = 20;
  LossForm loss_form = LossForm::LogSigmoid;
  uint64_t seed = 1;

  void validate() const;
};

struct FinetuneResult {
  EmbeddingMatrix user_embeddings;  // propagated, after training
  EmbeddingMatrix item_embeddings;
  GruParams gru;                    // meaningful for Task::Sequential
  std::vector<double> history;      // per-epoch training loss
  EmbeddingMatrix table;            // trained node table (users then items)
};

/// Fixed per-epoch samples, in local user/item indices. Sequential
/// prefixes are already truncated to the window.
struct FinetuneBatch {
  std::vector<BprSample> topn;
  std::vector<SeqSample> seq;
};

/// Loss of one batch at the given table (and GRU) values, through the
/// LightGCN propagation. Pure in its inputs; the finite-difference
/// checks re-evaluate it at perturbed parameters.
double evaluate_finetune_loss(Task task, const BipartiteGraph& A, const Eigen::MatrixXd& table,
                              const GruParams* gru, const FinetuneBatch& batch,
                              const FinetuneConfig& cfg);

struct FinetuneGradients {
  double loss = 0.0;
  Eigen::MatrixXd table_grad;
  GruParams gru_grad;  // zero matrices for Task::TopN
};

FinetuneGradients finetune_gradients(Task task, const BipartiteGraph& A,
                                     const Eigen::MatrixXd& table, const GruParams* gru,
                                     const FinetuneBatch& batch, const FinetuneConfig& cfg);

/// Fine-tunes the node table (initialized from the Eq.-9-updated
/// embeddings) under LightGCN propagation with a BPR objective; the
/// sequential task additionally trains a GRU head. w and E stay frozen.
FinetuneResult run_finetune(Task task, const Hypergraph& g_side, const PretrainResult& pre,
                            const InteractionLog& train, size_t user_count, size_t item_count,
                            const FinetuneConfig& cfg);

/// Tape building blocks shared with the gradient checks.
struct GruPids {
  int wz, uz, wr, ur, wh, uh, bz, br, bh;
};
GruPids register_gru(ad::Params& params, const GruParams& init);
GruParams gru_from_params(const ad::Params& params, const GruPids& pids);
ad::Var gru_forward_tape(ad::Tape& tape, const GruPids& pids,
                         const std::vector<ad::Var>& inputs);

}  // namespace genet
