#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "genet/encoder.hpp"
#include "genet/finetune.hpp"
#include "genet/hypergraph.hpp"

namespace genet {

enum class EvalMode : uint8_t { FullRanking, SampledNegatives };

/// One ranking instance: the held-out target for a user, with the
/// user's chronological training items (for candidate exclusion and the
/// sequential prefix). Ids are global node indices as in the log.
struct TestInstance {
  uint32_t user = 0;
  uint32_t target = 0;
  std::vector<uint32_t> train_items;  // chronological
};

struct SplitSpec {
  InteractionLog train;                // chronological per user
  std::vector<TestInstance> test;
  std::vector<InteractionRecord> validation;
  EvalMode mode = EvalMode::FullRanking;
  int sampled_negatives = 99;
};

/// Leave-one-out: per user the last interaction is the test target and
/// the second-to-last is validation; users with fewer than three
/// interactions keep everything in train and are excluded from test.
/// Ties in timestamp break by record order.
SplitSpec leave_one_out_split(const InteractionLog& log, EvalMode mode = EvalMode::FullRanking,
                              int sampled_negatives = 99);

/// Bottom-ceil(1%)-by-interaction-count cohort splits: the cold cohort
/// is removed from training entirely and forms the whole test set.
/// Ties in count break by id.
struct ColdStartSplits {
  SplitSpec user_cold;
  SplitSpec item_cold;
  std::vector<uint32_t> cold_users;
  std::vector<uint32_t> cold_items;
};
ColdStartSplits cold_start_splits(const InteractionLog& log, size_t user_count, size_t item_count,
                                  uint64_t seed = 0);

/// Rank of the target among candidates by descending inner product;
/// ties break toward the lower item index. Candidates are the whole
/// catalog minus the user's training items, or target + n sampled
/// non-interacted negatives. item_base maps global item ids to rows of
/// the item matrix (global id - item_base).
int rank_target(const TestInstance& inst, const Eigen::RowVectorXd& user_vec,
                const EmbeddingMatrix& items, size_t item_base, EvalMode mode,
                int sampled_negatives, uint64_t seed);

struct MetricReport {
  double recall10 = 0.0, recall20 = 0.0;
  double ndcg10 = 0.0, ndcg20 = 0.0;
  size_t user_count = 0;
  std::string task;
};

/// recall@K = fraction of targets ranked <= K; ndcg@K uses the
/// single-target gain 1/log2(rank + 1).
MetricReport compute_metrics(const std::vector<int>& ranks);

/// Scores every test instance and aggregates. For Task::Sequential the
/// user vector is the propagated row plus the GRU hidden state over the
/// training prefix (last seq_len items).
MetricReport evaluate_split(Task task, const SplitSpec& split, const EmbeddingMatrix& users,
                            const EmbeddingMatrix& items, size_t item_base, const GruParams* gru,
                            int seq_len, uint64_t seed = 0);

}  // namespace genet
