#include "genet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "genet/parallel.hpp"
#include "genet/rng.hpp"

namespace genet {

namespace {

/// Per-user records in chronological order (timestamp, then record order).
std::map<uint32_t, std::vector<InteractionRecord>> by_user_chronological(
    const InteractionLog& log) {
  std::map<uint32_t, std::vector<InteractionRecord>> users;
  for (const InteractionRecord& r : log) users[r.user].push_back(r);
  for (auto& [u, records] : users)
    std::stable_sort(records.begin(), records.end(),
                     [](const InteractionRecord& a, const InteractionRecord& b) {
                       return a.timestamp < b.timestamp;
                     });
  return users;
}

}  // namespace

SplitSpec leave_one_out_split(const InteractionLog& log, EvalMode mode, int sampled_negatives) {
  if (log.empty()) fail(Errc::EmptyLog, "no interactions to split");
  SplitSpec split;
  split.mode = mode;
  split.sampled_negatives = sampled_negatives;
  for (auto& [user, records] : by_user_chronological(log)) {
    if (records.size() < 3) {
      // Too short to evaluate: everything stays in train.
      split.train.insert(split.train.end(), records.begin(), records.end());
      continue;
    }
    TestInstance inst;
    inst.user = user;
    inst.target = records.back().item;
    for (size_t i = 0; i + 2 < records.size(); ++i) {
      split.train.push_back(records[i]);
      inst.train_items.push_back(records[i].item);
    }
    split.validation.push_back(records[records.size() - 2]);
    split.test.push_back(std::move(inst));
  }
  return split;
}

ColdStartSplits cold_start_splits(const InteractionLog& log, size_t user_count, size_t item_count,
                                  uint64_t /*seed*/) {
  if (log.empty()) fail(Errc::EmptyLog, "no interactions to split");
  ColdStartSplits out;

  auto pick_cold = [](const std::map<uint32_t, size_t>& counts) {
    std::vector<std::pair<size_t, uint32_t>> order;  // (count, id)
    order.reserve(counts.size());
    for (const auto& [id, c] : counts) order.emplace_back(c, id);
    std::sort(order.begin(), order.end());
    const size_t n_cold =
        static_cast<size_t>(std::ceil(0.01 * static_cast<double>(order.size())));
    std::vector<uint32_t> cold;
    cold.reserve(n_cold);
    for (size_t i = 0; i < n_cold && i < order.size(); ++i) cold.push_back(order[i].second);
    std::sort(cold.begin(), cold.end());
    return cold;
  };

  std::map<uint32_t, size_t> user_counts, item_counts;
  for (const InteractionRecord& r : log) {
    ++user_counts[r.user];
    ++item_counts[r.item];
  }
  out.cold_users = pick_cold(user_counts);
  out.cold_items = pick_cold(item_counts);

  const auto chronological = by_user_chronological(log);

  // User cold-start: the cohort is removed from training entirely and
  // forms the whole test set, one instance per user on the last
  // interaction.
  {
    SplitSpec& s = out.user_cold;
    std::unordered_set<uint32_t> cold(out.cold_users.begin(), out.cold_users.end());
    for (const auto& [user, records] : chronological) {
      if (cold.count(user)) {
        TestInstance inst;
        inst.user = user;
        inst.target = records.back().item;
        s.test.push_back(std::move(inst));
      } else {
        s.train.insert(s.train.end(), records.begin(), records.end());
      }
    }
  }

  // Item cold-start, in the same manner: every interaction touching a
  // cold item leaves training; each (user, cold item) pair becomes a
  // test instance.
  {
    SplitSpec& s = out.item_cold;
    std::unordered_set<uint32_t> cold(out.cold_items.begin(), out.cold_items.end());
    for (const auto& [user, records] : chronological) {
      std::vector<uint32_t> kept;
      std::unordered_set<uint32_t> cold_targets;
      for (const InteractionRecord& r : records) {
        if (cold.count(r.item)) {
          cold_targets.insert(r.item);
        } else {
          s.train.push_back(r);
          kept.push_back(r.item);
        }
      }
      for (uint32_t target : cold_targets) {
        TestInstance inst;
        inst.user = user;
        inst.target = target;
        inst.train_items = kept;
        s.test.push_back(std::move(inst));
      }
    }
  }

  (void)user_count;
  (void)item_count;
  return out;
}

int rank_target(const TestInstance& inst, const Eigen::RowVectorXd& user_vec,
                const EmbeddingMatrix& items, size_t item_base, EvalMode mode,
                int sampled_negatives, uint64_t seed) {
  const size_t item_count = items.rows();
  if (inst.target < item_base || inst.target - item_base >= item_count)
    fail(Errc::UnknownItem, "target item out of range");
  const uint32_t target = static_cast<uint32_t>(inst.target - item_base);
  std::unordered_set<uint32_t> trained;
  for (uint32_t g : inst.train_items) trained.insert(static_cast<uint32_t>(g - item_base));

  const double target_score = user_vec.dot(items.row(target));
  auto beats_target = [&](uint32_t cand) {
    const double s = user_vec.dot(items.row(cand));
    return s > target_score || (s == target_score && cand < target);
  };

  int rank = 1;
  if (mode == EvalMode::FullRanking) {
    for (uint32_t cand = 0; cand < item_count; ++cand) {
      if (cand == target || trained.count(cand)) continue;
      if (beats_target(cand)) ++rank;
    }
    return rank;
  }

  // Sampled candidates: target + n distinct non-trained negatives.
  KeyedRng rng(seed, "rank-negatives", inst.user);
  std::unordered_set<uint32_t> sampled;
  const size_t available = item_count - std::min(item_count, trained.size() + 1);
  const size_t want = std::min<size_t>(sampled_negatives, available);
  while (sampled.size() < want) {
    const uint32_t cand = static_cast<uint32_t>(rng.next_below(item_count));
    if (cand == target || trained.count(cand)) continue;
    sampled.insert(cand);
  }
  for (uint32_t cand : sampled)
    if (beats_target(cand)) ++rank;
  return rank;
}

MetricReport compute_metrics(const std::vector<int>& ranks) {
  if (ranks.empty()) fail(Errc::EmptyInput, "no ranks to aggregate");
  MetricReport report;
  report.user_count = ranks.size();
  for (int rank : ranks) {
    if (rank < 1) fail(Errc::EmptyInput, "ranks are 1-based");
    const double gain = 1.0 / std::log2(static_cast<double>(rank) + 1.0);
    if (rank <= 10) {
      report.recall10 += 1.0;
      report.ndcg10 += gain;
    }
    if (rank <= 20) {
      report.recall20 += 1.0;
      report.ndcg20 += gain;
    }
  }
  const double n = static_cast<double>(ranks.size());
  report.recall10 /= n;
  report.recall20 /= n;
  report.ndcg10 /= n;
  report.ndcg20 /= n;
  return report;
}

MetricReport evaluate_split(Task task, const SplitSpec& split, const EmbeddingMatrix& users,
                            const EmbeddingMatrix& items, size_t item_base, const GruParams* gru,
                            int seq_len, uint64_t seed) {
  if (split.test.empty()) fail(Errc::EmptyInput, "empty test set");
  std::vector<int> ranks(split.test.size());
  parallel_for(split.test.size(), [&](size_t idx) {
    const TestInstance& inst = split.test[idx];
    Eigen::RowVectorXd user_vec = users.row(inst.user);
    if (task == Task::Sequential && gru != nullptr && !inst.train_items.empty()) {
      const size_t end = inst.train_items.size();
      const size_t start = end > static_cast<size_t>(seq_len) ? end - seq_len : 0;
      std::vector<Eigen::RowVectorXd> seq;
      seq.reserve(end - start);
      for (size_t p = start; p < end; ++p)
        seq.push_back(items.row(inst.train_items[p] - item_base));
      user_vec += gru_forward(*gru, seq);
    }
    ranks[idx] =
        rank_target(inst, user_vec, items, item_base, split.mode, split.sampled_negatives, seed);
  });
  MetricReport report = compute_metrics(ranks);
  report.task = task == Task::TopN ? "topn" : "seq";
  return report;
}

}  // namespace genet
