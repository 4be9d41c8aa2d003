#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "genet/eval.hpp"
#include "genet/finetune.hpp"
#include "genet/pretrain.hpp"

namespace genet {

/// Flat configuration for the CLI commands; a key=value config file and
/// command-line flags write into the same fields.
struct RunConfig {
  std::filesystem::path out_dir = ".";
  std::filesystem::path graph_dir;  // defaults to out_dir when empty

  // dataset inputs (empty = recipe disabled)
  std::filesystem::path social_path;
  std::filesystem::path poi_path;
  std::filesystem::path reviews_path;
  std::filesystem::path item_meta_path;
  std::filesystem::path interactions_path;

  // construction parameters
  int kmeans_k = 0;  // 0 = ceil(sqrt(#POIs))
  double rating_threshold = 4.0;
  int min_reviews = 2;

  PretrainConfig pretrain;
  FinetuneConfig finetune;
  Task task = Task::TopN;
  EvalMode mode = EvalMode::FullRanking;
  int sampled_negatives = 99;
  std::string cold_start;  // "", "users" or "items"
  uint64_t seed = 1;

  std::filesystem::path graph_file() const { return dir_or_out() / "graph.tsv"; }
  std::filesystem::path idmap_file() const { return dir_or_out() / "idmap.tsv"; }
  std::filesystem::path dir_or_out() const { return graph_dir.empty() ? out_dir : graph_dir; }

  /// Pushes the master seed into the stage configs.
  void propagate_seed() {
    pretrain.seed = seed;
    finetune.seed = seed;
  }
};

/// key=value lines; '#' comments. Unknown keys are rejected.
void apply_config_file(const std::filesystem::path& path, RunConfig& cfg);

struct BuildSummary {
  size_t users = 0;
  size_t items = 0;
  size_t edges = 0;
  std::map<std::string, size_t> edges_per_tag;
};

/// Compiles the enabled side-information inputs into a hypergraph and
/// writes graph.tsv + idmap.tsv into the output directory.
BuildSummary cmd_build(const RunConfig& cfg);

/// Pre-trains on the built hypergraph; writes nodes.gnet, edges.gnet,
/// theta.gnet, w.gnet, nodes.tsv and pretrain_loss.tsv.
PretrainResult cmd_pretrain(const RunConfig& cfg);

/// Fine-tunes for cfg.task from the pre-training dumps; writes
/// <task>_users.gnet, <task>_items.gnet, <task>_loss.tsv and, for the
/// sequential task, <task>_gru.gnet.
FinetuneResult cmd_finetune(const RunConfig& cfg);

/// Evaluates the fine-tuned dumps under the configured split.
MetricReport cmd_eval(const RunConfig& cfg);

/// Writes synthetic dataset files. kind: planted | blobs | feedback.
struct GenParams {
  std::string kind = "planted";
  int edges = 10;
  int edge_size = 10;
  int clusters = 2;
  int points_per_cluster = 20;
  double separation = 10.0;
  double radius = 0.5;
  int users = 500;
  int items = 200;
  int communities = 10;
  int per_user = 8;
  double within_rate = 0.9;
};
void cmd_gen(const RunConfig& cfg, const GenParams& params);

}  // namespace genet
