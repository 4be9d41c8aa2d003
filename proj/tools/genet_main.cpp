#include <CLI11.hpp>
#include <iostream>

#include "genet/commands.hpp"

namespace {

using genet::RunConfig;

void add_common_flags(CLI::App* cmd, RunConfig& cfg, std::string& config_path) {
  cmd->add_option("--config", config_path, "key=value config file, overridden by flags");
  cmd->add_option("--out", cfg.out_dir, "output directory");
  cmd->add_option("--graph-dir", cfg.graph_dir, "directory holding graph.tsv/idmap.tsv");
  cmd->add_option("--seed", cfg.seed, "master random seed");
}

void add_model_flags(CLI::App* cmd, RunConfig& cfg, std::string& task, std::string& loss_form) {
  cmd->add_option("--embedding-dim", cfg.pretrain.dim, "embedding size d");
  cmd->add_option("--lambda", cfg.pretrain.lambda, "noise covariance scalar");
  cmd->add_option("--beta1", cfg.pretrain.beta1_intra, "intra-contrastive weight");
  cmd->add_option("--beta2", cfg.pretrain.beta2_inter, "inter-contrastive weight");
  cmd->add_option("--tau", cfg.pretrain.tau, "contrastive temperature");
  cmd->add_option("--k-intra", cfg.pretrain.k_intra, "nodes sampled per hyperedge");
  cmd->add_option("--batch-size", cfg.pretrain.batch_size, "triples per epoch");
  cmd->add_option("--task", task, "topn or seq");
  cmd->add_option("--loss-form", loss_form, "logsigmoid or rawsigmoid");
  cmd->add_flag("!--no-np", cfg.pretrain.np_enabled, "disable node perturbation");
  cmd->add_flag("!--no-imp", cfg.pretrain.imp_enabled, "disable incidence perturbation");
  cmd->add_flag("!--no-hscl", cfg.pretrain.hscl_enabled, "disable the contrastive losses");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GENET: hypergraph pre-training on side information for recommendation"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path, task = "topn", loss_form = "logsigmoid", mode = "full";
  genet::GenParams gen_params;
  int pretrain_epochs = -1, finetune_epochs = -1;

  CLI::App* build = app.add_subcommand("build", "compile side information into a hypergraph");
  add_common_flags(build, cfg, config_path);
  build->add_option("--social", cfg.social_path, "social.tsv");
  build->add_option("--poi", cfg.poi_path, "poi.tsv");
  build->add_option("--reviews", cfg.reviews_path, "reviews.tsv");
  build->add_option("--item-meta", cfg.item_meta_path, "item_meta.tsv");
  build->add_option("--interactions", cfg.interactions_path,
                    "interactions.tsv (registers feedback-only users/items)");
  build->add_option("--kmeans-k", cfg.kmeans_k, "POI clusters (0 = ceil(sqrt(n)))");
  build->add_option("--rating-threshold", cfg.rating_threshold, "fan rating threshold");
  build->add_option("--min-reviews", cfg.min_reviews, "fan minimum review count");

  CLI::App* pretrain = app.add_subcommand("pretrain", "pre-train embeddings on the hypergraph");
  add_common_flags(pretrain, cfg, config_path);
  add_model_flags(pretrain, cfg, task, loss_form);
  pretrain->add_option("--epochs", pretrain_epochs, "pre-training epochs");
  pretrain->add_option("--lr", cfg.pretrain.learning_rate, "learning rate");

  CLI::App* finetune = app.add_subcommand("finetune", "fine-tune on user feedback");
  add_common_flags(finetune, cfg, config_path);
  add_model_flags(finetune, cfg, task, loss_form);
  finetune->add_option("--epochs", finetune_epochs, "fine-tuning epochs");
  finetune->add_option("--lr", cfg.finetune.learning_rate, "learning rate");
  finetune->add_option("--interactions", cfg.interactions_path, "interactions.tsv");
  finetune->add_option("--layers", cfg.finetune.lightgcn_layers, "LightGCN layers");
  finetune->add_option("--seq-len", cfg.finetune.seq_len, "sequence length s");
  finetune->add_option("--warm-epochs", cfg.finetune.warm_epochs, "amplified-lr epochs");
  finetune->add_option("--mode", mode, "full or sampled");
  finetune->add_option("--cold-start", cfg.cold_start, "users or items");

  CLI::App* eval = app.add_subcommand("eval", "rank held-out targets and report metrics");
  add_common_flags(eval, cfg, config_path);
  eval->add_option("--task", task, "topn or seq");
  eval->add_option("--interactions", cfg.interactions_path, "interactions.tsv");
  eval->add_option("--mode", mode, "full or sampled");
  eval->add_option("--negatives", cfg.sampled_negatives, "sampled negatives per user");
  eval->add_option("--cold-start", cfg.cold_start, "users or items");
  eval->add_option("--seq-len", cfg.finetune.seq_len, "sequence length s");

  CLI::App* gen = app.add_subcommand("gen", "generate synthetic dataset files");
  add_common_flags(gen, cfg, config_path);
  gen->add_option("kind", gen_params.kind, "planted | blobs | feedback")->required();
  gen->add_option("--edges", gen_params.edges, "planted: hyperedge count");
  gen->add_option("--size", gen_params.edge_size, "planted: members per hyperedge");
  gen->add_option("--clusters", gen_params.clusters, "blobs: cluster count");
  gen->add_option("--points", gen_params.points_per_cluster, "blobs: points per cluster");
  gen->add_option("--separation", gen_params.separation, "blobs: center spacing");
  gen->add_option("--radius", gen_params.radius, "blobs: blob radius");
  gen->add_option("--users", gen_params.users, "feedback: user count");
  gen->add_option("--items", gen_params.items, "feedback: item count");
  gen->add_option("--communities", gen_params.communities, "feedback: community count");
  gen->add_option("--per-user", gen_params.per_user, "feedback: interactions per user");
  gen->add_option("--within-rate", gen_params.within_rate, "feedback: aligned-community rate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (!config_path.empty()) genet::apply_config_file(config_path, cfg);
    // Flags win over the config file; CLI11 already wrote them into cfg.
    if (pretrain_epochs >= 0) cfg.pretrain.epochs = pretrain_epochs;
    if (finetune_epochs >= 0) cfg.finetune.epochs = finetune_epochs;
    cfg.task = task == "seq" ? genet::Task::Sequential : genet::Task::TopN;
    cfg.mode = mode == "sampled" ? genet::EvalMode::SampledNegatives : genet::EvalMode::FullRanking;
    cfg.pretrain.loss_form =
        loss_form == "rawsigmoid" ? genet::LossForm::RawSigmoid : genet::LossForm::LogSigmoid;
    cfg.finetune.loss_form = cfg.pretrain.loss_form;
    cfg.propagate_seed();
    if (task != "topn" && task != "seq") genet::fail(genet::Errc::ParseError, "bad --task");
    if (mode != "full" && mode != "sampled") genet::fail(genet::Errc::ParseError, "bad --mode");
    if (!cfg.cold_start.empty() && cfg.cold_start != "users" && cfg.cold_start != "items")
      genet::fail(genet::Errc::ParseError, "bad --cold-start");

    if (build->parsed()) {
      const auto summary = genet::cmd_build(cfg);
      std::cout << "hypergraph: " << summary.users << " users, " << summary.items << " items, "
                << summary.edges << " hyperedges\n";
      for (const auto& [tag, count] : summary.edges_per_tag)
        std::cout << "  " << tag << ": " << count << "\n";
    } else if (pretrain->parsed()) {
      const auto result = genet::cmd_pretrain(cfg);
      if (!result.history.empty())
        std::cout << "pretrain: " << result.history.size() << " epochs, objective "
                  << result.history.front().total << " -> " << result.history.back().total << "\n";
      else
        std::cout << "pretrain: 0 epochs (dumps hold the initialization)\n";
    } else if (finetune->parsed()) {
      const auto result = genet::cmd_finetune(cfg);
      if (!result.history.empty())
        std::cout << "finetune[" << task << "]: " << result.history.size() << " epochs, loss "
                  << result.history.front() << " -> " << result.history.back() << "\n";
      else
        std::cout << "finetune[" << task << "]: 0 epochs\n";
    } else if (eval->parsed()) {
      const auto report = genet::cmd_eval(cfg);
      std::cout << "task\tusers\trecall@10\trecall@20\tndcg@10\tndcg@20\n";
      std::cout.precision(6);
      std::cout << std::fixed << report.task << '\t' << report.user_count << '\t'
                << report.recall10 << '\t' << report.recall20 << '\t' << report.ndcg10 << '\t'
                << report.ndcg20 << '\n';
    } else if (gen->parsed()) {
      genet::cmd_gen(cfg, gen_params);
      std::cout << "wrote " << gen_params.kind << " dataset to " << cfg.out_dir.string() << "\n";
    }
  } catch (const genet::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
