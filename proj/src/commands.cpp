#include "genet/commands.hpp"

#include <cmath>
#include <fstream>
#include <iostream>

#include "genet/io.hpp"
#include "genet/synthetic.hpp"

namespace genet {

namespace fs = std::filesystem;

namespace {

Task parse_task(const std::string& s) {
  if (s == "topn") return Task::TopN;
  if (s == "seq") return Task::Sequential;
  fail(Errc::ParseError, "task must be 'topn' or 'seq', got '" + s + "'");
}

EvalMode parse_mode(const std::string& s) {
  if (s == "full") return EvalMode::FullRanking;
  if (s == "sampled") return EvalMode::SampledNegatives;
  fail(Errc::ParseError, "mode must be 'full' or 'sampled', got '" + s + "'");
}

LossForm parse_loss_form(const std::string& s) {
  if (s == "logsigmoid") return LossForm::LogSigmoid;
  if (s == "rawsigmoid") return LossForm::RawSigmoid;
  fail(Errc::ParseError, "loss form must be 'logsigmoid' or 'rawsigmoid', got '" + s + "'");
}

const char* task_prefix(Task t) { return t == Task::TopN ? "topn" : "seq"; }

/// Rebuilds the training/test split the way finetune and eval share it.
SplitSpec make_split(const RunConfig& cfg, const InteractionLog& log, size_t user_count,
                     size_t item_count) {
  if (cfg.cold_start.empty()) {
    SplitSpec s = leave_one_out_split(log, cfg.mode, cfg.sampled_negatives);
    return s;
  }
  ColdStartSplits cold = cold_start_splits(log, user_count, item_count, cfg.seed);
  SplitSpec s = cfg.cold_start == "users" ? std::move(cold.user_cold) : std::move(cold.item_cold);
  s.mode = cfg.mode;
  s.sampled_negatives = cfg.sampled_negatives;
  return s;
}

}  // namespace

void apply_config_file(const fs::path& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) fail(Errc::ParseError, "cannot open config " + path.string());
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      fail(Errc::ParseError, path.string() + ":" + std::to_string(line_no) + ": expected key=value");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "out") cfg.out_dir = value;
    else if (key == "graph_dir") cfg.graph_dir = value;
    else if (key == "social") cfg.social_path = value;
    else if (key == "poi") cfg.poi_path = value;
    else if (key == "reviews") cfg.reviews_path = value;
    else if (key == "item_meta") cfg.item_meta_path = value;
    else if (key == "interactions") cfg.interactions_path = value;
    else if (key == "kmeans_k") cfg.kmeans_k = std::stoi(value);
    else if (key == "rating_threshold") cfg.rating_threshold = std::stod(value);
    else if (key == "min_reviews") cfg.min_reviews = std::stoi(value);
    else if (key == "embedding_dim") cfg.pretrain.dim = std::stoi(value);
    else if (key == "batch_size") cfg.pretrain.batch_size = std::stoi(value);
    else if (key == "lr") {
      cfg.pretrain.learning_rate = std::stod(value);
      cfg.finetune.learning_rate = std::stod(value);
    } else if (key == "pretrain_epochs") cfg.pretrain.epochs = std::stoi(value);
    else if (key == "finetune_epochs") cfg.finetune.epochs = std::stoi(value);
    else if (key == "lambda") cfg.pretrain.lambda = std::stod(value);
    else if (key == "beta1") cfg.pretrain.beta1_intra = std::stod(value);
    else if (key == "beta2") cfg.pretrain.beta2_inter = std::stod(value);
    else if (key == "tau") cfg.pretrain.tau = std::stod(value);
    else if (key == "k_intra") cfg.pretrain.k_intra = std::stoi(value);
    else if (key == "np") cfg.pretrain.np_enabled = value == "1" || value == "true";
    else if (key == "imp") cfg.pretrain.imp_enabled = value == "1" || value == "true";
    else if (key == "hscl") cfg.pretrain.hscl_enabled = value == "1" || value == "true";
    else if (key == "loss_form") {
      cfg.pretrain.loss_form = parse_loss_form(value);
      cfg.finetune.loss_form = cfg.pretrain.loss_form;
    } else if (key == "warm_epochs") cfg.finetune.warm_epochs = std::stoi(value);
    else if (key == "layers") cfg.finetune.lightgcn_layers = std::stoi(value);
    else if (key == "seq_len") cfg.finetune.seq_len = std::stoi(value);
    else if (key == "task") cfg.task = parse_task(value);
    else if (key == "mode") cfg.mode = parse_mode(value);
    else if (key == "negatives") cfg.sampled_negatives = std::stoi(value);
    else if (key == "cold_start") cfg.cold_start = value;
    else if (key == "seed") cfg.seed = std::stoull(value);
    else fail(Errc::ParseError, path.string() + ":" + std::to_string(line_no) +
                                     ": unknown key '" + key + "'");
  }
}

BuildSummary cmd_build(const RunConfig& cfg) {
  IdMap idmap;
  std::vector<SocialEdge> social;
  std::vector<PoiRecord> pois;
  std::vector<ReviewRecord> reviews;
  std::vector<ItemMeta> meta;

  if (!cfg.social_path.empty()) {
    social = io::parse_social_tsv(cfg.social_path);
    for (const SocialEdge& e : social) {
      idmap.add_user(e.user_a);
      idmap.add_user(e.user_b);
    }
  }
  if (!cfg.reviews_path.empty()) {
    reviews = io::parse_reviews_tsv(cfg.reviews_path);
    for (const ReviewRecord& r : reviews) {
      idmap.add_user(r.user);
      idmap.add_item(r.item);
    }
  }
  if (!cfg.poi_path.empty()) {
    pois = io::parse_poi_tsv(cfg.poi_path);
    for (const PoiRecord& p : pois) idmap.add_item(p.item);
  }
  if (!cfg.item_meta_path.empty()) {
    meta = io::parse_item_meta_tsv(cfg.item_meta_path);
    for (const ItemMeta& m : meta) idmap.add_item(m.item);
  }
  // Feedback-only nodes still need rows in the embedding tables.
  if (!cfg.interactions_path.empty()) io::register_interaction_keys(cfg.interactions_path, idmap);

  std::vector<std::vector<HyperedgeSpec>> pieces;
  if (!social.empty()) pieces.push_back(build_social_circles(social, idmap));
  if (!pois.empty()) {
    const int k = cfg.kmeans_k > 0
                      ? cfg.kmeans_k
                      : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(pois.size()))));
    const KmeansResult clusters = kmeans_regions(pois, k, cfg.seed);
    pieces.push_back(poi_region_edges(pois, clusters, idmap));
  }
  if (!reviews.empty())
    pieces.push_back(mine_brand_fans(reviews, cfg.rating_threshold, cfg.min_reviews, idmap));
  if (!meta.empty()) pieces.push_back(build_feature_hyperedges(meta, idmap));
  if (pieces.empty()) fail(Errc::EmptyHypergraph, "no side-information input produced hyperedges");

  const Hypergraph g = assemble(idmap, pieces);

  fs::create_directories(cfg.out_dir);
  io::write_hypergraph(cfg.out_dir / "graph.tsv", g);
  io::write_idmap(cfg.out_dir / "idmap.tsv", idmap);

  BuildSummary summary;
  summary.users = idmap.user_count();
  summary.items = idmap.item_count();
  summary.edges = g.edge_count();
  for (uint32_t e = 0; e < g.edge_count(); ++e) ++summary.edges_per_tag[to_string(g.edge_tag(e))];
  return summary;
}

namespace {

std::pair<IdMap, Hypergraph> load_graph(const RunConfig& cfg) {
  if (!fs::exists(cfg.idmap_file()) || !fs::exists(cfg.graph_file()))
    fail(Errc::MissingCheckpoint,
         "no hypergraph in " + cfg.dir_or_out().string() + "; run `build` or `gen` first");
  IdMap idmap = io::read_idmap(cfg.idmap_file());
  Hypergraph g = io::read_hypergraph(cfg.graph_file(), idmap.node_kinds());
  return {std::move(idmap), std::move(g)};
}

}  // namespace

PretrainResult cmd_pretrain(const RunConfig& cfg) {
  auto [idmap, g] = load_graph(cfg);
  PretrainConfig pcfg = cfg.pretrain;
  pcfg.seed = cfg.seed;
  PretrainResult result = run_pretraining(g, pcfg);

  fs::create_directories(cfg.out_dir);
  io::write_dump(cfg.out_dir / "nodes.gnet", result.node_embeddings);
  io::write_dump(cfg.out_dir / "edges.gnet", result.edge_embeddings);
  io::write_dump(cfg.out_dir / "theta.gnet", result.params.theta);
  io::write_dump(cfg.out_dir / "w.gnet", result.params.w);
  io::write_node_sidecar(cfg.out_dir / "nodes.tsv", idmap);
  io::write_pretrain_history(cfg.out_dir / "pretrain_loss.tsv", result.history);
  return result;
}

FinetuneResult cmd_finetune(const RunConfig& cfg) {
  auto [idmap, g] = load_graph(cfg);
  if (cfg.interactions_path.empty())
    fail(Errc::EmptyLog, "finetune needs --interactions");

  PretrainResult pre;
  pre.node_embeddings = io::read_dump(cfg.out_dir / "nodes.gnet");
  pre.edge_embeddings = io::read_dump(cfg.out_dir / "edges.gnet");
  pre.params.theta = io::read_dump(cfg.out_dir / "theta.gnet");
  pre.params.w = io::read_dump(cfg.out_dir / "w.gnet");

  const InteractionLog log = io::parse_interactions_tsv(cfg.interactions_path, idmap);
  const SplitSpec split = make_split(cfg, log, idmap.user_count(), idmap.item_count());

  FinetuneConfig fcfg = cfg.finetune;
  fcfg.seed = cfg.seed;
  FinetuneResult result = run_finetune(cfg.task, g, pre, split.train, idmap.user_count(),
                                       idmap.item_count(), fcfg);

  const std::string prefix = task_prefix(cfg.task);
  fs::create_directories(cfg.out_dir);
  io::write_dump(cfg.out_dir / (prefix + "_users.gnet"), result.user_embeddings);
  io::write_dump(cfg.out_dir / (prefix + "_items.gnet"), result.item_embeddings);
  if (cfg.task == Task::Sequential)
    io::write_dump(cfg.out_dir / (prefix + "_gru.gnet"), io::pack_gru(result.gru));
  io::write_finetune_history(cfg.out_dir / (prefix + "_loss.tsv"), result.history);
  return result;
}

MetricReport cmd_eval(const RunConfig& cfg) {
  auto [idmap, g] = load_graph(cfg);
  if (cfg.interactions_path.empty())
    fail(Errc::EmptyLog, "eval needs --interactions");

  const std::string prefix = task_prefix(cfg.task);
  const EmbeddingMatrix users = io::read_dump(cfg.out_dir / (prefix + "_users.gnet"));
  const EmbeddingMatrix items = io::read_dump(cfg.out_dir / (prefix + "_items.gnet"));
  GruParams gru = GruParams::zero(static_cast<int>(users.cols()));
  if (cfg.task == Task::Sequential)
    gru = io::unpack_gru(io::read_dump(cfg.out_dir / (prefix + "_gru.gnet")));

  const InteractionLog log = io::parse_interactions_tsv(cfg.interactions_path, idmap);
  const SplitSpec split = make_split(cfg, log, idmap.user_count(), idmap.item_count());

  MetricReport report =
      evaluate_split(cfg.task, split, users, items, idmap.user_count(),
                     cfg.task == Task::Sequential ? &gru : nullptr, cfg.finetune.seq_len,
                     cfg.seed);

  std::ofstream tsv(cfg.out_dir / (prefix + "_metrics.tsv"));
  tsv << "task\tusers\trecall@10\trecall@20\tndcg@10\tndcg@20\n";
  tsv.precision(6);
  tsv << std::fixed << report.task << '\t' << report.user_count << '\t' << report.recall10 << '\t'
      << report.recall20 << '\t' << report.ndcg10 << '\t' << report.ndcg20 << '\n';
  return report;
}

void cmd_gen(const RunConfig& cfg, const GenParams& params) {
  fs::create_directories(cfg.out_dir);
  if (params.kind == "planted") {
    const auto data = synthetic::planted(params.edges, params.edge_size);
    io::write_hypergraph(cfg.out_dir / "graph.tsv", data.graph);
    io::write_idmap(cfg.out_dir / "idmap.tsv", data.idmap);
  } else if (params.kind == "blobs") {
    const auto data = synthetic::blobs(params.clusters, params.points_per_cluster,
                                       params.separation, params.radius, cfg.seed);
    std::ofstream poi(cfg.out_dir / "poi.tsv");
    poi.precision(12);
    for (const PoiRecord& p : data.points)
      poi << p.item << '\t' << p.latitude << '\t' << p.longitude << '\n';
    std::ofstream labels(cfg.out_dir / "blob_labels.tsv");
    for (size_t i = 0; i < data.points.size(); ++i)
      labels << data.points[i].item << '\t' << data.labels[i] << '\n';
  } else if (params.kind == "feedback") {
    const auto data = synthetic::feedback(params.users, params.items, params.communities,
                                          params.per_user, params.within_rate, cfg.seed);
    std::ofstream social(cfg.out_dir / "social.tsv");
    for (const SocialEdge& e : data.social) social << e.user_a << '\t' << e.user_b << '\n';
    std::ofstream meta(cfg.out_dir / "item_meta.tsv");
    for (const ItemMeta& m : data.meta)
      meta << m.item << '\t' << m.brand << '\t' << m.category << '\n';
    std::ofstream log(cfg.out_dir / "interactions.tsv");
    for (const InteractionRecord& r : data.interactions) {
      const auto [user_key, uk] = data.idmap.node_key(r.user);
      const auto [item_key, ik] = data.idmap.node_key(r.item);
      log << user_key << '\t' << item_key << '\t' << r.timestamp << '\n';
    }
  } else {
    fail(Errc::ParseError, "unknown synthetic kind '" + params.kind + "'");
  }
}

}  // namespace genet
