#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "genet/commands.hpp"
#include "genet/encoder.hpp"
#include "genet/eval.hpp"
#include "genet/finetune.hpp"
#include "genet/hypergraph.hpp"
#include "genet/pretrain.hpp"
#include "genet/sideinfo.hpp"
#include "genet/synthetic.hpp"

namespace py = pybind11;
using namespace genet;

namespace {

Hypergraph build_hypergraph_py(const std::vector<NodeKind>& kinds,
                               const std::vector<std::pair<EdgeTag, std::vector<uint32_t>>>& edges) {
  std::vector<HyperedgeSpec> specs;
  specs.reserve(edges.size());
  for (const auto& [tag, members] : edges) specs.push_back({tag, members});
  return Hypergraph::build(kinds, std::move(specs));
}

InteractionLog log_from_tuples(const std::vector<std::tuple<uint32_t, uint32_t, int64_t>>& raw) {
  InteractionLog log;
  log.reserve(raw.size());
  for (const auto& [u, i, t] : raw) log.push_back({u, i, t});
  return log;
}

}  // namespace

PYBIND11_MODULE(_genet, m) {
  m.doc() = "Hypergraph pre-training on side information for recommendation";

  py::register_exception<Error>(m, "GenetError");

  py::enum_<NodeKind>(m, "NodeKind")
      .value("User", NodeKind::User)
      .value("Item", NodeKind::Item);

  py::enum_<EdgeTag>(m, "EdgeTag")
      .value("SocialCircle", EdgeTag::SocialCircle)
      .value("PoiRegion", EdgeTag::PoiRegion)
      .value("FanCircle", EdgeTag::FanCircle)
      .value("Brand", EdgeTag::Brand)
      .value("Category", EdgeTag::Category)
      .value("SelfUser", EdgeTag::SelfUser)
      .value("SelfItem", EdgeTag::SelfItem);

  py::enum_<Task>(m, "Task").value("TopN", Task::TopN).value("Sequential", Task::Sequential);

  py::enum_<LossForm>(m, "LossForm")
      .value("LogSigmoid", LossForm::LogSigmoid)
      .value("RawSigmoid", LossForm::RawSigmoid);

  py::class_<Hypergraph>(m, "Hypergraph")
      .def_static("build", &build_hypergraph_py, py::arg("node_kinds"), py::arg("edges"))
      .def_property_readonly("node_count", &Hypergraph::node_count)
      .def_property_readonly("edge_count", &Hypergraph::edge_count)
      .def("node_degree", &Hypergraph::node_degree)
      .def("edge_degree", &Hypergraph::edge_degree)
      .def("incident", &Hypergraph::incident)
      .def("adjacent", &Hypergraph::adjacent)
      .def("edges_of",
           [](const Hypergraph& g, uint32_t x) {
             auto s = g.edges_of(x);
             return std::vector<uint32_t>(s.begin(), s.end());
           })
      .def("members_of",
           [](const Hypergraph& g, uint32_t e) {
             auto s = g.members_of(e);
             return std::vector<uint32_t>(s.begin(), s.end());
           })
      .def("updated_with",
           [](const Hypergraph& g, const std::vector<std::tuple<uint32_t, uint32_t, int64_t>>& log) {
             return g.updated_with(log_from_tuples(log));
           });

  py::class_<ParamStore>(m, "ParamStore")
      .def_static("init", &ParamStore::init, py::arg("node_count"), py::arg("dim"), py::arg("seed"))
      .def_readwrite("theta", &ParamStore::theta)
      .def_readwrite("w", &ParamStore::w);

  m.def("encode_edges", &encode_edges, py::arg("graph"), py::arg("theta"));
  m.def("encode_nodes", &encode_nodes, py::arg("graph"), py::arg("edge_embeddings"));
  m.def("updated_node_embeddings", &updated_node_embeddings);

  py::class_<PretrainConfig>(m, "PretrainConfig")
      .def(py::init<>())
      .def_readwrite("dim", &PretrainConfig::dim)
      .def_readwrite("batch_size", &PretrainConfig::batch_size)
      .def_readwrite("learning_rate", &PretrainConfig::learning_rate)
      .def_readwrite("epochs", &PretrainConfig::epochs)
      .def_readwrite("lam", &PretrainConfig::lambda)
      .def_readwrite("beta1_intra", &PretrainConfig::beta1_intra)
      .def_readwrite("beta2_inter", &PretrainConfig::beta2_inter)
      .def_readwrite("tau", &PretrainConfig::tau)
      .def_readwrite("k_intra", &PretrainConfig::k_intra)
      .def_readwrite("loss_form", &PretrainConfig::loss_form)
      .def_readwrite("np_enabled", &PretrainConfig::np_enabled)
      .def_readwrite("imp_enabled", &PretrainConfig::imp_enabled)
      .def_readwrite("hscl_enabled", &PretrainConfig::hscl_enabled)
      .def_readwrite("seed", &PretrainConfig::seed);

  py::class_<EpochLoss>(m, "EpochLoss")
      .def_readonly("hyperlink", &EpochLoss::hyperlink)
      .def_readonly("intra", &EpochLoss::intra)
      .def_readonly("inter", &EpochLoss::inter)
      .def_readonly("total", &EpochLoss::total);

  py::class_<PretrainResult>(m, "PretrainResult")
      .def_readonly("params", &PretrainResult::params)
      .def_readonly("node_embeddings", &PretrainResult::node_embeddings)
      .def_readonly("edge_embeddings", &PretrainResult::edge_embeddings)
      .def_readonly("history", &PretrainResult::history);

  m.def("run_pretraining", &run_pretraining, py::arg("graph"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());

  py::class_<FinetuneConfig>(m, "FinetuneConfig")
      .def(py::init<>())
      .def_readwrite("epochs", &FinetuneConfig::epochs)
      .def_readwrite("learning_rate", &FinetuneConfig::learning_rate)
      .def_readwrite("warm_epochs", &FinetuneConfig::warm_epochs)
      .def_readwrite("warm_factor", &FinetuneConfig::warm_factor)
      .def_readwrite("lightgcn_layers", &FinetuneConfig::lightgcn_layers)
      .def_readwrite("seq_len", &FinetuneConfig::seq_len)
      .def_readwrite("loss_form", &FinetuneConfig::loss_form)
      .def_readwrite("seed", &FinetuneConfig::seed);

  py::class_<FinetuneResult>(m, "FinetuneResult")
      .def_readonly("user_embeddings", &FinetuneResult::user_embeddings)
      .def_readonly("item_embeddings", &FinetuneResult::item_embeddings)
      .def_readonly("history", &FinetuneResult::history);

  m.def(
      "run_finetune",
      [](Task task, const Hypergraph& g, const PretrainResult& pre,
         const std::vector<std::tuple<uint32_t, uint32_t, int64_t>>& train, size_t users,
         size_t items, const FinetuneConfig& cfg) {
        return run_finetune(task, g, pre, log_from_tuples(train), users, items, cfg);
      },
      py::arg("task"), py::arg("graph"), py::arg("pretrained"), py::arg("train"),
      py::arg("user_count"), py::arg("item_count"), py::arg("config"),
      py::call_guard<py::gil_scoped_release>());

  py::class_<MetricReport>(m, "MetricReport")
      .def_readonly("recall10", &MetricReport::recall10)
      .def_readonly("recall20", &MetricReport::recall20)
      .def_readonly("ndcg10", &MetricReport::ndcg10)
      .def_readonly("ndcg20", &MetricReport::ndcg20)
      .def_readonly("user_count", &MetricReport::user_count);

  m.def("compute_metrics", &compute_metrics, py::arg("ranks"));

  py::enum_<EvalMode>(m, "EvalMode")
      .value("FullRanking", EvalMode::FullRanking)
      .value("SampledNegatives", EvalMode::SampledNegatives);

  py::class_<TestInstance>(m, "TestInstance")
      .def_readonly("user", &TestInstance::user)
      .def_readonly("target", &TestInstance::target)
      .def_readonly("train_items", &TestInstance::train_items);

  py::class_<SplitSpec>(m, "SplitSpec")
      .def_property_readonly("train",
                             [](const SplitSpec& s) {
                               std::vector<std::tuple<uint32_t, uint32_t, int64_t>> out;
                               out.reserve(s.train.size());
                               for (const auto& r : s.train)
                                 out.emplace_back(r.user, r.item, r.timestamp);
                               return out;
                             })
      .def_readonly("test", &SplitSpec::test);

  m.def(
      "leave_one_out_split",
      [](const std::vector<std::tuple<uint32_t, uint32_t, int64_t>>& log, EvalMode mode) {
        return leave_one_out_split(log_from_tuples(log), mode);
      },
      py::arg("log"), py::arg("mode") = EvalMode::FullRanking);

  m.def(
      "evaluate_split",
      [](Task task, const SplitSpec& split, const EmbeddingMatrix& users,
         const EmbeddingMatrix& items, size_t item_base, int seq_len, uint64_t seed) {
        return evaluate_split(task, split, users, items, item_base, nullptr, seq_len, seed);
      },
      py::arg("task"), py::arg("split"), py::arg("users"), py::arg("items"), py::arg("item_base"),
      py::arg("seq_len") = 20, py::arg("seed") = 0);

  m.def(
      "kmeans",
      [](const std::vector<std::pair<double, double>>& coords, int k, uint64_t seed) {
        std::vector<PoiRecord> points;
        points.reserve(coords.size());
        for (size_t i = 0; i < coords.size(); ++i)
          points.push_back({"p" + std::to_string(i), coords[i].first, coords[i].second});
        const KmeansResult res = kmeans_regions(points, k, seed);
        return std::make_pair(res.assignment, res.centroids);
      },
      py::arg("points"), py::arg("k"), py::arg("seed") = 0);

  py::class_<synthetic::FeedbackData>(m, "FeedbackData")
      .def_readonly("graph", &synthetic::FeedbackData::graph)
      .def_readonly("user_community", &synthetic::FeedbackData::user_community)
      .def_readonly("item_community", &synthetic::FeedbackData::item_community)
      .def_property_readonly("interactions", [](const synthetic::FeedbackData& d) {
        std::vector<std::tuple<uint32_t, uint32_t, int64_t>> out;
        out.reserve(d.interactions.size());
        for (const auto& r : d.interactions) out.emplace_back(r.user, r.item, r.timestamp);
        return out;
      });

  py::class_<synthetic::PlantedData>(m, "PlantedData")
      .def_readonly("graph", &synthetic::PlantedData::graph);

  m.def("gen_planted", &synthetic::planted, py::arg("edges"), py::arg("edge_size"));
  m.def("gen_feedback", &synthetic::feedback, py::arg("users"), py::arg("items"),
        py::arg("communities"), py::arg("per_user"), py::arg("within_rate"), py::arg("seed"));
}
