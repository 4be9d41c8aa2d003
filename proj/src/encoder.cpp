#include "genet/encoder.hpp"

#include <cmath>

#include "genet/rng.hpp"

namespace genet {

ParamStore ParamStore::init(size_t node_count, int dim, uint64_t seed) {
  if (dim <= 0) fail(Errc::DimensionMismatch, "embedding dimension must be positive");
  ParamStore p;
  p.seed = seed;
  p.theta.resize(static_cast<Eigen::Index>(node_count), dim);
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  KeyedRng rng(seed, "theta-init");
  for (Eigen::Index i = 0; i < p.theta.rows(); ++i)
    for (Eigen::Index j = 0; j < p.theta.cols(); ++j)
      p.theta(i, j) = (2.0 * rng.next_double() - 1.0) * bound;
  p.w = Eigen::MatrixXd::Identity(dim, dim);
  return p;
}

EmbeddingMatrix encode_edges(const Hypergraph& g, const Eigen::MatrixXd& theta) {
  if (static_cast<size_t>(theta.rows()) != g.node_count())
    fail(Errc::DimensionMismatch, "theta rows != node count");
  EmbeddingMatrix E(g.edge_count(), theta.cols());
  for (uint32_t e = 0; e < g.edge_count(); ++e) {
    auto members = g.members_of(e);
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(theta.cols());
    for (uint32_t x : members) acc += theta.row(x);
    E.row(e) = acc / static_cast<double>(members.size());
  }
  return E;
}

EmbeddingMatrix encode_nodes(const Hypergraph& g, const EmbeddingMatrix& edge_embeddings) {
  if (static_cast<size_t>(edge_embeddings.rows()) != g.edge_count())
    fail(Errc::DimensionMismatch, "edge embedding rows != edge count");
  EmbeddingMatrix X(g.node_count(), edge_embeddings.cols());
  for (uint32_t x = 0; x < g.node_count(); ++x) {
    auto edges = g.edges_of(x);
    if (edges.empty())
      fail(Errc::EmptyInput, "node " + std::to_string(x) + " has degree 0; propagation undefined");
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(edge_embeddings.cols());
    for (uint32_t e : edges) acc += edge_embeddings.row(e);
    X.row(x) = acc / static_cast<double>(edges.size());
  }
  return X;
}

Eigen::RowVectorXd encode_perturbed_node(const PerturbedView& view,
                                         const EmbeddingMatrix& edge_embeddings,
                                         const Eigen::MatrixXd& w, uint32_t node) {
  if (edge_embeddings.cols() != w.rows() || w.rows() != w.cols())
    fail(Errc::DimensionMismatch, "w must be square with dim matching edge embeddings");
  const size_t deg = view.node_degree(node);
  if (deg == 0)
    fail(Errc::IsolatedAfterPerturbation,
         "node " + std::to_string(node) + " has no surviving edges");
  Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(edge_embeddings.cols());
  view.for_each_edge_of(node, [&](uint32_t e) { acc += edge_embeddings.row(e); });
  return (acc / static_cast<double>(deg)) * w;
}

EmbeddingMatrix updated_node_embeddings(const Hypergraph& g_updated, const EmbeddingMatrix& X,
                                        const EmbeddingMatrix& edge_embeddings,
                                        const Eigen::MatrixXd& w) {
  if (static_cast<size_t>(X.rows()) != g_updated.node_count())
    fail(Errc::DimensionMismatch, "X rows != node count");
  if (static_cast<size_t>(edge_embeddings.rows()) != g_updated.edge_count())
    fail(Errc::DimensionMismatch, "edge embedding rows != edge count");
  if (X.cols() != edge_embeddings.cols() || edge_embeddings.cols() != w.rows() ||
      w.rows() != w.cols())
    fail(Errc::DimensionMismatch, "embedding dimensions disagree");

  EmbeddingMatrix out = X;
  for (uint32_t x = 0; x < g_updated.node_count(); ++x) {
    auto edges = g_updated.edges_of(x);
    if (edges.empty()) continue;  // no incidences, residual term vanishes
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(edge_embeddings.cols());
    for (uint32_t e : edges) acc += edge_embeddings.row(e);
    out.row(x) += (acc / static_cast<double>(edges.size())) * w;
  }
  return out;
}

}  // namespace genet
