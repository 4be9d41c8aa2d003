#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "genet/hypergraph.hpp"

namespace genet {

using EmbeddingMatrix = Eigen::MatrixXd;

/// Everything gradients flow into during pre-training: the per-node
/// embedding table (the one-hot input times the trainable projection,
/// folded into a direct lookup) and the d x d propagation matrix.
struct ParamStore {
  Eigen::MatrixXd theta;  // |X| x d
  Eigen::MatrixXd w;      // d x d
  uint64_t seed = 0;

  int dim() const { return static_cast<int>(theta.cols()); }

  /// theta uniform in [-1/sqrt(d), 1/sqrt(d)], w = identity.
  static ParamStore init(size_t node_count, int dim, uint64_t seed);
};

/// Node-to-hyperedge propagation: E[e] = mean of theta rows over members.
EmbeddingMatrix encode_edges(const Hypergraph& g, const Eigen::MatrixXd& theta);

/// Hyperedge-to-node propagation: X[x] = mean of E rows over incident
/// edges. Linear throughout; no activation, no bias.
EmbeddingMatrix encode_nodes(const Hypergraph& g, const EmbeddingMatrix& edge_embeddings);

/// Row of the perturbed propagation with the learned projection:
/// mean over the node's surviving edges of E[e] * w. Throws
/// IsolatedAfterPerturbation when the view leaves the node with no edges.
Eigen::RowVectorXd encode_perturbed_node(const PerturbedView& view,
                                         const EmbeddingMatrix& edge_embeddings,
                                         const Eigen::MatrixXd& w, uint32_t node);

/// Residual re-propagation over the updated incidence:
/// out[x] = X[x] + mean over updated edges of E[e] * w.
EmbeddingMatrix updated_node_embeddings(const Hypergraph& g_updated, const EmbeddingMatrix& X,
                                        const EmbeddingMatrix& edge_embeddings,
                                        const Eigen::MatrixXd& w);

}  // namespace genet
