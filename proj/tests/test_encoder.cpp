#include <doctest.h>

#include <Eigen/Dense>

#include "genet/encoder.hpp"
#include "test_util.hpp"

using namespace genet;
using testutil::make_graph;

TEST_SUITE_BEGIN("encoder");

namespace {

/// Dense-matrix route: E = De^-1 H^T Theta, X = Dv^-1 H E.
Eigen::MatrixXd dense_edge_encode(const Hypergraph& g, const Eigen::MatrixXd& theta) {
  const Eigen::MatrixXd H = testutil::dense_incidence(g);
  Eigen::VectorXd de(g.edge_count());
  for (uint32_t e = 0; e < g.edge_count(); ++e) de(e) = static_cast<double>(g.edge_degree(e));
  return de.cwiseInverse().asDiagonal() * H.transpose() * theta;
}

Eigen::MatrixXd dense_node_encode(const Hypergraph& g, const Eigen::MatrixXd& E) {
  const Eigen::MatrixXd H = testutil::dense_incidence(g);
  Eigen::VectorXd dv(g.node_count());
  for (uint32_t x = 0; x < g.node_count(); ++x) dv(x) = static_cast<double>(g.node_degree(x));
  return dv.cwiseInverse().asDiagonal() * H * E;
}

}  // namespace

TEST_CASE("edge embedding is the member mean") {
  const Hypergraph g = make_graph(2, {{0, 1}});
  Eigen::MatrixXd theta(2, 3);
  theta << 1, 2, 3, 5, 6, 7;
  const EmbeddingMatrix E = encode_edges(g, theta);
  CHECK(testutil::approx_equal(E.row(0), (theta.row(0) + theta.row(1)) / 2.0));

  const Hypergraph single = make_graph(1, {{0}});
  const EmbeddingMatrix E1 = encode_edges(single, theta.topRows(1));
  CHECK(testutil::approx_equal(E1.row(0), theta.row(0)));
}

TEST_CASE("node embedding is the incident-edge mean") {
  const Hypergraph g = make_graph(3, {{0, 1}, {1, 2}});
  const Eigen::MatrixXd theta = testutil::random_matrix(3, 4, 7);
  const EmbeddingMatrix E = encode_edges(g, theta);
  const EmbeddingMatrix X = encode_nodes(g, E);
  CHECK(testutil::approx_equal(X.row(0), E.row(0)));
  CHECK(testutil::approx_equal(X.row(1), (E.row(0) + E.row(1)) / 2.0));
}

TEST_CASE("dense oracle over random hypergraphs") {
  for (uint64_t seed = 0; seed < 25; ++seed) {
    const Hypergraph g = testutil::random_graph(5 + seed % 46, 2 + seed % 19, seed);
    const int d = 2 + seed % 15;
    const Eigen::MatrixXd theta = testutil::random_matrix(g.node_count(), d, seed + 1);
    const EmbeddingMatrix E = encode_edges(g, theta);
    const EmbeddingMatrix X = encode_nodes(g, E);
    CHECK(testutil::approx_equal(E, dense_edge_encode(g, theta)));
    CHECK(testutil::approx_equal(X, dense_node_encode(g, E)));
  }
}

TEST_CASE("perturbed node row") {
  // x1 in e0 and e1; removing e0 leaves the projected e1 row.
  const Hypergraph g = make_graph(3, {{0, 1}, {1, 2}});
  const Eigen::MatrixXd theta = testutil::random_matrix(3, 4, 11);
  const EmbeddingMatrix E = encode_edges(g, theta);
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(4, 4);

  const PerturbedView view(g, 1, 0);
  const Eigen::RowVectorXd row = encode_perturbed_node(view, E, identity, 1);
  CHECK(testutil::approx_equal(row, E.row(1)));

  SUBCASE("zero projection annihilates") {
    const Eigen::RowVectorXd zero_row =
        encode_perturbed_node(view, E, Eigen::MatrixXd::Zero(4, 4), 1);
    CHECK(zero_row.cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("removing the only edge isolates") {
    const PerturbedView lonely(g, 0, 0);
    CHECK_FAILS_WITH(Errc::IsolatedAfterPerturbation, encode_perturbed_node(lonely, E, identity, 0));
  }

  SUBCASE("removal elsewhere leaves the row at the plain encoding") {
    const EmbeddingMatrix X = encode_nodes(g, E);
    const PerturbedView other(g, 2, 1);
    CHECK(testutil::approx_equal(encode_perturbed_node(other, E, identity, 1), X.row(1)));
  }
}

TEST_CASE("perturbed node dense oracle") {
  for (uint64_t seed = 40; seed < 60; ++seed) {
    const Hypergraph g = testutil::random_graph(6 + seed % 12, 3 + seed % 6, seed);
    const int d = 3 + seed % 6;
    const Eigen::MatrixXd theta = testutil::random_matrix(g.node_count(), d, seed);
    const Eigen::MatrixXd w = testutil::random_matrix(d, d, seed + 2);
    const EmbeddingMatrix E = encode_edges(g, theta);

    // Find a node of degree >= 2 so the perturbed row stays defined.
    uint32_t x = 0, e = 0;
    bool found = false;
    for (uint32_t n = 0; n < g.node_count() && !found; ++n)
      if (g.node_degree(n) >= 2) {
        x = n;
        e = g.edges_of(n)[0];
        found = true;
      }
    if (!found) continue;

    const PerturbedView view(g, x, e);
    const Eigen::RowVectorXd got = encode_perturbed_node(view, E, w, x);

    const Eigen::MatrixXd H_hat = testutil::dense_incidence(view);
    const double deg = H_hat.row(x).sum();
    const Eigen::RowVectorXd want = (H_hat.row(x) / deg) * (E * w);
    CHECK(testutil::approx_equal(got, want));
  }
}

TEST_CASE("updated embeddings follow the residual rule") {
  const Hypergraph g = make_graph(4, {{0, 1}, {2, 3}});
  const Eigen::MatrixXd theta = testutil::random_matrix(4, 3, 5);
  const EmbeddingMatrix E = encode_edges(g, theta);
  const EmbeddingMatrix X = encode_nodes(g, E);

  SUBCASE("zero projection is the identity") {
    const EmbeddingMatrix out = updated_node_embeddings(g, X, E, Eigen::MatrixXd::Zero(3, 3));
    CHECK(testutil::approx_equal(out, X));
  }

  SUBCASE("identity projection without update adds plain re-propagation") {
    const EmbeddingMatrix out =
        updated_node_embeddings(g, X, E, Eigen::MatrixXd::Identity(3, 3));
    CHECK(testutil::approx_equal(out, X + encode_nodes(g, E)));
  }

  SUBCASE("dense oracle on updated graphs") {
    const Hypergraph updated = g.updated_with({{0, 2, 1}});
    const Eigen::MatrixXd w = testutil::random_matrix(3, 3, 9);
    const EmbeddingMatrix out = updated_node_embeddings(updated, X, E, w);

    const Eigen::MatrixXd H = testutil::dense_incidence(updated);
    Eigen::MatrixXd want = X;
    for (uint32_t n = 0; n < updated.node_count(); ++n) {
      const double deg = H.row(n).sum();
      want.row(n) += (H.row(n) / deg) * (E * w);
    }
    CHECK(testutil::approx_equal(out, want));
  }
}

TEST_CASE("encoding is linear in theta") {
  const Hypergraph g = testutil::random_graph(12, 5, 77);
  const Eigen::MatrixXd t1 = testutil::random_matrix(12, 6, 1);
  const Eigen::MatrixXd t2 = testutil::random_matrix(12, 6, 2);
  const double a = 0.7, b = -1.3;

  const EmbeddingMatrix lhs = encode_nodes(g, encode_edges(g, a * t1 + b * t2));
  const EmbeddingMatrix rhs =
      a * encode_nodes(g, encode_edges(g, t1)) + b * encode_nodes(g, encode_edges(g, t2));
  CHECK(testutil::approx_equal(lhs, rhs));
}

TEST_CASE("encoding is permutation equivariant") {
  const size_t n = 9;
  const Hypergraph g = make_graph(n, {{0, 1, 2}, {2, 3, 4}, {5, 6}, {6, 7, 8}, {0, 8}});
  const Eigen::MatrixXd theta = testutil::random_matrix(n, 4, 3);

  // Relabel nodes by a fixed permutation.
  std::vector<uint32_t> perm{3, 1, 4, 0, 8, 2, 7, 5, 6};  // new id of old node i
  std::vector<std::vector<uint32_t>> edges;
  for (uint32_t e = 0; e < g.edge_count(); ++e) {
    std::vector<uint32_t> members;
    for (uint32_t x : g.members_of(e)) members.push_back(perm[x]);
    edges.push_back(std::move(members));
  }
  const Hypergraph relabeled = make_graph(n, std::move(edges));
  Eigen::MatrixXd theta_perm(n, 4);
  for (uint32_t x = 0; x < n; ++x) theta_perm.row(perm[x]) = theta.row(x);

  const EmbeddingMatrix X = encode_nodes(g, encode_edges(g, theta));
  const EmbeddingMatrix Xp = encode_nodes(relabeled, encode_edges(relabeled, theta_perm));
  for (uint32_t x = 0; x < n; ++x) CHECK(testutil::approx_equal(Xp.row(perm[x]), X.row(x)));
}

TEST_CASE("parameter store initialization") {
  const ParamStore p = ParamStore::init(10, 8, 42);
  CHECK(p.theta.rows() == 10);
  CHECK(p.theta.cols() == 8);
  CHECK(p.theta.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(8.0) + 1e-12);
  CHECK(p.w.isApprox(Eigen::MatrixXd::Identity(8, 8)));

  const ParamStore q = ParamStore::init(10, 8, 42);
  CHECK(p.theta == q.theta);
}

TEST_SUITE_END();
