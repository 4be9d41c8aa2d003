#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "genet/error.hpp"

namespace genet {

enum class NodeKind : uint8_t { User, Item };

/// Hyperedge provenance. The Self* tags mark the singleton fallback
/// edges attached to nodes no construction recipe covered.
enum class EdgeTag : uint8_t {
  SocialCircle,
  PoiRegion,
  FanCircle,
  Brand,
  Category,
  SelfUser,
  SelfItem,
};

const char* to_string(NodeKind k);
const char* to_string(EdgeTag t);
bool node_kind_from_string(std::string_view s, NodeKind& out);
bool edge_tag_from_string(std::string_view s, EdgeTag& out);

struct NodeId {
  uint32_t index = 0;
  NodeKind kind = NodeKind::User;
};

struct HyperedgeSpec {
  EdgeTag tag = EdgeTag::SocialCircle;
  std::vector<uint32_t> members;
};

struct InteractionRecord {
  uint32_t user = 0;
  uint32_t item = 0;
  int64_t timestamp = 0;
};

/// Timestamped feedback, in file order. Chronology per user is
/// (timestamp, record order).
using InteractionLog = std::vector<InteractionRecord>;

/// Sparse node-hyperedge incidence stored dually: per-node edge lists
/// and per-edge member lists, both sorted. Immutable after build();
/// updates return new values.
class Hypergraph {
 public:
  Hypergraph() = default;  // empty graph, fill via build()

  static Hypergraph build(std::vector<NodeKind> node_kinds, std::vector<HyperedgeSpec> edges);

  size_t node_count() const { return node_kinds_.size(); }
  size_t edge_count() const { return edge_members_.size(); }

  NodeKind node_kind(uint32_t x) const { return node_kinds_[check_node(x)]; }
  EdgeTag edge_tag(uint32_t e) const { return edge_tags_[check_edge(e)]; }

  std::span<const uint32_t> edges_of(uint32_t x) const;
  std::span<const uint32_t> members_of(uint32_t e) const;

  size_t node_degree(uint32_t x) const { return edges_of(x).size(); }
  size_t edge_degree(uint32_t e) const { return members_of(e).size(); }

  bool incident(uint32_t x, uint32_t e) const;

  /// True iff some hyperedge contains both nodes. adjacent(x, x) holds
  /// whenever degree(x) >= 1.
  bool adjacent(uint32_t a, uint32_t b) const;

  /// Feedback-driven incidence update: for every interacting (u, v),
  /// u joins every hyperedge of v and v joins every hyperedge of u,
  /// evaluated on this graph's incidence. Returns the updated graph.
  Hypergraph updated_with(const InteractionLog& log) const;

  uint32_t check_node(uint32_t x) const {
    if (x >= node_kinds_.size()) fail(Errc::UnknownNode, "node index " + std::to_string(x));
    return x;
  }
  uint32_t check_edge(uint32_t e) const {
    if (e >= edge_members_.size()) fail(Errc::UnknownNode, "edge index " + std::to_string(e));
    return e;
  }

 private:
  std::vector<NodeKind> node_kinds_;
  std::vector<EdgeTag> edge_tags_;
  std::vector<std::vector<uint32_t>> node_edges_;
  std::vector<std::vector<uint32_t>> edge_members_;
};

/// Read-only overlay over an immutable Hypergraph with exactly one
/// incidence entry removed. All queries answer as if h(node, edge)
/// were zero; the base graph is untouched.
class PerturbedView {
 public:
  PerturbedView(const Hypergraph& base, uint32_t node, uint32_t edge);

  const Hypergraph& base() const { return *base_; }
  uint32_t removed_node() const { return node_; }
  uint32_t removed_edge() const { return edge_; }

  size_t node_degree(uint32_t x) const;
  size_t edge_degree(uint32_t e) const;
  bool incident(uint32_t x, uint32_t e) const;

  /// Surviving edges of a node, in base order.
  template <typename F>
  void for_each_edge_of(uint32_t x, F&& fn) const {
    for (uint32_t e : base_->edges_of(x)) {
      if (x == node_ && e == edge_) continue;
      fn(e);
    }
  }

 private:
  const Hypergraph* base_;
  uint32_t node_;
  uint32_t edge_;
};

}  // namespace genet
