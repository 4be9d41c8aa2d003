#include "genet/hypergraph.hpp"

#include <algorithm>
#include <set>
#include <utility>

namespace genet {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::UnknownNode: return "UnknownNode";
    case Errc::UnknownUser: return "UnknownUser";
    case Errc::UnknownItem: return "UnknownItem";
    case Errc::DuplicateIncidence: return "DuplicateIncidence";
    case Errc::EmptyHyperedge: return "EmptyHyperedge";
    case Errc::NotIncident: return "NotIncident";
    case Errc::IsolatedAfterPerturbation: return "IsolatedAfterPerturbation";
    case Errc::KTooLarge: return "KTooLarge";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::EmptyHypergraph: return "EmptyHypergraph";
    case Errc::NoEligibleEdge: return "NoEligibleEdge";
    case Errc::EmptyBatch: return "EmptyBatch";
    case Errc::EmptySequence: return "EmptySequence";
    case Errc::EmptyLog: return "EmptyLog";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::NonFiniteGradient: return "NonFiniteGradient";
    case Errc::ParseError: return "ParseError";
    case Errc::MissingCheckpoint: return "MissingCheckpoint";
    case Errc::BadDump: return "BadDump";
  }
  return "UnknownError";
}

const char* to_string(NodeKind k) { return k == NodeKind::User ? "user" : "item"; }

const char* to_string(EdgeTag t) {
  switch (t) {
    case EdgeTag::SocialCircle: return "social_circle";
    case EdgeTag::PoiRegion: return "poi_region";
    case EdgeTag::FanCircle: return "fan_circle";
    case EdgeTag::Brand: return "brand";
    case EdgeTag::Category: return "category";
    case EdgeTag::SelfUser: return "self_user";
    case EdgeTag::SelfItem: return "self_item";
  }
  return "unknown";
}

bool node_kind_from_string(std::string_view s, NodeKind& out) {
  if (s == "user") out = NodeKind::User;
  else if (s == "item") out = NodeKind::Item;
  else return false;
  return true;
}

bool edge_tag_from_string(std::string_view s, EdgeTag& out) {
  static constexpr EdgeTag all[] = {EdgeTag::SocialCircle, EdgeTag::PoiRegion, EdgeTag::FanCircle,
                                    EdgeTag::Brand,        EdgeTag::Category,  EdgeTag::SelfUser,
                                    EdgeTag::SelfItem};
  for (EdgeTag t : all) {
    if (s == to_string(t)) {
      out = t;
      return true;
    }
  }
  return false;
}

Hypergraph Hypergraph::build(std::vector<NodeKind> node_kinds, std::vector<HyperedgeSpec> edges) {
  Hypergraph g;
  g.node_kinds_ = std::move(node_kinds);
  g.node_edges_.resize(g.node_kinds_.size());
  g.edge_tags_.reserve(edges.size());
  g.edge_members_.reserve(edges.size());

  for (size_t e = 0; e < edges.size(); ++e) {
    HyperedgeSpec& spec = edges[e];
    if (spec.members.empty())
      fail(Errc::EmptyHyperedge, "hyperedge " + std::to_string(e) + " has no members");
    std::sort(spec.members.begin(), spec.members.end());
    for (size_t i = 0; i < spec.members.size(); ++i) {
      uint32_t x = spec.members[i];
      if (x >= g.node_kinds_.size())
        fail(Errc::UnknownNode,
             "hyperedge " + std::to_string(e) + " references node " + std::to_string(x));
      if (i > 0 && spec.members[i - 1] == x)
        fail(Errc::DuplicateIncidence,
             "node " + std::to_string(x) + " listed twice in hyperedge " + std::to_string(e));
      g.node_edges_[x].push_back(static_cast<uint32_t>(e));
    }
    g.edge_tags_.push_back(spec.tag);
    g.edge_members_.push_back(std::move(spec.members));
  }
  return g;
}

std::span<const uint32_t> Hypergraph::edges_of(uint32_t x) const {
  const auto& v = node_edges_[check_node(x)];
  return {v.data(), v.size()};
}

std::span<const uint32_t> Hypergraph::members_of(uint32_t e) const {
  const auto& v = edge_members_[check_edge(e)];
  return {v.data(), v.size()};
}

bool Hypergraph::incident(uint32_t x, uint32_t e) const {
  auto edges = edges_of(x);
  check_edge(e);
  return std::binary_search(edges.begin(), edges.end(), e);
}

bool Hypergraph::adjacent(uint32_t a, uint32_t b) const {
  auto ea = edges_of(a);
  auto eb = edges_of(b);
  // Both lists are sorted; intersect by merge.
  size_t i = 0, j = 0;
  while (i < ea.size() && j < eb.size()) {
    if (ea[i] == eb[j]) return true;
    if (ea[i] < eb[j]) ++i;
    else ++j;
  }
  return false;
}

Hypergraph Hypergraph::updated_with(const InteractionLog& log) const {
  // New incidences are computed from this graph's memberships only, so
  // all pairs of the log are applied simultaneously.
  std::set<std::pair<uint32_t, uint32_t>> added;  // (node, edge)
  for (const InteractionRecord& r : log) {
    check_node(r.user);
    check_node(r.item);
    for (uint32_t e : edges_of(r.item))
      if (!incident(r.user, e)) added.emplace(r.user, e);
    for (uint32_t e : edges_of(r.user))
      if (!incident(r.item, e)) added.emplace(r.item, e);
  }

  std::vector<HyperedgeSpec> specs(edge_count());
  for (size_t e = 0; e < edge_count(); ++e) {
    specs[e].tag = edge_tags_[e];
    specs[e].members = edge_members_[e];
  }
  for (const auto& [x, e] : added) specs[e].members.push_back(x);
  return build(node_kinds_, std::move(specs));
}

PerturbedView::PerturbedView(const Hypergraph& base, uint32_t node, uint32_t edge)
    : base_(&base), node_(node), edge_(edge) {
  if (!base.incident(node, edge))
    fail(Errc::NotIncident,
         "node " + std::to_string(node) + " not incident with edge " + std::to_string(edge));
}

size_t PerturbedView::node_degree(uint32_t x) const {
  return base_->node_degree(x) - (x == node_ ? 1 : 0);
}

size_t PerturbedView::edge_degree(uint32_t e) const {
  return base_->edge_degree(e) - (e == edge_ ? 1 : 0);
}

bool PerturbedView::incident(uint32_t x, uint32_t e) const {
  if (x == node_ && e == edge_) return false;
  return base_->incident(x, e);
}

}  // namespace genet
