#include "genet/sideinfo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "genet/rng.hpp"

namespace genet {

uint32_t IdMap::add_user(const std::string& key) {
  auto [it, inserted] = users_.try_emplace(key, static_cast<uint32_t>(user_keys_.size()));
  if (inserted) user_keys_.push_back(key);
  return it->second;
}

uint32_t IdMap::add_item(const std::string& key) {
  auto [it, inserted] = items_.try_emplace(key, static_cast<uint32_t>(item_keys_.size()));
  if (inserted) item_keys_.push_back(key);
  return it->second;
}

uint32_t IdMap::user_node(const std::string& key) const {
  auto it = users_.find(key);
  if (it == users_.end()) fail(Errc::UnknownUser, "user '" + key + "' not registered");
  return it->second;
}

uint32_t IdMap::item_node(const std::string& key) const {
  auto it = items_.find(key);
  if (it == items_.end()) fail(Errc::UnknownItem, "item '" + key + "' not registered");
  return static_cast<uint32_t>(user_count()) + it->second;
}

std::pair<std::string, NodeKind> IdMap::node_key(uint32_t node) const {
  if (node < user_count()) return {user_keys_[node], NodeKind::User};
  const uint32_t ordinal = node - static_cast<uint32_t>(user_count());
  if (ordinal >= item_count()) fail(Errc::UnknownNode, "node " + std::to_string(node));
  return {item_keys_[ordinal], NodeKind::Item};
}

std::vector<NodeKind> IdMap::node_kinds() const {
  std::vector<NodeKind> kinds(node_count(), NodeKind::User);
  for (size_t i = user_count(); i < node_count(); ++i) kinds[i] = NodeKind::Item;
  return kinds;
}

std::vector<HyperedgeSpec> build_social_circles(const std::vector<SocialEdge>& edges,
                                                const IdMap& idmap) {
  std::map<uint32_t, std::set<uint32_t>> friends;
  for (const SocialEdge& e : edges) {
    const uint32_t a = idmap.user_node(e.user_a);
    const uint32_t b = idmap.user_node(e.user_b);
    if (a == b) continue;
    friends[a].insert(b);
    friends[b].insert(a);
  }
  std::vector<HyperedgeSpec> out;
  out.reserve(friends.size());
  for (const auto& [ego, circle] : friends) {
    HyperedgeSpec spec;
    spec.tag = EdgeTag::SocialCircle;
    spec.members.push_back(ego);
    spec.members.insert(spec.members.end(), circle.begin(), circle.end());
    out.push_back(std::move(spec));
  }
  return out;
}

namespace {

double sq_dist(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  return dx * dx + dy * dy;
}

KmeansResult lloyd(const std::vector<std::array<double, 2>>& pts, int k, uint64_t seed) {
  KmeansResult res;
  KeyedRng rng(seed, "kmeans");

  // k-means++ seeding.
  std::vector<std::array<double, 2>> centroids;
  centroids.reserve(k);
  centroids.push_back(pts[rng.next_below(pts.size())]);
  std::vector<double> d2(pts.size());
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (size_t i = 0; i < pts.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centroids) best = std::min(best, sq_dist(pts[i], c));
      d2[i] = best;
      total += best;
    }
    if (total <= 0.0) {
      // All remaining mass sits on chosen centroids; any point works.
      centroids.push_back(pts[rng.next_below(pts.size())]);
      continue;
    }
    double r = rng.next_double() * total;
    size_t pick = pts.size() - 1;
    for (size_t i = 0; i < pts.size(); ++i) {
      r -= d2[i];
      if (r <= 0.0) {
        pick = i;
        break;
      }
    }
    centroids.push_back(pts[pick]);
  }

  std::vector<int> assignment(pts.size(), 0);
  constexpr int kMaxIterations = 100;
  constexpr double kMoveTolerance = 1e-4;
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    // Assignment pass; ties go to the lower centroid index.
    double objective = 0.0;
    for (size_t i = 0; i < pts.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int c = 0; c < k; ++c) {
        const double d = sq_dist(pts[i], centroids[c]);
        if (d < best) {
          best = d;
          arg = c;
        }
      }
      assignment[i] = arg;
      objective += best;
    }
    res.objective_history.push_back(objective);

    // Update pass.
    std::vector<std::array<double, 2>> next(k, {0.0, 0.0});
    std::vector<size_t> counts(k, 0);
    for (size_t i = 0; i < pts.size(); ++i) {
      next[assignment[i]][0] += pts[i][0];
      next[assignment[i]][1] += pts[i][1];
      ++counts[assignment[i]];
    }
    double max_move = 0.0;
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Reseed to the point farthest from its assigned centroid.
        size_t far = 0;
        double far_dist = -1.0;
        for (size_t i = 0; i < pts.size(); ++i) {
          const double d = sq_dist(pts[i], centroids[assignment[i]]);
          if (d > far_dist) {
            far_dist = d;
            far = i;
          }
        }
        next[c] = pts[far];
      } else {
        next[c][0] /= static_cast<double>(counts[c]);
        next[c][1] /= static_cast<double>(counts[c]);
      }
      max_move = std::max(max_move, std::sqrt(sq_dist(next[c], centroids[c])));
    }
    centroids = std::move(next);
    if (max_move < kMoveTolerance) break;
  }

  // Final assignment against the settled centroids.
  for (size_t i = 0; i < pts.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int c = 0; c < k; ++c) {
      const double d = sq_dist(pts[i], centroids[c]);
      if (d < best) {
        best = d;
        arg = c;
      }
    }
    assignment[i] = arg;
  }

  res.assignment = std::move(assignment);
  res.centroids = std::move(centroids);
  return res;
}

}  // namespace

KmeansResult kmeans_regions(const std::vector<PoiRecord>& points, int k, uint64_t seed) {
  if (points.empty()) fail(Errc::EmptyInput, "no POI records");
  if (k <= 0) fail(Errc::KTooLarge, "k must be positive");
  std::vector<std::array<double, 2>> pts;
  pts.reserve(points.size());
  for (const PoiRecord& p : points) {
    if (p.latitude < -90.0 || p.latitude > 90.0 || p.longitude < -180.0 || p.longitude > 180.0)
      fail(Errc::ParseError, "coordinates out of bounds for item '" + p.item + "'");
    pts.push_back({p.latitude, p.longitude});
  }
  std::set<std::array<double, 2>> distinct(pts.begin(), pts.end());
  if (static_cast<size_t>(k) > distinct.size())
    fail(Errc::KTooLarge, "k exceeds the number of distinct points");
  return lloyd(pts, k, seed);
}

std::vector<HyperedgeSpec> poi_region_edges(const std::vector<PoiRecord>& points,
                                            const KmeansResult& clusters, const IdMap& idmap) {
  if (points.size() != clusters.assignment.size())
    fail(Errc::ShapeMismatch, "assignment does not match the points");
  std::map<int, std::set<uint32_t>> regions;
  for (size_t i = 0; i < points.size(); ++i)
    regions[clusters.assignment[i]].insert(idmap.item_node(points[i].item));
  std::vector<HyperedgeSpec> out;
  for (const auto& [cluster, members] : regions) {
    HyperedgeSpec spec;
    spec.tag = EdgeTag::PoiRegion;
    spec.members.assign(members.begin(), members.end());
    out.push_back(std::move(spec));
  }
  return out;
}

std::vector<HyperedgeSpec> mine_brand_fans(const std::vector<ReviewRecord>& reviews,
                                           double rating_threshold, int min_reviews,
                                           const IdMap& idmap) {
  if (rating_threshold <= 0 || min_reviews <= 0)
    fail(Errc::EmptyInput, "thresholds must be positive");
  struct Stat {
    int count = 0;
    double min_rating = std::numeric_limits<double>::infinity();
  };
  std::map<std::string, std::map<uint32_t, Stat>> per_brand;
  for (const ReviewRecord& r : reviews) {
    Stat& s = per_brand[r.brand][idmap.user_node(r.user)];
    ++s.count;
    s.min_rating = std::min(s.min_rating, r.rating);
  }
  std::vector<HyperedgeSpec> out;
  for (const auto& [brand, stats] : per_brand) {
    HyperedgeSpec spec;
    spec.tag = EdgeTag::FanCircle;
    for (const auto& [user, s] : stats)
      if (s.count >= min_reviews && s.min_rating >= rating_threshold)
        spec.members.push_back(user);
    if (spec.members.size() >= 2) out.push_back(std::move(spec));
  }
  return out;
}

std::vector<HyperedgeSpec> build_feature_hyperedges(const std::vector<ItemMeta>& meta,
                                                    const IdMap& idmap) {
  std::map<std::string, std::set<uint32_t>> brands, categories;
  for (const ItemMeta& m : meta) {
    if (m.brand.empty() && m.category.empty())
      fail(Errc::ParseError, "item '" + m.item + "' has neither brand nor category");
    const uint32_t node = idmap.item_node(m.item);
    if (!m.brand.empty()) brands[m.brand].insert(node);
    if (!m.category.empty()) categories[m.category].insert(node);
  }
  std::vector<HyperedgeSpec> out;
  auto emit = [&out](const std::map<std::string, std::set<uint32_t>>& groups, EdgeTag tag) {
    for (const auto& [key, members] : groups) {
      if (members.size() < 2) continue;
      HyperedgeSpec spec;
      spec.tag = tag;
      spec.members.assign(members.begin(), members.end());
      out.push_back(std::move(spec));
    }
  };
  emit(brands, EdgeTag::Brand);
  emit(categories, EdgeTag::Category);
  return out;
}

Hypergraph assemble(const IdMap& idmap, const std::vector<std::vector<HyperedgeSpec>>& pieces) {
  std::vector<HyperedgeSpec> edges;
  for (const auto& piece : pieces) edges.insert(edges.end(), piece.begin(), piece.end());
  if (edges.empty()) fail(Errc::EmptyHypergraph, "no recipe produced hyperedges");

  std::vector<bool> covered(idmap.node_count(), false);
  for (const HyperedgeSpec& spec : edges)
    for (uint32_t x : spec.members) covered.at(x) = true;
  for (uint32_t x = 0; x < idmap.node_count(); ++x) {
    if (covered[x]) continue;
    HyperedgeSpec spec;
    spec.tag = x < idmap.user_count() ? EdgeTag::SelfUser : EdgeTag::SelfItem;
    spec.members.push_back(x);
    edges.push_back(std::move(spec));
  }
  return Hypergraph::build(idmap.node_kinds(), std::move(edges));
}

}  // namespace genet
