#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "genet/hypergraph.hpp"

namespace genet {

struct SocialEdge {
  std::string user_a;
  std::string user_b;
};

struct PoiRecord {
  std::string item;
  double latitude = 0.0;   // degrees, [-90, 90]
  double longitude = 0.0;  // degrees, [-180, 180]
};

struct ReviewRecord {
  std::string user;
  std::string item;
  std::string brand;
  double rating = 0.0;  // [1, 5]
  int64_t timestamp = 0;
};

struct ItemMeta {
  std::string item;
  std::string brand;     // empty = absent
  std::string category;  // empty = absent
};

/// Bijection between external string keys and dense indices, kept per
/// kind. Global node indices place all users before all items, so
/// register every key before asking for node ids.
class IdMap {
 public:
  uint32_t add_user(const std::string& key);
  uint32_t add_item(const std::string& key);

  bool has_user(const std::string& key) const { return users_.count(key) > 0; }
  bool has_item(const std::string& key) const { return items_.count(key) > 0; }

  /// Global node index; throws UnknownUser / UnknownItem.
  uint32_t user_node(const std::string& key) const;
  uint32_t item_node(const std::string& key) const;

  size_t user_count() const { return user_keys_.size(); }
  size_t item_count() const { return item_keys_.size(); }
  size_t node_count() const { return user_count() + item_count(); }

  const std::string& user_key(uint32_t ordinal) const { return user_keys_[ordinal]; }
  const std::string& item_key(uint32_t ordinal) const { return item_keys_[ordinal]; }

  /// Key and kind for a global node index.
  std::pair<std::string, NodeKind> node_key(uint32_t node) const;

  std::vector<NodeKind> node_kinds() const;

 private:
  std::unordered_map<std::string, uint32_t> users_;
  std::unordered_map<std::string, uint32_t> items_;
  std::vector<std::string> user_keys_;
  std::vector<std::string> item_keys_;
};

/// One hyperedge per user with at least one friend: the ego plus its
/// friends. Friendships are treated as undirected.
std::vector<HyperedgeSpec> build_social_circles(const std::vector<SocialEdge>& edges,
                                                const IdMap& idmap);

struct KmeansResult {
  std::vector<int> assignment;                   // per input record
  std::vector<std::array<double, 2>> centroids;  // (lat, lon)
  std::vector<double> objective_history;         // after each assignment pass
};

/// Lloyd's algorithm with k-means++ seeding, plain Euclidean distance
/// on (lat, lon) degrees. Stops when the largest centroid movement
/// drops below 1e-4 or after 100 iterations; empty clusters are
/// reseeded to the point farthest from its assigned centroid.
KmeansResult kmeans_regions(const std::vector<PoiRecord>& points, int k, uint64_t seed);

/// One PoiRegion hyperedge per nonempty cluster.
std::vector<HyperedgeSpec> poi_region_edges(const std::vector<PoiRecord>& points,
                                            const KmeansResult& clusters, const IdMap& idmap);

/// Fans of a brand: users with at least min_reviews reviews of the
/// brand, all rated at or above rating_threshold. One FanCircle per
/// brand with at least two fans.
std::vector<HyperedgeSpec> mine_brand_fans(const std::vector<ReviewRecord>& reviews,
                                           double rating_threshold, int min_reviews,
                                           const IdMap& idmap);

/// One Brand hyperedge per distinct brand and one Category hyperedge
/// per distinct category; hyperedges with fewer than two members drop.
std::vector<HyperedgeSpec> build_feature_hyperedges(const std::vector<ItemMeta>& meta,
                                                    const IdMap& idmap);

/// Union of the recipe outputs over the shared IdMap, with a singleton
/// self-hyperedge for every node no recipe covered.
Hypergraph assemble(const IdMap& idmap, const std::vector<std::vector<HyperedgeSpec>>& pieces);

}  // namespace genet
