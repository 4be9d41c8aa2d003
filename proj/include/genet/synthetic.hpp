#pragma once

#include <cstdint>
#include <vector>

#include "genet/hypergraph.hpp"
#include "genet/sideinfo.hpp"

namespace genet::synthetic {

struct PlantedData {
  IdMap idmap;
  Hypergraph graph;
};

/// m disjoint hyperedges of n user nodes each; every node has degree 1.
PlantedData planted(int edges, int edge_size);

struct BlobsData {
  std::vector<PoiRecord> points;
  std::vector<int> labels;  // generating cluster per point
};

/// Well-separated square clusters of POI coordinates.
BlobsData blobs(int clusters, int points_per_cluster, double separation, double radius,
                uint64_t seed);

struct FeedbackData {
  IdMap idmap;
  Hypergraph graph;  // social circles + item categories, singleton fallback
  std::vector<SocialEdge> social;
  std::vector<ItemMeta> meta;
  InteractionLog interactions;
  std::vector<int> user_community;
  std::vector<int> item_community;
  int communities = 0;
};

/// Users and items partitioned into aligned communities; interactions
/// stay within the aligned item community at the given rate.
FeedbackData feedback(int users, int items, int communities, int per_user, double within_rate,
                      uint64_t seed);

}  // namespace genet::synthetic
