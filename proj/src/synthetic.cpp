#include "genet/synthetic.hpp"

#include <string>

#include "genet/rng.hpp"

namespace genet::synthetic {

PlantedData planted(int edges, int edge_size) {
  if (edges <= 0 || edge_size <= 0) fail(Errc::EmptyInput, "planted parameters must be positive");
  PlantedData data;
  std::vector<HyperedgeSpec> specs;
  specs.reserve(edges);
  for (int e = 0; e < edges; ++e) {
    HyperedgeSpec spec;
    spec.tag = EdgeTag::SocialCircle;
    for (int i = 0; i < edge_size; ++i) {
      const uint32_t node = data.idmap.add_user("u" + std::to_string(e * edge_size + i));
      spec.members.push_back(node);
    }
    specs.push_back(std::move(spec));
  }
  data.graph = Hypergraph::build(data.idmap.node_kinds(), std::move(specs));
  return data;
}

BlobsData blobs(int clusters, int points_per_cluster, double separation, double radius,
                uint64_t seed) {
  if (clusters <= 0 || points_per_cluster <= 0 || separation <= 0 || radius <= 0)
    fail(Errc::EmptyInput, "blob parameters must be positive");
  BlobsData data;
  KeyedRng rng(seed, "blobs");
  for (int c = 0; c < clusters; ++c) {
    // Centers on a diagonal, clipped to valid coordinates.
    const double lat = std::min(89.0, -45.0 + c * separation);
    const double lon = std::min(179.0, -90.0 + c * separation);
    for (int i = 0; i < points_per_cluster; ++i) {
      PoiRecord p;
      p.item = "p" + std::to_string(c * points_per_cluster + i);
      p.latitude = lat + (2.0 * rng.next_double() - 1.0) * radius;
      p.longitude = lon + (2.0 * rng.next_double() - 1.0) * radius;
      data.points.push_back(std::move(p));
      data.labels.push_back(c);
    }
  }
  return data;
}

FeedbackData feedback(int users, int items, int communities, int per_user, double within_rate,
                      uint64_t seed) {
  if (users <= 0 || items <= 0 || communities <= 0 || per_user <= 0)
    fail(Errc::EmptyInput, "feedback parameters must be positive");
  if (communities > users || communities > items)
    fail(Errc::EmptyInput, "need at least one user and item per community");

  FeedbackData data;
  data.communities = communities;
  for (int u = 0; u < users; ++u) {
    data.idmap.add_user("u" + std::to_string(u));
    data.user_community.push_back(u % communities);
  }
  for (int i = 0; i < items; ++i) {
    data.idmap.add_item("i" + std::to_string(i));
    data.item_community.push_back(i % communities);
  }

  // Friendships with the next two community mates; circles stay inside
  // the community because steps are multiples of the community count.
  for (int u = 0; u < users; ++u) {
    for (int step = 1; step <= 2; ++step) {
      const int v = u + step * communities;
      if (v < users)
        data.social.push_back({"u" + std::to_string(u), "u" + std::to_string(v)});
    }
  }

  for (int i = 0; i < items; ++i)
    data.meta.push_back({"i" + std::to_string(i), "", "cat" + std::to_string(i % communities)});

  // Per-community item pools for the aligned draws.
  std::vector<std::vector<uint32_t>> pool(communities);
  for (int i = 0; i < items; ++i)
    pool[i % communities].push_back(data.idmap.item_node("i" + std::to_string(i)));

  KeyedRng rng(seed, "feedback");
  for (int u = 0; u < users; ++u) {
    const uint32_t user_node = data.idmap.user_node("u" + std::to_string(u));
    const auto& aligned = pool[u % communities];
    for (int t = 0; t < per_user; ++t) {
      InteractionRecord r;
      r.user = user_node;
      r.timestamp = t;
      if (rng.next_double() < within_rate) {
        r.item = aligned[rng.next_below(aligned.size())];
      } else {
        r.item = data.idmap.item_node("i" + std::to_string(rng.next_below(items)));
      }
      data.interactions.push_back(r);
    }
  }

  std::vector<std::vector<HyperedgeSpec>> pieces;
  pieces.push_back(build_social_circles(data.social, data.idmap));
  pieces.push_back(build_feature_hyperedges(data.meta, data.idmap));
  data.graph = assemble(data.idmap, pieces);
  return data;
}

}  // namespace genet::synthetic
