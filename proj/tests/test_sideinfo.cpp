#include <doctest.h>

#include <map>
#include <set>

#include "genet/sideinfo.hpp"
#include "test_util.hpp"

using namespace genet;

TEST_SUITE_BEGIN("sideinfo");

namespace {

IdMap users_items(std::initializer_list<const char*> users,
                  std::initializer_list<const char*> items = {}) {
  IdMap idmap;
  for (const char* u : users) idmap.add_user(u);
  for (const char* i : items) idmap.add_item(i);
  return idmap;
}

std::set<uint32_t> member_set(const HyperedgeSpec& spec) {
  return {spec.members.begin(), spec.members.end()};
}

}  // namespace

TEST_CASE("social circles around each ego") {
  const IdMap idmap = users_items({"D", "V", "A"});
  const std::vector<SocialEdge> edges{{"D", "V"}, {"D", "A"}};
  const auto circles = build_social_circles(edges, idmap);

  REQUIRE(circles.size() == 3);
  std::map<uint32_t, std::set<uint32_t>> by_ego;
  for (const auto& c : circles) by_ego[c.members.front()] = member_set(c);
  CHECK(by_ego[idmap.user_node("D")] ==
        std::set<uint32_t>{idmap.user_node("D"), idmap.user_node("V"), idmap.user_node("A")});
  CHECK(by_ego[idmap.user_node("V")] ==
        std::set<uint32_t>{idmap.user_node("V"), idmap.user_node("D")});
  CHECK(by_ego[idmap.user_node("A")] ==
        std::set<uint32_t>{idmap.user_node("A"), idmap.user_node("D")});
  for (const auto& c : circles) CHECK(c.tag == EdgeTag::SocialCircle);

  SUBCASE("no edges, no circles") {
    CHECK(build_social_circles({}, idmap).empty());
  }

  SUBCASE("duplicate listings collapse") {
    const std::vector<SocialEdge> dup{{"D", "V"}, {"V", "D"}, {"D", "V"}, {"D", "A"}};
    const auto again = build_social_circles(dup, idmap);
    REQUIRE(again.size() == circles.size());
    for (size_t i = 0; i < again.size(); ++i)
      CHECK(member_set(again[i]) == member_set(circles[i]));
  }

  SUBCASE("ego is in its own circle with all friends") {
    for (const auto& c : circles) {
      const uint32_t ego = c.members.front();
      CHECK(member_set(c).count(ego) == 1);
      CHECK(c.members.size() == 1 + (ego == idmap.user_node("D") ? 2 : 1));
    }
  }

  CHECK_FAILS_WITH(Errc::UnknownUser, build_social_circles({{"D", "nobody"}}, idmap));
}

TEST_CASE("kmeans separates obvious blobs") {
  std::vector<PoiRecord> points{{"a", 0.0, 0.0}, {"b", 0.0, 0.001}, {"c", 10.0, 10.0},
                                {"d", 10.0, 10.001}};
  const KmeansResult res = kmeans_regions(points, 2, 7);
  CHECK(res.assignment[0] == res.assignment[1]);
  CHECK(res.assignment[2] == res.assignment[3]);
  CHECK(res.assignment[0] != res.assignment[2]);
}

TEST_CASE("kmeans single cluster centroid is the mean") {
  std::vector<PoiRecord> points{{"a", 1.0, 2.0}, {"b", 3.0, 4.0}, {"c", 5.0, 0.0}};
  const KmeansResult res = kmeans_regions(points, 1, 3);
  CHECK(res.centroids[0][0] == doctest::Approx(3.0));
  CHECK(res.centroids[0][1] == doctest::Approx(2.0));
}

TEST_CASE("kmeans is deterministic and monotone") {
  std::vector<PoiRecord> points;
  KeyedRng rng(99, "points");
  for (int i = 0; i < 200; ++i)
    points.push_back({"p" + std::to_string(i), rng.next_double() * 80.0 - 40.0,
                      rng.next_double() * 160.0 - 80.0});

  const KmeansResult a = kmeans_regions(points, 5, 1234);
  const KmeansResult b = kmeans_regions(points, 5, 1234);
  CHECK(a.assignment == b.assignment);
  CHECK(a.centroids == b.centroids);

  for (size_t i = 1; i < a.objective_history.size(); ++i)
    CHECK(a.objective_history[i] <= a.objective_history[i - 1] + 1e-9);

  const KmeansResult c = kmeans_regions(points, 5, 4321);
  (void)c;  // different seed must still terminate
}

TEST_CASE("kmeans input validation") {
  CHECK_FAILS_WITH(Errc::EmptyInput, kmeans_regions({}, 2, 0));
  std::vector<PoiRecord> two{{"a", 0, 0}, {"b", 0, 0}};
  CHECK_FAILS_WITH(Errc::KTooLarge, kmeans_regions(two, 2, 0));  // one distinct point
}

TEST_CASE("fan mining follows the consistent-high-rating rule") {
  IdMap idmap = users_items({"u1", "u2"}, {"i1", "i2"});

  SUBCASE("two high ratings make a fan") {
    const std::vector<ReviewRecord> reviews{
        {"u1", "i1", "B", 5.0, 1}, {"u1", "i2", "B", 5.0, 2},
        {"u2", "i1", "B", 5.0, 3}, {"u2", "i2", "B", 4.5, 4}};
    const auto fans = mine_brand_fans(reviews, 4.0, 2, idmap);
    REQUIRE(fans.size() == 1);
    CHECK(fans[0].tag == EdgeTag::FanCircle);
    CHECK(member_set(fans[0]) ==
          std::set<uint32_t>{idmap.user_node("u1"), idmap.user_node("u2")});
  }

  SUBCASE("one low rating breaks consistency") {
    const std::vector<ReviewRecord> reviews{
        {"u1", "i1", "B", 5.0, 1}, {"u1", "i2", "B", 2.0, 2},
        {"u2", "i1", "B", 5.0, 3}, {"u2", "i2", "B", 5.0, 4}};
    // u1 is out, and a single fan cannot form a circle.
    CHECK(mine_brand_fans(reviews, 4.0, 2, idmap).empty());
  }
}

TEST_CASE("fan mining equals the brute-force filter") {
  const int n_users = 10, n_items = 6, n_brands = 3, n_reviews = 400;
  IdMap idmap;
  for (int u = 0; u < n_users; ++u) idmap.add_user("u" + std::to_string(u));
  for (int i = 0; i < n_items; ++i) idmap.add_item("i" + std::to_string(i));

  KeyedRng rng(5, "reviews");
  std::vector<ReviewRecord> reviews;
  for (int r = 0; r < n_reviews; ++r) {
    ReviewRecord rec;
    rec.user = "u" + std::to_string(rng.next_below(n_users));
    rec.item = "i" + std::to_string(rng.next_below(n_items));
    rec.brand = "b" + std::to_string(rng.next_below(n_brands));
    rec.rating = 1.0 + 4.0 * rng.next_double();
    rec.timestamp = r;
    reviews.push_back(std::move(rec));
  }
  const double threshold = 3.5;
  const int min_reviews = 3;

  // Oracle: exhaustive filter over all (brand, user) pairs.
  std::map<std::string, std::set<uint32_t>> want;
  for (int b = 0; b < n_brands; ++b) {
    const std::string brand = "b" + std::to_string(b);
    for (int u = 0; u < n_users; ++u) {
      const std::string user = "u" + std::to_string(u);
      int count = 0;
      bool all_high = true;
      for (const auto& r : reviews)
        if (r.brand == brand && r.user == user) {
          ++count;
          all_high = all_high && r.rating >= threshold;
        }
      if (count >= min_reviews && all_high) want[brand].insert(idmap.user_node(user));
    }
  }
  for (auto it = want.begin(); it != want.end();)
    it = it->second.size() < 2 ? want.erase(it) : std::next(it);

  const auto fans = mine_brand_fans(reviews, threshold, min_reviews, idmap);
  REQUIRE(fans.size() == want.size());
  std::set<std::set<uint32_t>> got_sets, want_sets;
  for (const auto& f : fans) got_sets.insert(member_set(f));
  for (const auto& [brand, members] : want) want_sets.insert(members);
  CHECK(got_sets == want_sets);
}

TEST_CASE("feature hyperedges per brand and category") {
  IdMap idmap = users_items({}, {"i0", "i1"});
  const std::vector<ItemMeta> meta{{"i0", "B1", "C1"}, {"i1", "B1", "C2"}};
  const auto edges = build_feature_hyperedges(meta, idmap);
  REQUIRE(edges.size() == 1);  // categories are singletons and drop
  CHECK(edges[0].tag == EdgeTag::Brand);
  CHECK(edges[0].members.size() == 2);

  SUBCASE("shared category collects every item") {
    const std::vector<ItemMeta> same{{"i0", "", "C"}, {"i1", "", "C"}};
    const auto cat = build_feature_hyperedges(same, idmap);
    REQUIRE(cat.size() == 1);
    CHECK(cat[0].tag == EdgeTag::Category);
    CHECK(cat[0].members.size() == 2);
  }

  SUBCASE("metadata with neither field is rejected") {
    CHECK_FAILS_WITH(Errc::ParseError, build_feature_hyperedges({{"i0", "", ""}}, idmap));
  }
}

TEST_CASE("assemble unions pieces and covers leftovers") {
  IdMap idmap = users_items({"u0", "u1"}, {"i0", "i1"});
  const auto social = build_social_circles({{"u0", "u1"}}, idmap);

  SUBCASE("social plus items uncovered adds singletons") {
    const Hypergraph g = assemble(idmap, {social});
    CHECK(g.node_count() == 4);
    CHECK(g.edge_count() == social.size() + 2);  // item singletons
    size_t selfs = 0;
    for (uint32_t e = 0; e < g.edge_count(); ++e)
      if (g.edge_tag(e) == EdgeTag::SelfItem) ++selfs;
    CHECK(selfs == 2);
    for (uint32_t x = 0; x < g.node_count(); ++x) CHECK(g.node_degree(x) >= 1);
  }

  SUBCASE("tags from both recipes present") {
    const auto features =
        build_feature_hyperedges({{"i0", "", "C"}, {"i1", "", "C"}}, idmap);
    const Hypergraph g = assemble(idmap, {social, features});
    std::set<EdgeTag> tags;
    for (uint32_t e = 0; e < g.edge_count(); ++e) tags.insert(g.edge_tag(e));
    CHECK(tags.count(EdgeTag::SocialCircle) == 1);
    CHECK(tags.count(EdgeTag::Category) == 1);

    // Piece counts add up (plus singletons for uncovered nodes).
    size_t covered = 0;
    std::set<uint32_t> seen;
    for (const auto& piece : {social, features})
      for (const auto& spec : piece)
        for (uint32_t x : spec.members) seen.insert(x);
    covered = seen.size();
    CHECK(g.edge_count() == social.size() + features.size() + (4 - covered));
  }

  SUBCASE("no pieces at all is an error") {
    CHECK_FAILS_WITH(Errc::EmptyHypergraph, assemble(idmap, {}));
  }
}

TEST_CASE("recipe hyperedges always have two or more members") {
  IdMap idmap = users_items({"a", "b", "c"}, {"x", "y"});
  for (const auto& spec : build_social_circles({{"a", "b"}, {"b", "c"}}, idmap))
    CHECK(spec.members.size() >= 2);
  for (const auto& spec : build_feature_hyperedges({{"x", "B", ""}, {"y", "B", ""}}, idmap))
    CHECK(spec.members.size() >= 2);
}

TEST_SUITE_END();
