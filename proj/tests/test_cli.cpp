#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "genet/io.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using testutil::TempDir;

TEST_SUITE_BEGIN("cli");

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(GENET_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<char> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(run("") == 1);
  CHECK(run("bogus-subcommand") == 1);
  CHECK(run("gen") == 1);  // missing required kind
  CHECK(run("--help") == 0);
}

TEST_CASE("data errors exit with 2") {
  TempDir tmp;
  // pretrain without a built hypergraph
  CHECK(run("pretrain --out " + (tmp.path / "none").string()) == 2);

  // malformed input file, error names the line
  std::ofstream(tmp.path / "social.tsv") << "a\tb\nbroken-line\n";
  CHECK(run("build --social " + (tmp.path / "social.tsv").string() + " --out " +
            tmp.path.string()) == 2);
}

TEST_CASE("full pipeline over generated feedback data") {
  TempDir tmp;
  const std::string out = tmp.path.string();
  CHECK(run("gen feedback --users 40 --items 16 --communities 4 --per-user 6 --within-rate 0.9"
            " --seed 3 --out " + out) == 0);
  CHECK(fs::exists(tmp.path / "social.tsv"));
  CHECK(fs::exists(tmp.path / "item_meta.tsv"));
  CHECK(fs::exists(tmp.path / "interactions.tsv"));

  CHECK(run("build --social " + out + "/social.tsv --item-meta " + out + "/item_meta.tsv" +
            " --interactions " + out + "/interactions.tsv --out " + out) == 0);
  CHECK(fs::exists(tmp.path / "graph.tsv"));
  CHECK(fs::exists(tmp.path / "idmap.tsv"));

  CHECK(run("pretrain --epochs 4 --embedding-dim 8 --batch-size 64 --seed 3 --out " + out) == 0);
  CHECK(fs::exists(tmp.path / "nodes.gnet"));
  CHECK(fs::exists(tmp.path / "pretrain_loss.tsv"));

  CHECK(run("finetune --task topn --epochs 2 --interactions " + out +
            "/interactions.tsv --seed 3 --out " + out) == 0);
  CHECK(fs::exists(tmp.path / "topn_users.gnet"));
  CHECK(fs::exists(tmp.path / "topn_items.gnet"));

  CHECK(run("eval --task topn --interactions " + out + "/interactions.tsv --seed 3 --out " +
            out) == 0);
  CHECK(fs::exists(tmp.path / "topn_metrics.tsv"));

  SUBCASE("seq task produces its own dump set") {
    CHECK(run("finetune --task seq --epochs 2 --interactions " + out +
              "/interactions.tsv --seed 3 --out " + out) == 0);
    CHECK(fs::exists(tmp.path / "seq_users.gnet"));
    CHECK(fs::exists(tmp.path / "seq_gru.gnet"));
    CHECK(run("eval --task seq --interactions " + out + "/interactions.tsv --seed 3 --out " +
              out) == 0);
    CHECK(fs::exists(tmp.path / "seq_metrics.tsv"));
  }

  SUBCASE("missing checkpoint is a data error") {
    TempDir other;
    CHECK(run("gen planted --edges 4 --size 3 --out " + other.path.string()) == 0);
    CHECK(run("finetune --task topn --interactions " + out + "/interactions.tsv --out " +
              other.path.string()) == 2);
  }

  SUBCASE("rerunning pretrain is byte identical") {
    TempDir second;
    const std::string out2 = second.path.string();
    CHECK(run("build --social " + out + "/social.tsv --item-meta " + out + "/item_meta.tsv" +
              " --interactions " + out + "/interactions.tsv --out " + out2) == 0);
    CHECK(run("pretrain --epochs 4 --embedding-dim 8 --batch-size 64 --seed 3 --out " + out2) ==
          0);
    CHECK(read_bytes(tmp.path / "nodes.gnet") == read_bytes(second.path / "nodes.gnet"));
    CHECK(read_bytes(tmp.path / "theta.gnet") == read_bytes(second.path / "theta.gnet"));
  }
}

TEST_CASE("planted and blob generators write their fixtures") {
  TempDir tmp;
  CHECK(run("gen planted --edges 10 --size 10 --out " + tmp.path.string()) == 0);
  const genet::IdMap idmap = genet::io::read_idmap(tmp.path / "idmap.tsv");
  CHECK(idmap.user_count() == 100);
  const genet::Hypergraph g =
      genet::io::read_hypergraph(tmp.path / "graph.tsv", idmap.node_kinds());
  CHECK(g.edge_count() == 10);
  for (uint32_t x = 0; x < g.node_count(); ++x) CHECK(g.node_degree(x) == 1);

  TempDir tmp2;
  CHECK(run("gen blobs --clusters 2 --points 10 --separation 10 --out " + tmp2.path.string()) ==
        0);
  CHECK(fs::exists(tmp2.path / "poi.tsv"));
}

TEST_SUITE_END();
