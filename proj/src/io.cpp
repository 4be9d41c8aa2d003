#include "genet/io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace genet::io {

namespace {

[[noreturn]] void parse_fail(const std::filesystem::path& path, size_t line,
                             const std::string& what) {
  fail(Errc::ParseError, path.string() + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  size_t start = 0;
  for (;;) {
    const size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

/// Calls fn(line_number, fields) for every data line.
template <typename F>
void for_each_record(const std::filesystem::path& path, F&& fn) {
  std::ifstream in(path);
  if (!in) fail(Errc::ParseError, "cannot open " + path.string());
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    fn(line_no, split_tabs(line));
  }
}

double parse_double(const std::filesystem::path& path, size_t line, const std::string& s) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    parse_fail(path, line, "bad number '" + s + "'");
  }
}

int64_t parse_int(const std::filesystem::path& path, size_t line, const std::string& s) {
  try {
    size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    parse_fail(path, line, "bad integer '" + s + "'");
  }
}

}  // namespace

std::vector<SocialEdge> parse_social_tsv(const std::filesystem::path& path) {
  std::vector<SocialEdge> out;
  for_each_record(path, [&](size_t line, const std::vector<std::string>& f) {
    if (f.size() != 2) parse_fail(path, line, "expected `user_a<TAB>user_b`");
    if (f[0].empty() || f[1].empty()) parse_fail(path, line, "empty user key");
    if (f[0] == f[1]) parse_fail(path, line, "self-friendship");
    out.push_back({f[0], f[1]});
  });
  return out;
}

std::vector<PoiRecord> parse_poi_tsv(const std::filesystem::path& path) {
  std::vector<PoiRecord> out;
  for_each_record(path, [&](size_t line, const std::vector<std::string>& f) {
    if (f.size() != 3) parse_fail(path, line, "expected `item<TAB>lat<TAB>lon`");
    PoiRecord r;
    r.item = f[0];
    r.latitude = parse_double(path, line, f[1]);
    r.longitude = parse_double(path, line, f[2]);
    if (r.latitude < -90.0 || r.latitude > 90.0) parse_fail(path, line, "latitude out of range");
    if (r.longitude < -180.0 || r.longitude > 180.0)
      parse_fail(path, line, "longitude out of range");
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<ReviewRecord> parse_reviews_tsv(const std::filesystem::path& path) {
  std::vector<ReviewRecord> out;
  for_each_record(path, [&](size_t line, const std::vector<std::string>& f) {
    if (f.size() != 5)
      parse_fail(path, line, "expected `user<TAB>item<TAB>brand<TAB>rating<TAB>timestamp`");
    ReviewRecord r;
    r.user = f[0];
    r.item = f[1];
    r.brand = f[2];
    r.rating = parse_double(path, line, f[3]);
    r.timestamp = parse_int(path, line, f[4]);
    if (r.rating < 1.0 || r.rating > 5.0) parse_fail(path, line, "rating outside [1,5]");
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<ItemMeta> parse_item_meta_tsv(const std::filesystem::path& path) {
  std::vector<ItemMeta> out;
  for_each_record(path, [&](size_t line, const std::vector<std::string>& f) {
    if (f.size() != 3) parse_fail(path, line, "expected `item<TAB>brand<TAB>category`");
    ItemMeta m;
    m.item = f[0];
    m.brand = f[1];
    m.category = f[2];
    if (m.brand.empty() && m.category.empty())
      parse_fail(path, line, "item needs a brand or a category");
    out.push_back(std::move(m));
  });
  return out;
}

InteractionLog parse_interactions_tsv(const std::filesystem::path& path, const IdMap& idmap) {
  InteractionLog out;
  for_each_record(path, [&](size_t line, const std::vector<std::string>& f) {
    if (f.size() != 3) parse_fail(path, line, "expected `user<TAB>item<TAB>timestamp`");
    InteractionRecord r;
    r.user = idmap.user_node(f[0]);
    r.item = idmap.item_node(f[1]);
    r.timestamp = parse_int(path, line, f[2]);
    out.push_back(r);
  });
  return out;
}

void register_interaction_keys(const std::filesystem::path& path, IdMap& idmap) {
  for_each_record(path, [&](size_t line, const std::vector<std::string>& f) {
    if (f.size() != 3) parse_fail(path, line, "expected `user<TAB>item<TAB>timestamp`");
    idmap.add_user(f[0]);
    idmap.add_item(f[1]);
  });
}

void write_hypergraph(const std::filesystem::path& path, const Hypergraph& g) {
  std::ofstream out(path);
  if (!out) fail(Errc::ParseError, "cannot write " + path.string());
  for (uint32_t e = 0; e < g.edge_count(); ++e) {
    out << e << '\t' << to_string(g.edge_tag(e)) << '\t';
    auto members = g.members_of(e);
    for (size_t i = 0; i < members.size(); ++i) {
      if (i > 0) out << ',';
      out << members[i];
    }
    out << '\n';
  }
}

Hypergraph read_hypergraph(const std::filesystem::path& path,
                           const std::vector<NodeKind>& kinds) {
  std::vector<HyperedgeSpec> edges;
  for_each_record(path, [&](size_t line, const std::vector<std::string>& f) {
    if (f.size() != 3) parse_fail(path, line, "expected `edge_id<TAB>tag<TAB>members`");
    if (parse_int(path, line, f[0]) != static_cast<int64_t>(edges.size()))
      parse_fail(path, line, "edge ids must be dense and in order");
    HyperedgeSpec spec;
    if (!edge_tag_from_string(f[1], spec.tag)) parse_fail(path, line, "unknown tag '" + f[1] + "'");
    std::stringstream members(f[2]);
    std::string token;
    while (std::getline(members, token, ','))
      spec.members.push_back(static_cast<uint32_t>(parse_int(path, line, token)));
    if (spec.members.empty()) parse_fail(path, line, "hyperedge has no members");
    edges.push_back(std::move(spec));
  });
  return Hypergraph::build(kinds, std::move(edges));
}

void write_idmap(const std::filesystem::path& path, const IdMap& idmap) {
  std::ofstream out(path);
  if (!out) fail(Errc::ParseError, "cannot write " + path.string());
  for (uint32_t x = 0; x < idmap.node_count(); ++x) {
    const auto [key, kind] = idmap.node_key(x);
    out << x << '\t' << to_string(kind) << '\t' << key << '\n';
  }
}

IdMap read_idmap(const std::filesystem::path& path) {
  IdMap idmap;
  bool item_seen = false;
  for_each_record(path, [&](size_t line, const std::vector<std::string>& f) {
    if (f.size() != 3) parse_fail(path, line, "expected `index<TAB>kind<TAB>key`");
    NodeKind kind;
    if (!node_kind_from_string(f[1], kind)) parse_fail(path, line, "unknown kind '" + f[1] + "'");
    if (kind == NodeKind::User) {
      if (item_seen) parse_fail(path, line, "users must precede items");
      idmap.add_user(f[2]);
    } else {
      item_seen = true;
      idmap.add_item(f[2]);
    }
  });
  return idmap;
}

namespace {

constexpr char kMagic[4] = {'G', 'N', 'E', 'T'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& out, uint32_t v) {
  const unsigned char bytes[4] = {static_cast<unsigned char>(v & 0xFF),
                                  static_cast<unsigned char>((v >> 8) & 0xFF),
                                  static_cast<unsigned char>((v >> 16) & 0xFF),
                                  static_cast<unsigned char>((v >> 24) & 0xFF)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

uint32_t get_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

}  // namespace

void write_dump(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::ParseError, "cannot write " + path.string());
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<uint32_t>(m.rows()));
  put_u32(out, static_cast<uint32_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const float v = static_cast<float>(m(r, c));
      uint32_t bits;
      std::memcpy(&bits, &v, 4);
      put_u32(out, bits);
    }
  }
}

Eigen::MatrixXd read_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::MissingCheckpoint, "missing dump " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    fail(Errc::BadDump, path.string() + ": bad magic");
  if (get_u32(bytes.data() + 4) != kVersion) fail(Errc::BadDump, path.string() + ": bad version");
  const uint32_t rows = get_u32(bytes.data() + 8);
  const uint32_t cols = get_u32(bytes.data() + 12);
  if (bytes.size() != 16 + static_cast<size_t>(rows) * cols * 4)
    fail(Errc::BadDump, path.string() + ": length does not match header");
  Eigen::MatrixXd m(rows, cols);
  const unsigned char* p = bytes.data() + 16;
  for (uint32_t r = 0; r < rows; ++r) {
    for (uint32_t c = 0; c < cols; ++c, p += 4) {
      const uint32_t bits = get_u32(p);
      float v;
      std::memcpy(&v, &bits, 4);
      m(r, c) = v;
    }
  }
  return m;
}

void write_node_sidecar(const std::filesystem::path& path, const IdMap& idmap) {
  std::ofstream out(path);
  if (!out) fail(Errc::ParseError, "cannot write " + path.string());
  for (uint32_t x = 0; x < idmap.node_count(); ++x) {
    const auto [key, kind] = idmap.node_key(x);
    out << x << '\t' << to_string(kind) << '\t' << key << '\n';
  }
}

void write_pretrain_history(const std::filesystem::path& path,
                            const std::vector<EpochLoss>& history) {
  std::ofstream out(path);
  if (!out) fail(Errc::ParseError, "cannot write " + path.string());
  out << "epoch\tloss_p\tloss_intra\tloss_inter\ttotal\n";
  out.precision(17);
  for (size_t e = 0; e < history.size(); ++e)
    out << e << '\t' << history[e].hyperlink << '\t' << history[e].intra << '\t'
        << history[e].inter << '\t' << history[e].total << '\n';
}

void write_finetune_history(const std::filesystem::path& path,
                            const std::vector<double>& history) {
  std::ofstream out(path);
  if (!out) fail(Errc::ParseError, "cannot write " + path.string());
  out << "epoch\tloss\n";
  out.precision(17);
  for (size_t e = 0; e < history.size(); ++e) out << e << '\t' << history[e] << '\n';
}

Eigen::MatrixXd pack_gru(const GruParams& p) {
  const Eigen::Index d = p.wz.rows();
  Eigen::MatrixXd m(6 * d + 3, d);
  m.middleRows(0 * d, d) = p.wz;
  m.middleRows(1 * d, d) = p.uz;
  m.middleRows(2 * d, d) = p.wr;
  m.middleRows(3 * d, d) = p.ur;
  m.middleRows(4 * d, d) = p.wh;
  m.middleRows(5 * d, d) = p.uh;
  m.row(6 * d + 0) = p.bz;
  m.row(6 * d + 1) = p.br;
  m.row(6 * d + 2) = p.bh;
  return m;
}

GruParams unpack_gru(const Eigen::MatrixXd& m) {
  const Eigen::Index d = m.cols();
  if (m.rows() != 6 * d + 3) fail(Errc::BadDump, "GRU dump has unexpected shape");
  GruParams p;
  p.wz = m.middleRows(0 * d, d);
  p.uz = m.middleRows(1 * d, d);
  p.wr = m.middleRows(2 * d, d);
  p.ur = m.middleRows(3 * d, d);
  p.wh = m.middleRows(4 * d, d);
  p.uh = m.middleRows(5 * d, d);
  p.bz = m.row(6 * d + 0);
  p.br = m.row(6 * d + 1);
  p.bh = m.row(6 * d + 2);
  return p;
}

}  // namespace genet::io
