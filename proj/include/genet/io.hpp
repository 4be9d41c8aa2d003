#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "genet/finetune.hpp"
#include "genet/hypergraph.hpp"
#include "genet/pretrain.hpp"
#include "genet/sideinfo.hpp"

namespace genet::io {

// --- side-information tables ------------------------------------------
// UTF-8 tab-separated, one record per line; blank lines and lines
// starting with '#' are ignored. Parse errors carry the line number.

std::vector<SocialEdge> parse_social_tsv(const std::filesystem::path& path);
std::vector<PoiRecord> parse_poi_tsv(const std::filesystem::path& path);
std::vector<ReviewRecord> parse_reviews_tsv(const std::filesystem::path& path);
std::vector<ItemMeta> parse_item_meta_tsv(const std::filesystem::path& path);

/// `user<TAB>item<TAB>timestamp`, external keys resolved through the map.
InteractionLog parse_interactions_tsv(const std::filesystem::path& path, const IdMap& idmap);

/// Registers every external key appearing in an interactions file.
void register_interaction_keys(const std::filesystem::path& path, IdMap& idmap);

// --- hypergraph + id map persistence -----------------------------------

/// `edge_id<TAB>tag<TAB>member,member,...` with internal node indices.
void write_hypergraph(const std::filesystem::path& path, const Hypergraph& g);
Hypergraph read_hypergraph(const std::filesystem::path& path,
                           const std::vector<NodeKind>& kinds);

/// `index<TAB>kind<TAB>external_key`
void write_idmap(const std::filesystem::path& path, const IdMap& idmap);
IdMap read_idmap(const std::filesystem::path& path);

// --- embedding dumps ----------------------------------------------------
// Binary: magic "GNET", version u32, rows u32, dim u32, then row-major
// little-endian float32. Total length must equal 16 + rows*dim*4.

void write_dump(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_dump(const std::filesystem::path& path);

/// Sidecar TSV mapping dump rows to external ids: `row<TAB>kind<TAB>key`.
void write_node_sidecar(const std::filesystem::path& path, const IdMap& idmap);

// --- loss history -------------------------------------------------------

void write_pretrain_history(const std::filesystem::path& path,
                            const std::vector<EpochLoss>& history);
void write_finetune_history(const std::filesystem::path& path,
                            const std::vector<double>& history);

// --- GRU parameter dump ---------------------------------------------------
// Stored as one dump of shape (6d + 3) x d: wz, uz, wr, ur, wh, uh
// stacked, then the three bias rows bz, br, bh.

Eigen::MatrixXd pack_gru(const GruParams& p);
GruParams unpack_gru(const Eigen::MatrixXd& m);

}  // namespace genet::io
