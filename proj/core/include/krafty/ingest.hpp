#pragma once

#include "krafty/joint.hpp"
#include "krafty/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace krafty {

/// Weighted directed network over a fixed, ordered vertex set.
/// adjacency(i, j) is the edge weight from vertex i to vertex j.
struct WeightedNetwork {
  std::vector<std::string> vertex_names;
  Matrix adjacency;
};

/// Builds a network from a `source,target,weight` CSV (header required).
/// Duplicate edges are summed, missing pairs are zero. With a universe the
/// adjacency is indexed by it and unknown vertices are an error; without
/// one the sorted union of observed names is used.
WeightedNetwork load_edge_list(const std::filesystem::path& path,
                               const std::optional<std::vector<std::string>>& vertex_universe = {});

/// Writes the nonzero edges back out in the same CSV layout.
void save_edge_list(const std::filesystem::path& path, const WeightedNetwork& net);

std::vector<std::string> load_vertex_universe(const std::filesystem::path& path);

struct DirectedEmbeddings {
  Embedding exporter;  // unit-normalized rows of U Sigma^{1/2}
  Embedding importer;  // unit-normalized rows of V Sigma^{1/2}
  /// Vertices whose exporter or importer row was all-zero (isolated in that
  /// role); their embedding rows are left at zero.
  std::vector<int> flagged;
};

/// Rank-d spectral embeddings of the adjacency matrix, scaled by the square
/// roots of the singular values and row-normalized to unit length.
DirectedEmbeddings exporter_importer_embeddings(const WeightedNetwork& net, Index d);

/// Profile-likelihood elbow of the adjacency spectrum, as a starting point
/// for choosing the per-view embedding dimension.
int suggest_embedding_dimension(const WeightedNetwork& net, int which = 1);

enum class TradeRole { exporter, importer };

struct TradeView {
  WeightedNetwork net;
  int d = 2;  // embedding dimension
  int k = 2;  // per-view cluster count
  TradeRole role = TradeRole::exporter;
};

struct TradeResult {
  JointResult joint;                        // over the clustered vertices
  std::vector<Assignment> view_assignments; // per-view inputs, same vertex order
  std::vector<std::string> vertex_names;    // clustered vertices, network order
  std::vector<std::string> excluded;        // isolated vertices, reported separately
};

/// Full pipeline: per view, embed in d dimensions, k-means into k clusters,
/// then joint clustering of the assignment inputs. Vertices isolated in any
/// used role are excluded from clustering and reported.
TradeResult trade_pipeline(const std::vector<TradeView>& views,
                           std::optional<int> k, Method method,
                           std::uint64_t seed,
                           const JointOptions& base_opts = {});

std::string to_string(TradeRole role);

}  // namespace krafty
