#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "citevec/clustering.hpp"
#include "citevec/predictor.hpp"

namespace citevec {

// Undirected graph over point rows; node i is ids[i].
struct SimilarityGraph {
  std::vector<PatentId> ids;                     // ascending
  std::vector<std::vector<std::uint32_t>> adjacency;  // sorted, no self loops

  std::size_t size() const { return ids.size(); }
  std::size_t edge_count() const;
};

// Each point linked to its k nearest points (ties to the smaller patent id),
// then symmetrised. Throws ContractError unless 1 <= k < n.
SimilarityGraph knn_graph(const PointMatrix& points, std::size_t k);
SimilarityGraph knn_graph(const VectorSet& set, std::size_t k);

struct Bounds {
  double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;
};

struct Layout {
  std::vector<PatentId> ids;
  std::vector<double> x;
  std::vector<double> y;
  Bounds bounds;

  std::size_t size() const { return ids.size(); }
};

struct LayoutOptions {
  std::size_t iterations = 200;
  std::uint64_t seed = 1;
  // Above this node count repulsion is limited to pairs closer than twice
  // the ideal edge length, found through a grid.
  std::size_t exact_limit = 2000;
};

// Fruchterman-Reingold with ideal edge length 1 and a temperature cooling
// linearly to zero. The result is centred on its centroid. Throws
// ContractError for an empty graph.
Layout fruchterman_reingold(const SimilarityGraph& graph, const LayoutOptions& options = {});

struct ColorKey {
  std::vector<std::string> names;   // legend order
  std::vector<std::string> colors;  // CSS colours, parallel to names
};

// Distinct colours for n categories, cycling after ten.
std::vector<std::string> palette(std::size_t n);
// Red for the highlighted category, blue for everything else.
ColorKey emphasis_key(const std::string& highlighted, const std::string& rest);

// One circle per layout point plus one legend row per key entry.
// `category[i]` indexes key.names for point i.
void emit_scatter(const Layout& layout, std::span<const std::size_t> category,
                  const ColorKey& key, std::ostream& out);
void emit_scatter(const Layout& layout, std::span<const std::size_t> category,
                  const ColorKey& key, const std::filesystem::path& path);

// Merges are drawn in data coordinates (y = merge height) inside a scaling
// transform; subtrees within one cut cluster take that cluster's colour.
void emit_dendrogram(const Dendrogram& d, const Assignment& a, std::ostream& out);
void emit_dendrogram(const Dendrogram& d, const Assignment& a,
                     const std::filesystem::path& path);

}  // namespace citevec
