#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "citevec/corpus.hpp"
#include "citevec/predictor.hpp"

namespace citevec {

// Node numbering: leaves are 0..n-1 (ascending patent_id), the cluster made
// by merge i is node n+i.
struct Merge {
  std::size_t left = 0;   // smaller node index
  std::size_t right = 0;  // larger node index
  // Increase of the total within-cluster sum of squares caused by the merge.
  double height = 0.0;
  std::size_t size = 0;

  bool operator==(const Merge&) const = default;
};

struct Dendrogram {
  std::vector<PatentId> leaf_ids;  // ascending
  std::vector<Merge> merges;       // non-decreasing height, n_leaves - 1 entries

  std::size_t n_leaves() const { return leaf_ids.size(); }
  bool operator==(const Dendrogram&) const = default;
};

// Throws ContractError describing the first violated structural invariant.
void validate(const Dendrogram& d);

struct Assignment {
  std::vector<PatentId> ids;  // per leaf, ascending
  std::vector<int> labels;    // 0..k-1, numbered by ascending smallest patent_id
  std::size_t k = 0;
  std::optional<double> cut_height;

  bool operator==(const Assignment&) const = default;
};

// Ward clustering with the nearest-neighbour-chain algorithm. Rows are
// first ordered by patent id, so the result does not depend on input row
// order. Throws ContractError for fewer than 2 points or duplicate ids.
Dendrogram ward_cluster(const PointMatrix& points);
Dendrogram ward_cluster(const VectorSet& set);

// O(n^3) reference: global minimum pair each step on a full matrix updated
// with the Lance-Williams recurrence. Limited to kNaiveLimit points.
inline constexpr std::size_t kNaiveLimit = 2000;
Dendrogram ward_cluster_naive(const PointMatrix& points);
Dendrogram ward_cluster_naive(const VectorSet& set);

// Undo the last k-1 merges. Throws ContractError unless 1 <= k <= n_leaves.
Assignment cut(const Dendrogram& d, std::size_t k);

// Keep only the merges with height <= h.
Assignment cut_at_height(const Dendrogram& d, double h);

struct Branch {
  int label = 0;             // cluster label in cut(d, k)
  std::size_t root = 0;      // subtree root node
  double root_height = 0.0;  // 0 for a single leaf
  // Height of the merge that joins this branch to the rest of the tree; the
  // root's own height when k = 1.
  double separation = 0.0;
  std::size_t size = 0;
  std::vector<PatentId> leaves;  // ascending
};

// The k clusters of cut(d, k), most widely separated first (ties: smaller
// branch first, then lower label).
std::vector<Branch> main_branches(const Dendrogram& d, std::size_t k);

// Line-oriented merge table: "left<TAB>right<TAB>height<TAB>size" rows after a
// "# ward dendrogram; height = delta_ess" header. Heights are printed with
// round-trip precision.
void write_merge_table(const Dendrogram& d, std::ostream& out);
// One patent id per line, in leaf order.
void write_leaf_manifest(const Dendrogram& d, std::ostream& out);
// Throws InputError on malformed input or a structurally invalid tree.
Dendrogram read_dendrogram(std::istream& merge_table, std::istream& leaf_manifest);

// Nested-parenthesis (Newick) text with patent ids as leaf labels and
// branch lengths equal to the height difference to the parent.
std::string to_newick(const Dendrogram& d);

// Within-cluster sum of squares of a partition of the points.
double within_cluster_ss(const PointMatrix& points, const Assignment& a);

}  // namespace citevec
