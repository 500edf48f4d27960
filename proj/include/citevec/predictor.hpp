#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "citevec/corpus.hpp"
#include "citevec/subcategory.hpp"

namespace citevec {

// One real component per subcategory, in kSubcategoryCodes order.
using Components = std::array<double, kNumSubcategories>;

struct CitationVector {
  PatentId id = 0;
  int subcategory = 0;
  Components coords{};
  bool is_zero = true;
};

// Incoming citations weighted by 1/out_degree of the sender and summed per
// sender subcategory. Only senders granted by snap.as_of count; senders with
// an unmapped class contribute nothing. Summation runs over senders in
// ascending patent_id order. Unknown ids yield all zeros.
Components weighted_sums(const CitationGraph& graph, const Snapshot& snap, PatentId id);

// weighted_sums with the patent's own subcategory component set to zero.
Components raw_sums(const CitationGraph& graph, const Snapshot& snap, PatentId id);

// Euclidean normalisation. An all-zero input yields the zero vector with
// is_zero set. Components must be non-negative.
CitationVector citation_vector(const Components& raw, PatentId id = 0,
                               int subcategory = 0);

class VectorSet {
 public:
  Date as_of;
  std::optional<std::vector<int>> scope;
  // One row per mapped snapshot member, ascending patent_id.
  std::vector<CitationVector> rows;
  // Positions in `rows` of the non-zero vectors.
  std::vector<std::size_t> retained;
  // Members skipped because their class has no subcategory.
  std::size_t unmapped_members = 0;

  std::size_t retained_size() const { return retained.size(); }
  const CitationVector& retained_row(std::size_t i) const { return rows[retained[i]]; }
  std::vector<PatentId> retained_ids() const;
};

// Parallel over members; the result does not depend on the thread count.
VectorSet vector_set(const CitationGraph& graph, const Snapshot& snap);

// Euclidean distance. Throws ContractError if either vector is zero.
double distance(const CitationVector& u, const CitationVector& v);

// Condensed upper-triangle distances among retained vectors for rows
// [row_begin, row_end): row i contributes d(i, j) for j = i+1 .. n-1.
// Throws ContractError when the range exceeds the retained count.
std::vector<double> distance_rows(const VectorSet& set, std::size_t row_begin,
                                  std::size_t row_end);

// Offset of row `row` inside the full condensed array of n points.
constexpr std::size_t condensed_offset(std::size_t n, std::size_t row) {
  return row * n - row * (row + 1) / 2;
}

// Row-major point matrix with one id per row, the input of the clustering
// and layout routines.
struct PointMatrix {
  std::size_t dim = 0;
  std::vector<double> values;
  std::vector<PatentId> ids;

  std::size_t size() const { return ids.size(); }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values).subspan(i * dim, dim);
  }
  void push_back(PatentId id, std::span<const double> coords);
};

PointMatrix retained_points(const VectorSet& set);

}  // namespace citevec
