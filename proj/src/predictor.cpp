#include "citevec/predictor.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

#include "citevec/errors.hpp"

namespace citevec {
namespace {

Components weighted_sums_at(const CitationGraph& graph, const Snapshot& snap,
                            NodeIndex target) {
  Components sums{};
  for (NodeIndex citer : graph.citers(target)) {
    const auto& sender = graph.patent(citer);
    if (sender.grant_date > snap.as_of || !sender.subcategory) continue;
    const auto degree = graph.out_degree(citer);
    assert(degree > 0);
    sums[*subcategory_index(*sender.subcategory)] += 1.0 / static_cast<double>(degree);
  }
  return sums;
}

void zero_own(Components& c, const std::optional<int>& subcategory) {
  if (subcategory) c[*subcategory_index(*subcategory)] = 0.0;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

Components weighted_sums(const CitationGraph& graph, const Snapshot& snap, PatentId id) {
  auto idx = graph.index_of(id);
  if (!idx) return Components{};
  return weighted_sums_at(graph, snap, *idx);
}

Components raw_sums(const CitationGraph& graph, const Snapshot& snap, PatentId id) {
  auto idx = graph.index_of(id);
  if (!idx) return Components{};
  auto c = weighted_sums_at(graph, snap, *idx);
  zero_own(c, graph.patent(*idx).subcategory);
  return c;
}

CitationVector citation_vector(const Components& raw, PatentId id, int subcategory) {
  CitationVector v;
  v.id = id;
  v.subcategory = subcategory;
  const double peak = *std::max_element(raw.begin(), raw.end());
  if (!(peak > 0.0)) return v;  // all zero

  // Scale by the largest component first: a 1-sparse input maps to exactly 1.
  Components scaled{};
  double sq = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    scaled[i] = raw[i] / peak;
    sq += scaled[i] * scaled[i];
  }
  const double norm = std::sqrt(sq);
  for (std::size_t i = 0; i < raw.size(); ++i) v.coords[i] = scaled[i] / norm;
  v.is_zero = false;
  return v;
}

std::vector<PatentId> VectorSet::retained_ids() const {
  std::vector<PatentId> ids;
  ids.reserve(retained.size());
  for (auto r : retained) ids.push_back(rows[r].id);
  return ids;
}

VectorSet vector_set(const CitationGraph& graph, const Snapshot& snap) {
  VectorSet set;
  set.as_of = snap.as_of;
  set.scope = snap.scope;

  std::vector<NodeIndex> mapped;
  mapped.reserve(snap.members.size());
  for (auto m : snap.members) {
    if (graph.patent(m).subcategory)
      mapped.push_back(m);
    else
      ++set.unmapped_members;
  }

  set.rows.resize(mapped.size());
  const auto n = static_cast<std::ptrdiff_t>(mapped.size());
#pragma omp parallel for schedule(dynamic, 256)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& p = graph.patent(mapped[i]);
    auto c = weighted_sums_at(graph, snap, mapped[i]);
    zero_own(c, p.subcategory);
    set.rows[i] = citation_vector(c, p.id, *p.subcategory);
  }
  for (std::size_t i = 0; i < set.rows.size(); ++i) {
    if (!set.rows[i].is_zero) set.retained.push_back(i);
  }
  return set;
}

double distance(const CitationVector& u, const CitationVector& v) {
  if (u.is_zero || v.is_zero) {
    throw ContractError("distance: zero citation vector for patent " +
                        std::to_string(u.is_zero ? u.id : v.id));
  }
  return std::sqrt(squared_distance(u.coords, v.coords));
}

std::vector<double> distance_rows(const VectorSet& set, std::size_t row_begin,
                                  std::size_t row_end) {
  const std::size_t n = set.retained_size();
  if (row_begin > row_end || row_end > n) {
    throw ContractError("distance_rows: range [" + std::to_string(row_begin) + ", " +
                        std::to_string(row_end) + ") outside " + std::to_string(n) +
                        " retained vectors");
  }
  if (row_begin == row_end) return {};
  const std::size_t base = condensed_offset(n, row_begin);
  std::vector<double> out(condensed_offset(n, row_end) - base);
  const auto lo = static_cast<std::ptrdiff_t>(row_begin);
  const auto hi = static_cast<std::ptrdiff_t>(row_end);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = lo; i < hi; ++i) {
    const auto& u = set.retained_row(static_cast<std::size_t>(i));
    double* dst = out.data() + (condensed_offset(n, static_cast<std::size_t>(i)) - base);
    for (std::size_t j = static_cast<std::size_t>(i) + 1; j < n; ++j)
      *dst++ = std::sqrt(squared_distance(u.coords, set.retained_row(j).coords));
  }
  return out;
}

void PointMatrix::push_back(PatentId id, std::span<const double> coords) {
  if (ids.empty() && dim == 0) dim = coords.size();
  if (coords.size() != dim) throw ContractError("PointMatrix: dimension mismatch");
  ids.push_back(id);
  values.insert(values.end(), coords.begin(), coords.end());
}

PointMatrix retained_points(const VectorSet& set) {
  PointMatrix m;
  m.dim = kNumSubcategories;
  m.ids.reserve(set.retained_size());
  m.values.reserve(set.retained_size() * kNumSubcategories);
  for (std::size_t i = 0; i < set.retained_size(); ++i) {
    const auto& v = set.retained_row(i);
    m.ids.push_back(v.id);
    m.values.insert(m.values.end(), v.coords.begin(), v.coords.end());
  }
  return m;
}

}  // namespace citevec
