#include "citevec/clustering.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_map>

#include "citevec/errors.hpp"

namespace citevec {
namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

double squared_distance(const double* a, const double* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Rows reordered by ascending id.
PointMatrix sorted_by_id(const PointMatrix& points) {
  if (points.size() < 2)
    throw ContractError("ward clustering needs at least 2 points, got " +
                        std::to_string(points.size()));
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return points.ids[a] < points.ids[b];
  });
  PointMatrix out;
  out.dim = points.dim;
  out.ids.reserve(points.size());
  out.values.reserve(points.values.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i > 0 && points.ids[order[i]] == points.ids[order[i - 1]])
      throw ContractError("ward clustering: duplicate id " +
                          std::to_string(points.ids[order[i]]));
    out.ids.push_back(points.ids[order[i]]);
    auto r = points.row(order[i]);
    out.values.insert(out.values.end(), r.begin(), r.end());
  }
  return out;
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  // Returns the surviving root.
  std::size_t unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return a;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
    return a;
  }

 private:
  std::vector<std::size_t> parent_;
};

struct SlotMerge {
  std::size_t a = 0;  // a leaf contained in each side
  std::size_t b = 0;
  double height = 0.0;
};

// Orders chain merges by height and renumbers nodes.
Dendrogram relabel(std::vector<PatentId> ids, std::vector<SlotMerge> raw) {
  const std::size_t n = ids.size();
  std::vector<std::size_t> order(raw.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return raw[x].height < raw[y].height;
  });

  Dendrogram d;
  d.leaf_ids = std::move(ids);
  d.merges.reserve(raw.size());
  DisjointSets sets(n);
  std::vector<std::size_t> node_of(n), size_of(n, 1);
  std::iota(node_of.begin(), node_of.end(), 0);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& m = raw[order[i]];
    const auto ra = sets.find(m.a);
    const auto rb = sets.find(m.b);
    const auto na = node_of[ra], nb = node_of[rb];
    const auto size = size_of[ra] + size_of[rb];
    d.merges.push_back({std::min(na, nb), std::max(na, nb), m.height, size});
    const auto r = sets.unite(ra, rb);
    node_of[r] = n + i;
    size_of[r] = size;
  }
  return d;
}

Dendrogram nn_chain(const PointMatrix& pts) {
  const std::size_t n = pts.size();
  const std::size_t dim = pts.dim;
  std::vector<double> centroid = pts.values;
  std::vector<std::size_t> size(n, 1);
  std::vector<double> made_at(n, 0.0);  // height of the merge that formed the slot
  std::vector<std::size_t> active(n);
  std::iota(active.begin(), active.end(), 0);

  auto ward = [&](std::size_t a, std::size_t b) {
    const double na = static_cast<double>(size[a]);
    const double nb = static_cast<double>(size[b]);
    return (na * nb / (na + nb)) *
           squared_distance(&centroid[a * dim], &centroid[b * dim], dim);
  };

  std::vector<SlotMerge> raw;
  raw.reserve(n - 1);
  std::vector<std::size_t> chain;
  chain.reserve(n);

  while (active.size() > 1) {
    if (chain.empty()) chain.push_back(active.front());
    std::size_t a = 0, b = 0;
    double best = 0.0;
    while (true) {
      a = chain.back();
      const std::size_t prev = chain.size() >= 2 ? chain[chain.size() - 2] : kNone;

      best = std::numeric_limits<double>::infinity();
      b = kNone;
      const auto count = static_cast<std::ptrdiff_t>(active.size());
#pragma omp parallel if (count > 4096)
      {
        double local = std::numeric_limits<double>::infinity();
        std::size_t local_slot = kNone;
#pragma omp for schedule(static) nowait
        for (std::ptrdiff_t i = 0; i < count; ++i) {
          const std::size_t s = active[static_cast<std::size_t>(i)];
          if (s == a) continue;
          const double dist = ward(a, s);
          if (dist < local || (dist == local && s < local_slot)) {
            local = dist;
            local_slot = s;
          }
        }
#pragma omp critical(citevec_nn_chain)
        if (local < best || (local == best && local_slot < b)) {
          best = local;
          b = local_slot;
        }
      }
      // A tie with the previous chain element must resolve to it, or the
      // chain could cycle.
      if (prev != kNone && ward(a, prev) <= best) {
        b = prev;
        best = ward(a, prev);
      }
      if (b == prev) break;
      chain.push_back(b);
    }
    chain.pop_back();
    chain.pop_back();

    const std::size_t lo = std::min(a, b), hi = std::max(a, b);
    // Heights along a root path cannot decrease; clamp rounding noise.
    const double height = std::max({best, made_at[lo], made_at[hi]});
    raw.push_back({lo, hi, height});

    const double nl = static_cast<double>(size[lo]);
    const double nh = static_cast<double>(size[hi]);
    for (std::size_t j = 0; j < dim; ++j) {
      centroid[lo * dim + j] =
          (nl * centroid[lo * dim + j] + nh * centroid[hi * dim + j]) / (nl + nh);
    }
    size[lo] += size[hi];
    made_at[lo] = height;
    active.erase(std::lower_bound(active.begin(), active.end(), hi));
  }
  return relabel(pts.ids, std::move(raw));
}

// Leaf -> component representative after applying the first `applied` merges.
std::vector<std::size_t> components(const Dendrogram& d, std::size_t applied,
                                    DisjointSets& sets) {
  const std::size_t n = d.n_leaves();
  // Leaf representing each node, so a merge can be applied on leaves.
  std::vector<std::size_t> leaf_of(n + d.merges.size());
  std::iota(leaf_of.begin(), leaf_of.begin() + static_cast<std::ptrdiff_t>(n), 0);
  for (std::size_t i = 0; i < d.merges.size(); ++i) {
    leaf_of[n + i] = leaf_of[d.merges[i].left];
    if (i < applied) sets.unite(leaf_of[d.merges[i].left], leaf_of[d.merges[i].right]);
  }
  std::vector<std::size_t> comp(n);
  for (std::size_t i = 0; i < n; ++i) comp[i] = sets.find(i);
  return comp;
}

Assignment assignment_from(const Dendrogram& d, std::size_t applied) {
  const std::size_t n = d.n_leaves();
  DisjointSets sets(n);
  auto comp = components(d, applied, sets);
  // Roots are the smallest leaf of each component, so scanning leaves in
  // order numbers clusters by ascending smallest patent id.
  std::vector<int> label_of_root(n, -1);
  Assignment a;
  a.ids = d.leaf_ids;
  a.labels.resize(n);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto& l = label_of_root[comp[i]];
    if (l < 0) l = next++;
    a.labels[i] = l;
  }
  a.k = static_cast<std::size_t>(next);
  return a;
}

}  // namespace

void validate(const Dendrogram& d) {
  const std::size_t n = d.n_leaves();
  if (n == 0) throw ContractError("dendrogram has no leaves");
  if (d.merges.size() != n - 1)
    throw ContractError("dendrogram has " + std::to_string(d.merges.size()) +
                        " merges for " + std::to_string(n) + " leaves");
  for (std::size_t i = 1; i < n; ++i) {
    if (d.leaf_ids[i] <= d.leaf_ids[i - 1])
      throw ContractError("leaf ids are not strictly ascending");
  }
  std::vector<std::size_t> size(2 * n - 1, 1);
  std::vector<char> used(2 * n - 1, 0);
  for (std::size_t i = 0; i < d.merges.size(); ++i) {
    const auto& m = d.merges[i];
    const auto where = "merge " + std::to_string(i) + ": ";
    if (!(m.left < m.right) || m.right >= n + i)
      throw ContractError(where + "invalid node indices");
    if (used[m.left] || used[m.right])
      throw ContractError(where + "node merged twice");
    used[m.left] = used[m.right] = 1;
    if (m.size != size[m.left] + size[m.right]) throw ContractError(where + "bad size");
    size[n + i] = m.size;
    if (!(m.height >= 0.0)) throw ContractError(where + "negative height");
    if (i > 0 && m.height < d.merges[i - 1].height)
      throw ContractError(where + "height decreases");
  }
}

Dendrogram ward_cluster(const PointMatrix& points) { return nn_chain(sorted_by_id(points)); }

Dendrogram ward_cluster(const VectorSet& set) { return ward_cluster(retained_points(set)); }

Dendrogram ward_cluster_naive(const PointMatrix& points) {
  if (points.size() > kNaiveLimit)
    throw ContractError("ward_cluster_naive: " + std::to_string(points.size()) +
                        " points exceed the limit of " + std::to_string(kNaiveLimit));
  const PointMatrix pts = sorted_by_id(points);
  const std::size_t n = pts.size();
  // Full symmetric matrix of merge costs; singleton cost is |x - y|^2 / 2.
  std::vector<double> cost(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double c =
          squared_distance(&pts.values[i * pts.dim], &pts.values[j * pts.dim], pts.dim) /
          2.0;
      cost[i * n + j] = cost[j * n + i] = c;
    }
  }
  std::vector<std::size_t> node(n), size(n, 1);
  std::iota(node.begin(), node.end(), 0);
  std::vector<char> alive(n, 1);

  Dendrogram d;
  d.leaf_ids = pts.ids;
  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t bi = kNone, bj = kNone;
    double best = std::numeric_limits<double>::infinity();
    auto key = [&](std::size_t i, std::size_t j) {
      return std::pair{std::min(node[i], node[j]), std::max(node[i], node[j])};
    };
    for (std::size_t i = 0; i < n; ++i) {
      if (!alive[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!alive[j]) continue;
        const double c = cost[i * n + j];
        if (c < best || (c == best && bi != kNone && key(i, j) < key(bi, bj))) {
          best = c;
          bi = i;
          bj = j;
        }
      }
    }
    const double ni = static_cast<double>(size[bi]);
    const double nj = static_cast<double>(size[bj]);
    for (std::size_t k = 0; k < n; ++k) {
      if (!alive[k] || k == bi || k == bj) continue;
      const double nk = static_cast<double>(size[k]);
      const double c = ((ni + nk) * cost[k * n + bi] + (nj + nk) * cost[k * n + bj] -
                        nk * best) /
                       (ni + nj + nk);
      cost[k * n + bi] = cost[bi * n + k] = c;
    }
    const auto [left, right] = key(bi, bj);
    d.merges.push_back({left, right, best, size[bi] + size[bj]});
    node[bi] = n + step;
    size[bi] += size[bj];
    alive[bj] = 0;
  }
  return d;
}

Dendrogram ward_cluster_naive(const VectorSet& set) {
  return ward_cluster_naive(retained_points(set));
}

Assignment cut(const Dendrogram& d, std::size_t k) {
  const std::size_t n = d.n_leaves();
  if (k < 1 || k > n)
    throw ContractError("cut: k = " + std::to_string(k) + " outside [1, " +
                        std::to_string(n) + "]");
  return assignment_from(d, n - k);
}

Assignment cut_at_height(const Dendrogram& d, double h) {
  std::size_t applied = 0;
  while (applied < d.merges.size() && d.merges[applied].height <= h) ++applied;
  auto a = assignment_from(d, applied);
  a.cut_height = h;
  return a;
}

std::vector<Branch> main_branches(const Dendrogram& d, std::size_t k) {
  const auto a = cut(d, k);
  const std::size_t n = d.n_leaves();
  const std::size_t applied = n - k;

  std::vector<std::size_t> parent(n + d.merges.size(), kNone);
  for (std::size_t i = 0; i < d.merges.size(); ++i) {
    parent[d.merges[i].left] = i;
    parent[d.merges[i].right] = i;
  }

  std::vector<Branch> branches(k);
  for (std::size_t leaf = 0; leaf < n; ++leaf) {
    auto& b = branches[static_cast<std::size_t>(a.labels[leaf])];
    b.leaves.push_back(d.leaf_ids[leaf]);
    if (b.size++ > 0) continue;
    // Climb from the first leaf while the parent merge is applied.
    std::size_t node = leaf;
    while (parent[node] != kNone && parent[node] < applied) node = n + parent[node];
    b.label = a.labels[leaf];
    b.root = node;
    b.root_height = node >= n ? d.merges[node - n].height : 0.0;
    b.separation =
        parent[node] != kNone ? d.merges[parent[node]].height : b.root_height;
  }
  std::stable_sort(branches.begin(), branches.end(), [](const Branch& x, const Branch& y) {
    if (x.separation != y.separation) return x.separation > y.separation;
    if (x.size != y.size) return x.size < y.size;
    return x.label < y.label;
  });
  return branches;
}

double within_cluster_ss(const PointMatrix& points, const Assignment& a) {
  std::unordered_map<PatentId, std::size_t> row_of;
  for (std::size_t i = 0; i < points.size(); ++i) row_of[points.ids[i]] = i;
  const std::size_t dim = points.dim;
  std::vector<double> sum(a.k * dim, 0.0);
  std::vector<std::size_t> count(a.k, 0);
  for (std::size_t i = 0; i < a.ids.size(); ++i) {
    const auto r = points.row(row_of.at(a.ids[i]));
    const auto l = static_cast<std::size_t>(a.labels[i]);
    ++count[l];
    for (std::size_t j = 0; j < dim; ++j) sum[l * dim + j] += r[j];
  }
  double ss = 0.0;
  for (std::size_t i = 0; i < a.ids.size(); ++i) {
    const auto r = points.row(row_of.at(a.ids[i]));
    const auto l = static_cast<std::size_t>(a.labels[i]);
    for (std::size_t j = 0; j < dim; ++j) {
      const double d = r[j] - sum[l * dim + j] / static_cast<double>(count[l]);
      ss += d * d;
    }
  }
  return ss;
}

}  // namespace citevec
