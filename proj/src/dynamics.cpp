#include "citevec/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <string>

#include "citevec/errors.hpp"

namespace citevec {
namespace {

int label_of(const Assignment& a, PatentId id) {
  auto it = std::lower_bound(a.ids.begin(), a.ids.end(), id);
  if (it == a.ids.end() || *it != id)
    throw ContractError("patent " + std::to_string(id) + " is not covered by the assignment");
  return a.labels[static_cast<std::size_t>(it - a.ids.begin())];
}

// Branching points above a k-cut, with the cut clusters under each child.
struct BranchPoint {
  std::vector<int> left, right;
  double height = 0.0;
};

std::vector<BranchPoint> branch_points(const Dendrogram& d, std::size_t k) {
  const auto a = cut(d, k);
  const std::size_t n = d.n_leaves();
  const std::size_t applied = n - k;
  std::vector<std::size_t> leaf_of(n + d.merges.size());
  for (std::size_t i = 0; i < n; ++i) leaf_of[i] = i;
  for (std::size_t i = 0; i < d.merges.size(); ++i) leaf_of[n + i] = leaf_of[d.merges[i].left];

  std::vector<std::vector<int>> under(d.merges.size());
  auto labels_under = [&](std::size_t node) -> std::vector<int> {
    if (node < n || node - n < applied) return {a.labels[leaf_of[node]]};
    return under[node - n];
  };
  std::vector<BranchPoint> out;
  for (std::size_t i = applied; i < d.merges.size(); ++i) {
    BranchPoint b;
    b.left = labels_under(d.merges[i].left);
    b.right = labels_under(d.merges[i].right);
    b.height = d.merges[i].height;
    auto& u = under[i];
    std::merge(b.left.begin(), b.left.end(), b.right.begin(), b.right.end(),
               std::back_inserter(u));
    out.push_back(std::move(b));
  }
  return out;
}

using Signature = std::pair<std::vector<int>, std::vector<int>>;

std::optional<Signature> signature(std::vector<int> l, std::vector<int> r) {
  if (l.empty() || r.empty()) return std::nullopt;
  std::sort(l.begin(), l.end());
  std::sort(r.begin(), r.end());
  if (r < l) std::swap(l, r);
  return Signature{std::move(l), std::move(r)};
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace

void check(const Thresholds& t) {
  if (!(t.theta > 0.0 && t.theta <= 1.0)) throw ConfigError("theta must be in (0, 1]");
  if (!(t.delta >= 0.0 && t.delta < 1.0)) throw ConfigError("delta must be in [0, 1)");
  if (!(t.epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
}

std::optional<int> Correspondence::partner_of_t1(int i) const {
  for (const auto& p : pairs)
    if (p.t1 == i) return p.t2;
  return std::nullopt;
}

std::optional<int> Correspondence::partner_of_t2(int j) const {
  for (const auto& p : pairs)
    if (p.t2 == j) return p.t1;
  return std::nullopt;
}

std::vector<PatentId> common_ids(const Assignment& a1, const Assignment& a2) {
  std::vector<PatentId> out;
  std::set_intersection(a1.ids.begin(), a1.ids.end(), a2.ids.begin(), a2.ids.end(),
                        std::back_inserter(out));
  return out;
}

Correspondence match_clusters(const Assignment& a1, const Assignment& a2,
                              std::span<const PatentId> common, double theta) {
  if (common.empty()) throw ContractError("match_clusters: no common patents");
  Correspondence c;
  c.k1 = a1.k;
  c.k2 = a2.k;
  c.overlap.assign(c.k1 * c.k2, 0);
  c.common_t1.assign(c.k1, 0);
  c.common_t2.assign(c.k2, 0);
  for (PatentId id : common) {
    const auto i = static_cast<std::size_t>(label_of(a1, id));
    const auto j = static_cast<std::size_t>(label_of(a2, id));
    ++c.overlap[i * c.k2 + j];
    ++c.common_t1[i];
    ++c.common_t2[j];
  }

  struct Candidate {
    double jaccard;
    int i, j;
  };
  std::vector<Candidate> cand;
  for (std::size_t i = 0; i < c.k1; ++i) {
    for (std::size_t j = 0; j < c.k2; ++j) {
      const auto o = c.overlap[i * c.k2 + j];
      if (o == 0) continue;
      const double u = static_cast<double>(c.common_t1[i] + c.common_t2[j] - o);
      cand.push_back({static_cast<double>(o) / u, static_cast<int>(i), static_cast<int>(j)});
    }
  }
  std::sort(cand.begin(), cand.end(), [](const Candidate& x, const Candidate& y) {
    if (x.jaccard != y.jaccard) return x.jaccard > y.jaccard;
    if (x.i != y.i) return x.i < y.i;
    return x.j < y.j;
  });
  std::vector<char> used1(c.k1, 0), used2(c.k2, 0);
  for (const auto& x : cand) {
    if (x.jaccard < theta) break;
    if (used1[x.i] || used2[x.j]) continue;
    used1[x.i] = used2[x.j] = 1;
    c.pairs.push_back({x.i, x.j, x.jaccard});
  }
  for (std::size_t i = 0; i < c.k1; ++i)
    if (!used1[i]) c.unmatched_t1.push_back(static_cast<int>(i));
  for (std::size_t j = 0; j < c.k2; ++j)
    if (!used2[j]) c.unmatched_t2.push_back(static_cast<int>(j));
  return c;
}

std::string_view to_string(ClusterEventKind kind) {
  switch (kind) {
    case ClusterEventKind::birth: return "birth";
    case ClusterEventKind::death: return "death";
    case ClusterEventKind::growth: return "growth";
    case ClusterEventKind::contraction: return "contraction";
    case ClusterEventKind::merge: return "merge";
    case ClusterEventKind::split: return "split";
  }
  return "?";
}

std::string_view to_string(BranchEventKind kind) {
  switch (kind) {
    case BranchEventKind::height_increase: return "height_increase";
    case BranchEventKind::height_decrease: return "height_decrease";
    case BranchEventKind::insertion: return "insertion";
    case BranchEventKind::fusion: return "fusion";
  }
  return "?";
}

std::vector<std::size_t> cluster_sizes(const Assignment& a) {
  std::vector<std::size_t> s(a.k, 0);
  for (int l : a.labels) ++s[static_cast<std::size_t>(l)];
  return s;
}

std::vector<ClusterEvent> classify_cluster_events(const Correspondence& corr,
                                                  const ClusterSizes& sizes,
                                                  const Thresholds& t) {
  if (sizes.t1.size() != corr.k1 || sizes.t2.size() != corr.k2)
    throw ContractError("classify_cluster_events: sizes do not match the correspondence");
  std::vector<ClusterEvent> events;
  std::vector<char> part1(corr.k1, 0), part2(corr.k2, 0);

  for (std::size_t i = 0; i < corr.k1; ++i) {
    if (corr.common_t1[i] == 0) continue;
    std::vector<int> products;
    for (std::size_t j = 0; j < corr.k2; ++j) {
      const double share = static_cast<double>(corr.overlap[i * corr.k2 + j]) /
                           static_cast<double>(corr.common_t1[i]);
      if (share >= t.theta) products.push_back(static_cast<int>(j));
    }
    if (products.size() < 2) continue;
    part1[i] = 1;
    for (int j : products) part2[static_cast<std::size_t>(j)] = 1;
    events.push_back({ClusterEventKind::split, {static_cast<int>(i)}, products, 0.0});
  }
  for (std::size_t j = 0; j < corr.k2; ++j) {
    if (corr.common_t2[j] == 0) continue;
    std::vector<int> sources;
    for (std::size_t i = 0; i < corr.k1; ++i) {
      const double share = static_cast<double>(corr.overlap[i * corr.k2 + j]) /
                           static_cast<double>(corr.common_t2[j]);
      if (share >= t.theta) sources.push_back(static_cast<int>(i));
    }
    if (sources.size() < 2) continue;
    part2[j] = 1;
    for (int i : sources) part1[static_cast<std::size_t>(i)] = 1;
    events.push_back({ClusterEventKind::merge, sources, {static_cast<int>(j)}, 0.0});
  }

  std::vector<char> matched1(corr.k1, 0), matched2(corr.k2, 0);
  std::vector<ClusterPair> pairs = corr.pairs;
  std::sort(pairs.begin(), pairs.end(),
            [](const ClusterPair& x, const ClusterPair& y) { return x.t1 < y.t1; });
  for (const auto& p : pairs) {
    const auto i = static_cast<std::size_t>(p.t1), j = static_cast<std::size_t>(p.t2);
    if (part1[i] || part2[j]) continue;
    matched1[i] = matched2[j] = 1;
    if (sizes.t1[i] == 0) continue;
    const double ratio =
        static_cast<double>(sizes.t2[j]) / static_cast<double>(sizes.t1[i]);
    if (ratio > 1.0 + t.delta)
      events.push_back({ClusterEventKind::growth, {p.t1}, {p.t2}, ratio});
    else if (ratio < 1.0 - t.delta)
      events.push_back({ClusterEventKind::contraction, {p.t1}, {p.t2}, ratio});
  }
  // A cluster paired with a split or merge participant continues it; it is
  // neither born nor dead.
  for (const auto& p : corr.pairs) {
    matched1[static_cast<std::size_t>(p.t1)] = 1;
    matched2[static_cast<std::size_t>(p.t2)] = 1;
  }
  for (std::size_t i = 0; i < corr.k1; ++i) {
    if (!part1[i] && !matched1[i])
      events.push_back({ClusterEventKind::death, {static_cast<int>(i)}, {}, 0.0});
  }
  for (std::size_t j = 0; j < corr.k2; ++j) {
    if (!part2[j] && !matched2[j])
      events.push_back({ClusterEventKind::birth, {}, {static_cast<int>(j)}, 0.0});
  }
  return events;
}

std::vector<BranchEvent> classify_branch_events(const Dendrogram& d1, const Dendrogram& d2,
                                                const Correspondence& corr,
                                                double epsilon) {
  const auto b1 = branch_points(d1, corr.k1);
  const auto b2 = branch_points(d2, corr.k2);

  std::vector<int> forward(corr.k1, -1);
  std::vector<char> in_range(corr.k2, 0);
  for (const auto& p : corr.pairs) {
    forward[static_cast<std::size_t>(p.t1)] = p.t2;
    in_range[static_cast<std::size_t>(p.t2)] = 1;
  }
  auto image = [&](const std::vector<int>& labels) {
    std::vector<int> out;
    for (int l : labels)
      if (forward[static_cast<std::size_t>(l)] >= 0) out.push_back(forward[static_cast<std::size_t>(l)]);
    return out;
  };
  auto restrict = [&](const std::vector<int>& labels) {
    std::vector<int> out;
    for (int l : labels)
      if (in_range[static_cast<std::size_t>(l)]) out.push_back(l);
    return out;
  };

  std::map<Signature, std::size_t> by_signature;
  for (std::size_t q = 0; q < b2.size(); ++q) {
    if (auto s = signature(restrict(b2[q].left), restrict(b2[q].right)))
      by_signature.emplace(std::move(*s), q);
  }

  std::vector<BranchEvent> events;
  std::vector<char> matched2(b2.size(), 0);
  for (const auto& p : b1) {
    auto s = signature(image(p.left), image(p.right));
    auto it = s ? by_signature.find(*s) : by_signature.end();
    if (it == by_signature.end() || matched2[it->second]) {
      BranchEvent e;
      e.kind = BranchEventKind::fusion;
      e.t1_left = p.left;
      e.t1_right = p.right;
      e.height_t1 = p.height;
      events.push_back(std::move(e));
      continue;
    }
    const auto& q = b2[it->second];
    matched2[it->second] = 1;
    double rel = 0.0;
    if (p.height > 0.0)
      rel = (q.height - p.height) / p.height;
    else if (q.height > 0.0)
      rel = std::numeric_limits<double>::infinity();
    if (rel > epsilon || rel < -epsilon) {
      BranchEvent e;
      e.kind = rel > 0 ? BranchEventKind::height_increase : BranchEventKind::height_decrease;
      e.t1_left = p.left;
      e.t1_right = p.right;
      e.t2_left = q.left;
      e.t2_right = q.right;
      e.height_t1 = p.height;
      e.height_t2 = q.height;
      e.magnitude = rel;
      events.push_back(std::move(e));
    }
  }
  for (std::size_t q = 0; q < b2.size(); ++q) {
    if (matched2[q]) continue;
    BranchEvent e;
    e.kind = BranchEventKind::insertion;
    e.t2_left = b2[q].left;
    e.t2_right = b2[q].right;
    e.height_t2 = b2[q].height;
    events.push_back(std::move(e));
  }
  return events;
}

std::size_t ClusterTimeline::event_count() const {
  std::size_t n = 0;
  for (const auto& iv : intervals) n += iv.cluster_events.size() + iv.branch_events.size();
  return n;
}

ClusterTimeline track(std::span<const SnapshotClusters> series, const Thresholds& t) {
  check(t);
  if (series.size() < 2) throw ContractError("track: need at least 2 snapshots");
  for (std::size_t s = 1; s < series.size(); ++s) {
    if (!(series[s - 1].date < series[s].date))
      throw ContractError("track: snapshot dates must be strictly increasing (" +
                          series[s - 1].date.iso() + " then " + series[s].date.iso() + ")");
  }

  ClusterTimeline tl;
  for (const auto& s : series) {
    tl.dates.push_back(s.date);
    tl.assignments.push_back(s.assignment);
  }
  tl.intervals.resize(series.size() - 1);
  const auto intervals = static_cast<std::ptrdiff_t>(tl.intervals.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t s = 0; s < intervals; ++s) {
    const auto& a = series[static_cast<std::size_t>(s)];
    const auto& b = series[static_cast<std::size_t>(s) + 1];
    auto& iv = tl.intervals[static_cast<std::size_t>(s)];
    iv.from = a.date;
    iv.to = b.date;
    const auto common = common_ids(a.assignment, b.assignment);
    iv.correspondence = match_clusters(a.assignment, b.assignment, common, t.theta);
    iv.cluster_events = classify_cluster_events(
        iv.correspondence, {cluster_sizes(a.assignment), cluster_sizes(b.assignment)}, t);
    iv.branch_events =
        classify_branch_events(a.dendrogram, b.dendrogram, iv.correspondence, t.epsilon);
  }

  std::vector<std::size_t> track_of(series.front().assignment.k);
  for (std::size_t c = 0; c < track_of.size(); ++c) {
    track_of[c] = tl.tracks.size();
    tl.tracks.push_back({tl.tracks.size(), {{0, static_cast<int>(c)}}});
  }
  for (std::size_t s = 1; s < series.size(); ++s) {
    const auto& corr = tl.intervals[s - 1].correspondence;
    std::vector<std::size_t> next(series[s].assignment.k);
    for (std::size_t c = 0; c < next.size(); ++c) {
      if (auto from = corr.partner_of_t2(static_cast<int>(c))) {
        next[c] = track_of[static_cast<std::size_t>(*from)];
      } else {
        next[c] = tl.tracks.size();
        tl.tracks.push_back({tl.tracks.size(), {}});
      }
      tl.tracks[next[c]].points.push_back({s, static_cast<int>(c)});
    }
    track_of = std::move(next);
  }
  return tl;
}

std::size_t gap_k(const Dendrogram& d, std::size_t k_max) {
  if (k_max < 2) throw ContractError("gap_k: k_max must be at least 2");
  const std::size_t m = d.merges.size();
  if (m < 2) throw ContractError("gap_k: dendrogram has fewer than 2 merges");
  const std::size_t hi = std::min(k_max, m);
  std::size_t best_k = 2;
  double best_gap = -1.0;
  for (std::size_t k = 2; k <= hi; ++k) {
    const double upper = d.merges[m - k + 1].height;
    const double lower = d.merges[m - k].height;
    double gap = 0.0;
    if (lower > 0.0)
      gap = (upper - lower) / lower;
    else if (upper > 0.0)
      gap = std::numeric_limits<double>::infinity();
    if (gap > best_gap) {
      best_gap = gap;
      best_k = k;
    }
  }
  return best_k;
}

void write_event_report(const ClusterTimeline& tl, std::ostream& out) {
  out << "# cluster timeline: " << tl.dates.size() << " snapshots, " << tl.tracks.size()
      << " tracks, " << tl.event_count() << " events\n";
  for (const auto& iv : tl.intervals) {
    const auto span = iv.from.iso() + ".." + iv.to.iso();
    for (const auto& e : iv.cluster_events) {
      out << span << '\t' << to_string(e.kind) << "\tt1=[" << join(e.t1) << "] t2=["
          << join(e.t2) << "]\t" << format_double(e.magnitude) << '\n';
    }
    for (const auto& e : iv.branch_events) {
      out << span << '\t' << to_string(e.kind) << "\tt1=[" << join(e.t1_left) << "|"
          << join(e.t1_right) << "] t2=[" << join(e.t2_left) << "|" << join(e.t2_right)
          << "]\t" << format_double(e.magnitude) << '\n';
    }
  }
}

void write_event_table(const ClusterTimeline& tl, std::ostream& out) {
  out << "from\tto\tfamily\tkind\tt1\tt2\theight_t1\theight_t2\tmagnitude\n";
  for (const auto& iv : tl.intervals) {
    for (const auto& e : iv.cluster_events) {
      out << iv.from.iso() << '\t' << iv.to.iso() << "\tcluster\t" << to_string(e.kind)
          << '\t' << join(e.t1) << '\t' << join(e.t2) << "\t\t\t"
          << format_double(e.magnitude) << '\n';
    }
    for (const auto& e : iv.branch_events) {
      out << iv.from.iso() << '\t' << iv.to.iso() << "\tbranch\t" << to_string(e.kind)
          << '\t' << join(e.t1_left) << '|' << join(e.t1_right) << '\t' << join(e.t2_left)
          << '|' << join(e.t2_right) << '\t' << format_double(e.height_t1) << '\t'
          << format_double(e.height_t2) << '\t' << format_double(e.magnitude) << '\n';
    }
  }
}

void write_track_table(const ClusterTimeline& tl, std::ostream& out) {
  out << "track\tdate\tcluster\tsize\n";
  std::vector<std::vector<std::size_t>> sizes;
  for (const auto& a : tl.assignments) sizes.push_back(cluster_sizes(a));
  for (const auto& t : tl.tracks) {
    for (const auto& p : t.points) {
      out << t.id << '\t' << tl.dates[p.snapshot].iso() << '\t' << p.cluster << '\t'
          << sizes[p.snapshot][static_cast<std::size_t>(p.cluster)] << '\n';
    }
  }
}

}  // namespace citevec
