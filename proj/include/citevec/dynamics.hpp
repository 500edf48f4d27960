#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "citevec/clustering.hpp"
#include "citevec/date.hpp"

namespace citevec {

struct Thresholds {
  double theta = 0.3;     // minimum Jaccard / overlap share for a correspondence
  double delta = 0.1;     // size ratio band for growth / contraction
  double epsilon = 0.10;  // relative height change for branch events
};

// Throws ConfigError when a threshold is outside its documented range.
void check(const Thresholds& t);

struct ClusterPair {
  int t1 = 0;
  int t2 = 0;
  double jaccard = 0.0;

  bool operator==(const ClusterPair&) const = default;
};

struct Correspondence {
  std::size_t k1 = 0;
  std::size_t k2 = 0;
  std::vector<ClusterPair> pairs;  // in greedy selection order
  std::vector<int> unmatched_t1;
  std::vector<int> unmatched_t2;
  // Cluster overlaps over the common ids, row-major k1 x k2.
  std::vector<std::size_t> overlap;
  std::vector<std::size_t> common_t1;  // per t1 cluster, members among the common ids
  std::vector<std::size_t> common_t2;

  std::size_t overlap_at(int i, int j) const {
    return overlap[static_cast<std::size_t>(i) * k2 + static_cast<std::size_t>(j)];
  }
  std::optional<int> partner_of_t1(int i) const;
  std::optional<int> partner_of_t2(int j) const;
};

// Patent ids present in both assignments, ascending.
std::vector<PatentId> common_ids(const Assignment& a1, const Assignment& a2);

// Greedy maximum-Jaccard one-to-one matching over `common`. Candidate pairs
// are taken by descending Jaccard, ties to the lower t1 then t2 cluster
// index; pairs below `theta` stay unmatched. Throws ContractError when
// `common` is empty.
Correspondence match_clusters(const Assignment& a1, const Assignment& a2,
                              std::span<const PatentId> common, double theta = 0.3);

enum class ClusterEventKind { birth, death, growth, contraction, merge, split };
std::string_view to_string(ClusterEventKind kind);

struct ClusterEvent {
  ClusterEventKind kind = ClusterEventKind::birth;
  std::vector<int> t1;  // participating clusters at the earlier snapshot
  std::vector<int> t2;
  double magnitude = 0.0;  // size ratio for growth / contraction

  bool operator==(const ClusterEvent&) const = default;
};

struct ClusterSizes {
  std::vector<std::size_t> t1;
  std::vector<std::size_t> t2;
};

std::vector<std::size_t> cluster_sizes(const Assignment& a);

// Split: a t1 cluster sends at least theta of its common members to each of
// two or more t2 clusters. Merge: the mirror image. Clusters taking part in
// either are not reported as matched, born or dead; matched pairs whose
// size ratio leaves [1-delta, 1+delta] grow or contract.
std::vector<ClusterEvent> classify_cluster_events(const Correspondence& corr,
                                                  const ClusterSizes& sizes,
                                                  const Thresholds& thresholds = {});

enum class BranchEventKind { height_increase, height_decrease, insertion, fusion };
std::string_view to_string(BranchEventKind kind);

struct BranchEvent {
  BranchEventKind kind = BranchEventKind::insertion;
  // Branching point location: the cut clusters under each side. Empty on the
  // side where the branching point does not exist.
  std::vector<int> t1_left, t1_right;
  std::vector<int> t2_left, t2_right;
  double height_t1 = 0.0;
  double height_t2 = 0.0;
  double magnitude = 0.0;  // (h2 - h1) / h1 for height changes
};

// Compares the branching points above the cuts that produced the
// correspondence (k1 and k2 clusters). A branching point is identified by
// how it separates the matched clusters below it.
std::vector<BranchEvent> classify_branch_events(const Dendrogram& d1, const Dendrogram& d2,
                                                const Correspondence& corr,
                                                double epsilon = 0.10);

struct SnapshotClusters {
  Date date;
  Dendrogram dendrogram;
  Assignment assignment;  // a cut of `dendrogram`
};

struct IntervalEvents {
  Date from;
  Date to;
  Correspondence correspondence;
  std::vector<ClusterEvent> cluster_events;
  std::vector<BranchEvent> branch_events;
};

struct TrackPoint {
  std::size_t snapshot = 0;
  int cluster = 0;
};

struct Track {
  std::size_t id = 0;
  std::vector<TrackPoint> points;
};

struct ClusterTimeline {
  std::vector<Date> dates;
  std::vector<Assignment> assignments;
  std::vector<Track> tracks;
  std::vector<IntervalEvents> intervals;

  std::size_t event_count() const;
};

// Needs at least 2 snapshots with strictly increasing dates (ContractError
// otherwise). Tracks continue through matched pairs.
ClusterTimeline track(std::span<const SnapshotClusters> series,
                      const Thresholds& thresholds = {});

// The k in [2, k_max] with the largest relative gap between the lowest
// undone and the highest kept merge height; ties go to the smaller k.
// Throws ContractError for k_max < 2 or fewer than 2 merges.
std::size_t gap_k(const Dendrogram& d, std::size_t k_max);

// One event per line: interval, kind, participants, magnitude.
void write_event_report(const ClusterTimeline& timeline, std::ostream& out);
// Tab-separated export with a header row.
void write_event_table(const ClusterTimeline& timeline, std::ostream& out);
void write_track_table(const ClusterTimeline& timeline, std::ostream& out);

}  // namespace citevec
