#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "citevec/clustering.hpp"
#include "citevec/corpus.hpp"
#include "citevec/dynamics.hpp"

namespace citevec {

// Ground-truth class per patent (the classification as of a label date).
using Labels = std::unordered_map<PatentId, int>;

struct LabelColumns {
  std::vector<std::string> id = {"patent_id", "patent"};
  std::vector<std::string> class_code = {"class_code", "class", "uspto_class"};
};

// Throws InputError on unreadable files, bad ids or a patent listed twice
// with different classes.
Labels load_labels(const std::filesystem::path& path, const TableFormat& format = {},
                   const LabelColumns& columns = {});

struct ContingencyTable {
  std::vector<int> clusters;  // row keys, ascending
  std::vector<int> classes;   // column keys, ascending
  std::vector<std::size_t> counts;  // row-major
  std::vector<std::size_t> row_totals;
  std::vector<std::size_t> col_totals;
  std::size_t total = 0;
  std::size_t unlabeled = 0;  // assignment entries without a label

  std::size_t at(std::size_t row, std::size_t col) const {
    return counts[row * classes.size() + col];
  }
  std::optional<std::size_t> row_of(int cluster) const;
  std::optional<std::size_t> col_of(int cls) const;
};

// Cross-tabulates the labelled patents of the assignment. Throws
// ContractError when no assigned patent carries a label.
ContingencyTable contingency(const Assignment& assignment, const Labels& labels);
// Same for two aligned label vectors.
ContingencyTable contingency(std::span<const int> rows, std::span<const int> cols);

// Phi coefficient of the indicators "in cluster" and "in class", from the 2x2
// collapse of the table. nullopt when either indicator is constant.
std::optional<double> pearson_phi(const ContingencyTable& table, int cluster, int cls);

// Adjusted Rand index of the table's two partitions. Equal to 1 when both
// partitions are trivial in the same way. Throws ContractError for fewer
// than 2 elements.
double adjusted_rand(const ContingencyTable& table);
double adjusted_rand(const Assignment& assignment, const Labels& labels);
double adjusted_rand(std::span<const int> a, std::span<const int> b);

struct SnapshotPhi {
  Date date;
  std::optional<int> best_cluster;
  std::optional<double> phi;
  std::size_t class_size = 0;    // labelled members of the class in the snapshot
  std::size_t cluster_size = 0;  // labelled members of the best cluster
};

struct ClassEmergence {
  int cls = 0;
  std::vector<SnapshotPhi> snapshots;
  std::optional<Date> detected_at;  // first snapshot with phi >= phi_min
  std::optional<std::int32_t> lead_days;  // label_date - detected_at

  bool detected() const { return detected_at.has_value(); }
};

struct EmergenceReport {
  Date label_date;
  double phi_min = 0.8;
  std::vector<ClassEmergence> classes;

  const ClassEmergence* find(int cls) const;
};

// For each class (all label classes when `classes` is empty) and snapshot,
// the cluster with the highest phi (ties to the lower label), and the
// detection lead time relative to label_date.
EmergenceReport backtest(const ClusterTimeline& timeline, const Labels& labels,
                         Date label_date, double phi_min = 0.8,
                         std::span<const int> classes = {});

void write_report_text(const EmergenceReport& report, std::ostream& out);
void write_report_table(const EmergenceReport& report, std::ostream& out);

}  // namespace citevec
