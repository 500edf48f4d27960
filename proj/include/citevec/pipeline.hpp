#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "citevec/bundle.hpp"
#include "citevec/dynamics.hpp"
#include "citevec/validation.hpp"

namespace citevec {

struct RunConfig {
  // Either a bundle written by `ingest` or the three tables.
  std::optional<std::filesystem::path> bundle;
  std::optional<std::filesystem::path> patents;
  std::optional<std::filesystem::path> citations;
  std::optional<std::filesystem::path> classmap;
  TableFormat format;
  std::optional<std::filesystem::path> labels;

  std::vector<Date> dates;  // strictly increasing
  std::optional<std::vector<int>> scope;
  // Fixed cluster count; gap selection over [2, k_max] when empty.
  std::optional<std::size_t> k;
  std::size_t k_max = 10;
  Thresholds thresholds;
  double phi_min = 0.8;
  std::optional<Date> label_date;  // defaults to the last date
  std::vector<int> classes;        // backtest classes; all label classes when empty

  bool figures = true;
  std::size_t layout_neighbors = 10;
  std::size_t layout_iterations = 200;
  std::uint64_t seed = 1;

  std::filesystem::path out_dir;
  std::size_t workers = 1;
};

// Throws ConfigError for missing inputs, non-increasing dates or thresholds
// out of range.
void check(const RunConfig& config);

struct SnapshotSummary {
  Date date;
  std::size_t members = 0;
  std::size_t retained = 0;
  std::size_t connected_citations = 0;
  std::size_t k = 0;
};

struct RunResult {
  std::vector<SnapshotSummary> snapshots;
  std::vector<SnapshotClusters> clusters;
  std::optional<ClusterTimeline> timeline;  // two or more dates
  std::optional<EmergenceReport> report;    // when labels are given
  std::string manifest;                     // manifest.json contents
};

// Runs every stage and writes the artifacts plus manifest.json into
// out_dir. Artifacts are assembled in a staging directory first, so a
// failed run leaves no partial output. Stage failures are rethrown with the
// stage name prepended, keeping the error type.
RunResult run_pipeline(const RunConfig& config);

// Thread budget for the parallel stages.
void set_workers(std::size_t workers);

// Loads the corpus named by the config (bundle or tables).
Bundle load_inputs(const RunConfig& config);

}  // namespace citevec
