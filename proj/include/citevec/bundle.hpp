#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "citevec/corpus.hpp"

namespace citevec {

struct IngestCounters {
  std::size_t patent_rows_skipped = 0;
  std::size_t duplicate_citations = 0;
  std::size_t self_citations = 0;

  bool operator==(const IngestCounters&) const = default;
};

// Loaded corpus tables in a form that can be written once and reused.
struct Bundle {
  std::vector<PatentRecord> patents;  // ascending id, subcategory unset
  EdgeList citations;
  ClassMap classmap;
  IngestCounters counters;

  CitationGraph graph() const;
  bool operator==(const Bundle&) const = default;
};

// Loads the three tables. Errors carry the file and line.
Bundle ingest(const std::filesystem::path& patents, const std::filesystem::path& citations,
              const std::filesystem::path& classmap, const TableFormat& format = {});

// Canonical byte encoding; equal bundles encode identically.
std::string encode(const Bundle& bundle);
// Throws InputError on a bad magic number, version or truncated data.
Bundle decode(const std::string& bytes);

void write_bundle(const Bundle& bundle, const std::filesystem::path& path);
Bundle read_bundle(const std::filesystem::path& path);

}  // namespace citevec
