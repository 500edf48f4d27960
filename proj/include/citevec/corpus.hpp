#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "citevec/date.hpp"

namespace citevec {

using PatentId = std::int64_t;
// Dense position of a patent in a CitationGraph (ascending patent_id order).
using NodeIndex = std::uint32_t;

struct PatentRecord {
  PatentId id = 0;
  Date grant_date;
  int uspto_class = 0;
  // Filled in by build_graph through the ClassMap; empty means unmapped.
  std::optional<int> subcategory;

  bool operator==(const PatentRecord&) const = default;
};

struct TableFormat {
  // Detected from the header line (tab, then comma, then semicolon) when empty.
  std::optional<char> delimiter;
  DateFormat date_format = DateFormat::automatic;
};

// Accepted header names per column, matched case-insensitively with
// surrounding quotes stripped.
struct PatentColumns {
  std::vector<std::string> id = {"patent_id", "patent"};
  std::vector<std::string> grant_date = {"grant_date", "gdate"};
  std::vector<std::string> uspto_class = {"uspto_class", "nclass", "class"};
};

struct CitationColumns {
  std::vector<std::string> citing = {"citing_id", "citing"};
  std::vector<std::string> cited = {"cited_id", "cited"};
};

struct ClassMapColumns {
  std::vector<std::string> uspto_class = {"uspto_class", "class", "nclass"};
  std::vector<std::string> subcategory = {"subcategory", "subcat"};
};

struct PatentTable {
  std::vector<PatentRecord> records;
  // Rows dropped for a missing or invalid field.
  std::size_t skipped = 0;
};

// Throws InputError for an unreadable file, a header without the declared
// columns, or a duplicate patent_id.
PatentTable load_patents(const std::filesystem::path& path,
                         const TableFormat& format = {},
                         const PatentColumns& columns = {});

struct Citation {
  PatentId citing = 0;
  PatentId cited = 0;

  auto operator<=>(const Citation&) const = default;
};

struct EdgeList {
  std::vector<Citation> edges;  // sorted, unique, no self-loops
  std::size_t duplicates_dropped = 0;
  std::size_t self_loops_dropped = 0;

  bool operator==(const EdgeList&) const = default;
};

// Sorts, removes duplicates and self-citations, counting both.
EdgeList clean_edges(std::vector<Citation> raw);

// Throws InputError for an unreadable file, a missing column or a
// non-integer id.
EdgeList load_citations(const std::filesystem::path& path,
                        const TableFormat& format = {},
                        const CitationColumns& columns = {});

class ClassMap {
 public:
  // Re-adding an identical pair is a no-op. Throws InputError when the class
  // is already mapped elsewhere or the code is not one of the 36 subcategories.
  void add(int uspto_class, int subcategory);

  std::optional<int> subcategory_of(int uspto_class) const;
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::map<int, int>& entries() const { return entries_; }

  bool operator==(const ClassMap&) const = default;

 private:
  std::map<int, int> entries_;
};

ClassMap load_classmap(const std::filesystem::path& path,
                       const TableFormat& format = {},
                       const ClassMapColumns& columns = {});

struct Edge {
  NodeIndex citing = 0;
  NodeIndex cited = 0;

  bool operator==(const Edge&) const = default;
};

struct GraphCounters {
  std::size_t dangling_edges = 0;    // an endpoint missing from the patent table
  std::size_t unmapped_patents = 0;  // class absent from the ClassMap

  bool operator==(const GraphCounters&) const = default;
};

// Immutable after construction. Patents are held in ascending patent_id
// order; edges in ascending (citing, cited) order.
class CitationGraph {
 public:
  CitationGraph() = default;

  std::span<const PatentRecord> patents() const { return patents_; }
  std::span<const Edge> edges() const { return edges_; }
  const ClassMap& classmap() const { return classmap_; }
  const GraphCounters& counters() const { return counters_; }
  std::size_t size() const { return patents_.size(); }

  const PatentRecord& patent(NodeIndex i) const { return patents_[i]; }
  std::optional<NodeIndex> index_of(PatentId id) const;

  // Number of retained citations the patent makes, over the whole corpus.
  std::uint32_t out_degree(NodeIndex i) const { return out_degree_[i]; }
  // Citing patents of i, ascending.
  std::span<const NodeIndex> citers(NodeIndex i) const;

  std::optional<Date> earliest_grant() const;
  std::optional<Date> latest_grant() const;

  bool operator==(const CitationGraph&) const = default;

 private:
  friend CitationGraph build_graph(std::vector<PatentRecord> patents,
                                   const EdgeList& edges,
                                   const ClassMap& classmap);

  std::vector<PatentRecord> patents_;
  std::vector<Edge> edges_;
  std::vector<std::uint32_t> out_degree_;
  std::vector<std::size_t> in_offsets_;
  std::vector<NodeIndex> in_sources_;
  ClassMap classmap_;
  GraphCounters counters_;
};

// Resolves subcategories through the class map, drops dangling edges and
// computes out-degrees. Throws InputError on duplicate patent ids.
CitationGraph build_graph(std::vector<PatentRecord> patents,
                          const EdgeList& edges, const ClassMap& classmap);

struct Snapshot {
  Date as_of;
  // Sorted subcategory codes; membership is restricted to these when set.
  std::optional<std::vector<int>> scope;
  std::vector<NodeIndex> members;     // ascending
  std::vector<std::size_t> edge_view;  // indices into graph.edges(); both ends members

  std::size_t size() const { return members.size(); }
  bool in_scope(const PatentRecord& p) const;
};

// Members are the patents granted on or before `as_of` (and inside `scope`).
// An empty result is logged as a warning. Throws ConfigError for scope codes
// that are not subcategories.
Snapshot snapshot(const CitationGraph& graph, Date as_of,
                  std::optional<std::vector<int>> scope = std::nullopt);

// Citations with both endpoints granted by `as_of` and at least one endpoint
// a snapshot member.
std::size_t connected_citations(const CitationGraph& graph, const Snapshot& snap);

}  // namespace citevec
