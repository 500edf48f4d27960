#include "citevec/corpus.hpp"

#include <algorithm>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "citevec/errors.hpp"
#include "citevec/subcategory.hpp"
#include "table_reader.hpp"

namespace citevec {

using detail::DelimitedFile;
using detail::parse_int;

PatentTable load_patents(const std::filesystem::path& path, const TableFormat& format,
                         const PatentColumns& columns) {
  DelimitedFile file(path, format.delimiter);
  const auto c_id = file.column(columns.id);
  const auto c_date = file.column(columns.grant_date);
  const auto c_class = file.column(columns.uspto_class);
  const auto width = std::max({c_id, c_date, c_class}) + 1;

  PatentTable table;
  std::unordered_set<PatentId> seen;
  std::vector<std::string_view> f;
  while (file.next(f)) {
    if (f.size() < width) {
      ++table.skipped;
      continue;
    }
    auto id = parse_int<PatentId>(f[c_id]);
    auto date = parse_date(f[c_date], format.date_format);
    auto cls = parse_int<int>(f[c_class]);
    if (!id || !date || !cls) {
      ++table.skipped;
      continue;
    }
    if (!seen.insert(*id).second)
      throw InputError(file.where() + "duplicate patent_id " + std::to_string(*id));
    table.records.push_back(PatentRecord{*id, *date, *cls, std::nullopt});
  }
  if (table.skipped > 0)
    spdlog::info("{}: skipped {} rows with missing or invalid fields", file.path(),
                 table.skipped);
  return table;
}

EdgeList clean_edges(std::vector<Citation> raw) {
  EdgeList out;
  auto self = std::remove_if(raw.begin(), raw.end(),
                             [](const Citation& c) { return c.citing == c.cited; });
  out.self_loops_dropped = static_cast<std::size_t>(raw.end() - self);
  raw.erase(self, raw.end());
  std::sort(raw.begin(), raw.end());
  auto dup = std::unique(raw.begin(), raw.end());
  out.duplicates_dropped = static_cast<std::size_t>(raw.end() - dup);
  raw.erase(dup, raw.end());
  out.edges = std::move(raw);
  return out;
}

EdgeList load_citations(const std::filesystem::path& path, const TableFormat& format,
                        const CitationColumns& columns) {
  DelimitedFile file(path, format.delimiter);
  const auto c_from = file.column(columns.citing);
  const auto c_to = file.column(columns.cited);
  const auto width = std::max(c_from, c_to) + 1;

  std::vector<Citation> raw;
  std::vector<std::string_view> f;
  while (file.next(f)) {
    if (f.size() < width) throw InputError(file.where() + "missing citing/cited field");
    auto from = parse_int<PatentId>(f[c_from]);
    auto to = parse_int<PatentId>(f[c_to]);
    if (!from || !to) {
      throw InputError(file.where() + "non-integer patent id '" +
                       std::string(from ? f[c_to] : f[c_from]) + "'");
    }
    raw.push_back({*from, *to});
  }
  return clean_edges(std::move(raw));
}

void ClassMap::add(int uspto_class, int subcategory) {
  if (!is_subcategory(subcategory)) {
    throw InputError("class " + std::to_string(uspto_class) + " mapped to " +
                     std::to_string(subcategory) + ", which is not a subcategory code");
  }
  auto [it, inserted] = entries_.emplace(uspto_class, subcategory);
  if (!inserted && it->second != subcategory) {
    throw InputError("class " + std::to_string(uspto_class) +
                     " mapped to two subcategories: " + std::to_string(it->second) +
                     " and " + std::to_string(subcategory));
  }
}

std::optional<int> ClassMap::subcategory_of(int uspto_class) const {
  auto it = entries_.find(uspto_class);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

ClassMap load_classmap(const std::filesystem::path& path, const TableFormat& format,
                       const ClassMapColumns& columns) {
  DelimitedFile file(path, format.delimiter);
  ClassMap map;
  std::vector<std::string_view> f;
  std::optional<std::size_t> c_class, c_sub;
  while (file.next(f)) {
    // Column lookup is deferred so that an empty (header-less) file is valid.
    if (!c_class) {
      c_class = file.column(columns.uspto_class);
      c_sub = file.column(columns.subcategory);
    }
    if (f.size() <= std::max(*c_class, *c_sub))
      throw InputError(file.where() + "missing class/subcategory field");
    auto cls = parse_int<int>(f[*c_class]);
    auto sub = parse_int<int>(f[*c_sub]);
    if (!cls || !sub) throw InputError(file.where() + "non-integer class or subcategory");
    try {
      map.add(*cls, *sub);
    } catch (const InputError& e) {
      throw InputError(file.where() + e.what());
    }
  }
  return map;
}

std::optional<NodeIndex> CitationGraph::index_of(PatentId id) const {
  auto it = std::lower_bound(patents_.begin(), patents_.end(), id,
                             [](const PatentRecord& p, PatentId v) { return p.id < v; });
  if (it == patents_.end() || it->id != id) return std::nullopt;
  return static_cast<NodeIndex>(it - patents_.begin());
}

std::span<const NodeIndex> CitationGraph::citers(NodeIndex i) const {
  return std::span<const NodeIndex>(in_sources_)
      .subspan(in_offsets_[i], in_offsets_[i + 1] - in_offsets_[i]);
}

std::optional<Date> CitationGraph::earliest_grant() const {
  if (patents_.empty()) return std::nullopt;
  return std::min_element(patents_.begin(), patents_.end(),
                          [](const auto& a, const auto& b) {
                            return a.grant_date < b.grant_date;
                          })
      ->grant_date;
}

std::optional<Date> CitationGraph::latest_grant() const {
  if (patents_.empty()) return std::nullopt;
  return std::max_element(patents_.begin(), patents_.end(),
                          [](const auto& a, const auto& b) {
                            return a.grant_date < b.grant_date;
                          })
      ->grant_date;
}

CitationGraph build_graph(std::vector<PatentRecord> patents, const EdgeList& edges,
                          const ClassMap& classmap) {
  CitationGraph g;
  std::sort(patents.begin(), patents.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < patents.size(); ++i) {
    if (patents[i].id == patents[i - 1].id)
      throw InputError("duplicate patent_id " + std::to_string(patents[i].id));
  }
  for (auto& p : patents) {
    p.subcategory = classmap.subcategory_of(p.uspto_class);
    if (!p.subcategory) ++g.counters_.unmapped_patents;
  }
  g.patents_ = std::move(patents);
  g.classmap_ = classmap;

  const std::size_t n = g.patents_.size();
  g.out_degree_.assign(n, 0);
  g.edges_.reserve(edges.edges.size());
  for (const auto& c : edges.edges) {
    if (c.citing == c.cited) continue;
    auto from = g.index_of(c.citing);
    auto to = g.index_of(c.cited);
    if (!from || !to) {
      ++g.counters_.dangling_edges;
      continue;
    }
    g.edges_.push_back({*from, *to});
  }
  // Input edges are sorted by (citing, cited) ids; re-sort in case the caller
  // handed us an unsorted list, then drop duplicates.
  std::sort(g.edges_.begin(), g.edges_.end(), [](const Edge& a, const Edge& b) {
    return a.citing != b.citing ? a.citing < b.citing : a.cited < b.cited;
  });
  g.edges_.erase(std::unique(g.edges_.begin(), g.edges_.end()), g.edges_.end());

  g.in_offsets_.assign(n + 1, 0);
  for (const auto& e : g.edges_) {
    ++g.out_degree_[e.citing];
    ++g.in_offsets_[e.cited + 1];
  }
  for (std::size_t i = 0; i < n; ++i) g.in_offsets_[i + 1] += g.in_offsets_[i];
  g.in_sources_.resize(g.edges_.size());
  std::vector<std::size_t> fill(g.in_offsets_.begin(), g.in_offsets_.end() - 1);
  // Edges are in ascending citing order, so every citer list comes out sorted.
  for (const auto& e : g.edges_) g.in_sources_[fill[e.cited]++] = e.citing;

  if (g.counters_.dangling_edges > 0)
    spdlog::info("dropped {} citations with an endpoint outside the patent table",
                 g.counters_.dangling_edges);
  if (g.counters_.unmapped_patents > 0)
    spdlog::info("{} patents have a class missing from the class map",
                 g.counters_.unmapped_patents);
  return g;
}

bool Snapshot::in_scope(const PatentRecord& p) const {
  if (!scope) return true;
  if (!p.subcategory) return false;
  return std::binary_search(scope->begin(), scope->end(), *p.subcategory);
}

Snapshot snapshot(const CitationGraph& graph, Date as_of,
                  std::optional<std::vector<int>> scope) {
  Snapshot snap;
  snap.as_of = as_of;
  if (scope) {
    for (int code : *scope) {
      if (!is_subcategory(code))
        throw ConfigError("scope: " + std::to_string(code) + " is not a subcategory code");
    }
    std::sort(scope->begin(), scope->end());
    scope->erase(std::unique(scope->begin(), scope->end()), scope->end());
  }
  snap.scope = std::move(scope);

  const auto patents = graph.patents();
  std::vector<char> member(patents.size(), 0);
  for (std::size_t i = 0; i < patents.size(); ++i) {
    const auto& p = patents[i];
    if (p.grant_date <= as_of && snap.in_scope(p)) {
      member[i] = 1;
      snap.members.push_back(static_cast<NodeIndex>(i));
    }
  }
  const auto edges = graph.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (member[edges[e].citing] && member[edges[e].cited]) snap.edge_view.push_back(e);
  }
  if (snap.members.empty()) spdlog::warn("snapshot at {} is empty", as_of.iso());
  return snap;
}

std::size_t connected_citations(const CitationGraph& graph, const Snapshot& snap) {
  std::vector<char> member(graph.size(), 0);
  for (auto m : snap.members) member[m] = 1;
  std::size_t count = 0;
  for (const auto& e : graph.edges()) {
    if (!member[e.citing] && !member[e.cited]) continue;
    if (graph.patent(e.citing).grant_date <= snap.as_of &&
        graph.patent(e.cited).grant_date <= snap.as_of)
      ++count;
  }
  return count;
}

}  // namespace citevec
