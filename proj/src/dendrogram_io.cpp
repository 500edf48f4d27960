#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "citevec/clustering.hpp"
#include "citevec/errors.hpp"
#include "table_reader.hpp"

namespace citevec {
namespace {

std::string format_height(double h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", h);
  return buf;
}

bool next_data_line(std::istream& in, std::string& line, std::size_t& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    return true;
  }
  return false;
}

}  // namespace

void write_merge_table(const Dendrogram& d, std::ostream& out) {
  out << "# ward dendrogram; height = delta_ess; leaves = " << d.n_leaves() << '\n';
  out << "# left\tright\theight\tsize\n";
  for (const auto& m : d.merges) {
    out << m.left << '\t' << m.right << '\t' << format_height(m.height) << '\t' << m.size
        << '\n';
  }
}

void write_leaf_manifest(const Dendrogram& d, std::ostream& out) {
  out << "# leaf patent ids in node order\n";
  for (auto id : d.leaf_ids) out << id << '\n';
}

Dendrogram read_dendrogram(std::istream& merge_table, std::istream& leaf_manifest) {
  Dendrogram d;
  std::string line;
  std::size_t lineno = 0;
  while (next_data_line(leaf_manifest, line, lineno)) {
    auto id = detail::parse_int<PatentId>(line);
    if (!id) throw InputError("leaf manifest line " + std::to_string(lineno) + ": bad id");
    d.leaf_ids.push_back(*id);
  }
  lineno = 0;
  while (next_data_line(merge_table, line, lineno)) {
    std::istringstream row(line);
    std::string l, r, h, s;
    if (!(row >> l >> r >> h >> s))
      throw InputError("merge table line " + std::to_string(lineno) + ": expected 4 fields");
    auto left = detail::parse_int<std::size_t>(l);
    auto right = detail::parse_int<std::size_t>(r);
    auto size = detail::parse_int<std::size_t>(s);
    double height = 0.0;
    auto [p, ec] = std::from_chars(h.data(), h.data() + h.size(), height);
    if (!left || !right || !size || ec != std::errc{} || p != h.data() + h.size())
      throw InputError("merge table line " + std::to_string(lineno) + ": bad field");
    d.merges.push_back({*left, *right, height, *size});
  }
  try {
    validate(d);
  } catch (const ContractError& e) {
    throw InputError(std::string("invalid dendrogram: ") + e.what());
  }
  return d;
}

std::string to_newick(const Dendrogram& d) {
  const std::size_t n = d.n_leaves();
  if (n == 0) return ";";
  const std::size_t root = n + d.merges.size() - 1;
  auto height = [&](std::size_t node) { return node >= n ? d.merges[node - n].height : 0.0; };
  std::vector<std::size_t> parent(root + 1, root);
  for (std::size_t i = 0; i < d.merges.size(); ++i)
    parent[d.merges[i].left] = parent[d.merges[i].right] = n + i;

  std::ostringstream out;
  // Iterative walk: state 0 = enter, 1 = between children, 2 = leave.
  std::vector<std::pair<std::size_t, int>> stack{{root, 0}};
  while (!stack.empty()) {
    auto& [node, state] = stack.back();
    if (node < n) {
      out << d.leaf_ids[node];
    } else if (state == 0) {
      out << '(';
      state = 1;
      stack.push_back({d.merges[node - n].left, 0});
      continue;
    } else if (state == 1) {
      out << ',';
      state = 2;
      stack.push_back({d.merges[node - n].right, 0});
      continue;
    } else {
      out << ')';
    }
    if (node != root) out << ':' << format_height(height(parent[node]) - height(node));
    stack.pop_back();
  }
  out << ';';
  return out.str();
}

}  // namespace citevec
