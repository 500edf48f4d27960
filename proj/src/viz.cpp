#include "citevec/viz.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <unordered_map>

#include "citevec/errors.hpp"

namespace citevec {
namespace {

std::string num(double x, int digits = 6) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

std::string exact(double x) { return num(x, 17); }

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::ofstream open_svg(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path.string());
  return f;
}

double squared(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Points ordered by id, as knn ties and node numbering depend on it.
PointMatrix sorted_by_id(const PointMatrix& points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return points.ids[a] < points.ids[b]; });
  PointMatrix out;
  out.dim = points.dim;
  for (auto i : order) out.push_back(points.ids[i], points.row(i));
  return out;
}

}  // namespace

std::size_t SimilarityGraph::edge_count() const {
  std::size_t degree = 0;
  for (const auto& a : adjacency) degree += a.size();
  return degree / 2;
}

SimilarityGraph knn_graph(const PointMatrix& input, std::size_t k) {
  const std::size_t n = input.size();
  if (k < 1 || k >= n) throw ContractError("knn_graph: need 1 <= k < n");
  const PointMatrix points = sorted_by_id(input);
  for (std::size_t i = 1; i < n; ++i)
    if (points.ids[i] == points.ids[i - 1]) throw ContractError("knn_graph: duplicate id");

  std::vector<std::vector<std::uint32_t>> nearest(n);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::uint32_t>> cand;
    cand.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) cand.emplace_back(squared(points.row(i), points.row(j)),
                                    static_cast<std::uint32_t>(j));
    // Node index order equals patent id order, so pair comparison breaks
    // distance ties by id.
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
    for (std::size_t r = 0; r < k; ++r) nearest[i].push_back(cand[r].second);
  }

  SimilarityGraph g;
  g.ids = points.ids;
  g.adjacency.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    for (auto j : nearest[i]) {
      g.adjacency[i].push_back(j);
      g.adjacency[j].push_back(static_cast<std::uint32_t>(i));
    }
  }
  for (auto& a : g.adjacency) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  return g;
}

SimilarityGraph knn_graph(const VectorSet& set, std::size_t k) {
  return knn_graph(retained_points(set), k);
}

Layout fruchterman_reingold(const SimilarityGraph& g, const LayoutOptions& options) {
  const std::size_t n = g.size();
  if (n == 0) throw ContractError("fruchterman_reingold: empty graph");
  Layout layout;
  layout.ids = g.ids;
  layout.x.assign(n, 0.0);
  layout.y.assign(n, 0.0);
  if (n == 1) return layout;

  const double side = std::sqrt(static_cast<double>(n));
  std::mt19937_64 rng(options.seed);
  for (std::size_t i = 0; i < n; ++i) {
    layout.x[i] = (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5) * side;
    layout.y[i] = (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5) * side;
  }

  constexpr double kIdeal = 1.0;
  constexpr double kTiny = 1e-9;
  const bool exact_repulsion = n <= options.exact_limit;
  const double cutoff = 2.0 * kIdeal;
  const double t0 = side / 10.0;
  std::vector<double> dx(n), dy(n);

  for (std::size_t it = 0; it < options.iterations; ++it) {
    const double temperature =
        t0 * (1.0 - static_cast<double>(it) / static_cast<double>(options.iterations));

    // Grid of cells of side `cutoff`; cells hold node indices ascending.
    std::unordered_map<std::int64_t, std::vector<std::uint32_t>> grid;
    const auto cell_of = [&](double v) {
      return static_cast<std::int64_t>(std::floor(v / cutoff));
    };
    const auto key = [](std::int64_t cx, std::int64_t cy) { return cx * 2000003 + cy; };
    if (!exact_repulsion)
      for (std::size_t i = 0; i < n; ++i)
        grid[key(cell_of(layout.x[i]), cell_of(layout.y[i]))].push_back(
            static_cast<std::uint32_t>(i));

#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
      double fx = 0.0, fy = 0.0;
      const auto repel = [&](std::size_t j) {
        if (j == i) return;
        double ex = layout.x[i] - layout.x[j];
        double ey = layout.y[i] - layout.y[j];
        double d2 = ex * ex + ey * ey;
        if (!exact_repulsion && d2 >= cutoff * cutoff) return;
        if (d2 < kTiny) {
          // Coincident points: push apart along a direction fixed by the pair.
          ex = i < j ? kTiny : -kTiny;
          ey = 0.0;
          d2 = kTiny * kTiny;
        }
        const double f = kIdeal * kIdeal / d2;  // (k^2 / d) along the unit vector
        fx += ex * f;
        fy += ey * f;
      };
      if (exact_repulsion) {
        for (std::size_t j = 0; j < n; ++j) repel(j);
      } else {
        const auto cx = cell_of(layout.x[i]);
        const auto cy = cell_of(layout.y[i]);
        for (std::int64_t ox = -1; ox <= 1; ++ox)
          for (std::int64_t oy = -1; oy <= 1; ++oy) {
            auto found = grid.find(key(cx + ox, cy + oy));
            if (found == grid.end()) continue;
            for (auto j : found->second) repel(j);
          }
      }
      for (auto j : g.adjacency[i]) {
        const double ex = layout.x[i] - layout.x[j];
        const double ey = layout.y[i] - layout.y[j];
        const double d = std::sqrt(ex * ex + ey * ey);
        const double f = d / kIdeal;  // (d^2 / k) along the unit vector
        fx -= ex * f;
        fy -= ey * f;
      }
      dx[i] = fx;
      dy[i] = fy;
    }

    for (std::size_t i = 0; i < n; ++i) {
      const double len = std::sqrt(dx[i] * dx[i] + dy[i] * dy[i]);
      if (len > 0.0) {
        const double step = std::min(len, temperature) / len;
        layout.x[i] += dx[i] * step;
        layout.y[i] += dy[i] * step;
      }
    }
  }

  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += layout.x[i];
    my += layout.y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  Bounds& b = layout.bounds;
  b.min_x = b.min_y = std::numeric_limits<double>::infinity();
  b.max_x = b.max_y = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    layout.x[i] -= mx;
    layout.y[i] -= my;
    b.min_x = std::min(b.min_x, layout.x[i]);
    b.max_x = std::max(b.max_x, layout.x[i]);
    b.min_y = std::min(b.min_y, layout.y[i]);
    b.max_y = std::max(b.max_y, layout.y[i]);
  }
  return layout;
}

std::vector<std::string> palette(std::size_t n) {
  static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(kColors[i % 10]);
  return out;
}

ColorKey emphasis_key(const std::string& highlighted, const std::string& rest) {
  return {{highlighted, rest}, {"#d62728", "#1f77b4"}};
}

void emit_scatter(const Layout& layout, std::span<const std::size_t> category,
                  const ColorKey& key, std::ostream& out) {
  if (category.size() != layout.size())
    throw ContractError("emit_scatter: one category per point required");
  if (key.names.size() != key.colors.size())
    throw ContractError("emit_scatter: colour key names and colours differ in length");
  for (auto c : category)
    if (c >= key.names.size()) throw ContractError("emit_scatter: category outside the key");

  constexpr double kPlot = 800.0, kMargin = 20.0, kLegend = 200.0;
  const double height = std::max(kPlot, 40.0 + 20.0 * static_cast<double>(key.names.size()));
  const Bounds& b = layout.bounds;
  const double span = std::max({b.max_x - b.min_x, b.max_y - b.min_y, 1e-12});
  const double scale = (kPlot - 2 * kMargin) / span;
  const double cx = (b.min_x + b.max_x) / 2.0;
  const double cy = (b.min_y + b.max_y) / 2.0;

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kPlot + kLegend)
      << "\" height=\"" << num(height) << "\" viewBox=\"0 0 " << num(kPlot + kLegend) << ' '
      << num(height) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<g class=\"points\">\n";
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const double px = kPlot / 2 + (layout.x[i] - cx) * scale;
    const double py = kPlot / 2 - (layout.y[i] - cy) * scale;
    out << "<circle class=\"point\" data-id=\"" << layout.ids[i] << "\" cx=\"" << num(px)
        << "\" cy=\"" << num(py) << "\" r=\"3\" fill=\"" << key.colors[category[i]]
        << "\"/>\n";
  }
  out << "</g>\n<g class=\"legend\">\n";
  for (std::size_t c = 0; c < key.names.size(); ++c) {
    const double y = 20.0 + 20.0 * static_cast<double>(c);
    out << "<g class=\"legend-entry\"><rect x=\"" << num(kPlot + 10) << "\" y=\"" << num(y)
        << "\" width=\"12\" height=\"12\" fill=\"" << key.colors[c] << "\"/><text x=\""
        << num(kPlot + 28) << "\" y=\"" << num(y + 10)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape(key.names[c])
        << "</text></g>\n";
  }
  out << "</g>\n</svg>\n";
}

void emit_scatter(const Layout& layout, std::span<const std::size_t> category,
                  const ColorKey& key, const std::filesystem::path& path) {
  auto f = open_svg(path);
  emit_scatter(layout, category, key, f);
  if (!f) throw InputError("write failed: " + path.string());
}

void emit_dendrogram(const Dendrogram& d, const Assignment& a, std::ostream& out) {
  validate(d);
  const std::size_t n = d.n_leaves();
  if (a.ids != d.leaf_ids) throw ContractError("emit_dendrogram: assignment is not a cut of the tree");
  const std::size_t nodes = n + d.merges.size();

  // Leaf order from a left-first depth-first walk.
  std::vector<double> x(nodes, 0.0), y(nodes, 0.0);
  std::vector<int> label(nodes, -1);
  std::vector<std::size_t> order;
  order.reserve(n);
  {
    std::vector<std::size_t> stack = {nodes - 1};
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      if (v < n) {
        order.push_back(v);
      } else {
        const auto& m = d.merges[v - n];
        stack.push_back(m.right);
        stack.push_back(m.left);
      }
    }
  }
  for (std::size_t r = 0; r < order.size(); ++r) x[order[r]] = static_cast<double>(r);
  for (std::size_t i = 0; i < n; ++i) label[i] = a.labels[i];
  double max_h = 0.0;
  for (std::size_t m = 0; m < d.merges.size(); ++m) {
    const auto& mg = d.merges[m];
    x[n + m] = (x[mg.left] + x[mg.right]) / 2.0;
    y[n + m] = mg.height;
    label[n + m] = label[mg.left] == label[mg.right] ? label[mg.left] : -1;
    max_h = std::max(max_h, mg.height);
  }

  constexpr double kWidth = 1000.0, kHeight = 600.0, kMargin = 30.0;
  const double sx = (kWidth - 2 * kMargin) / std::max<double>(1.0, static_cast<double>(n) - 1.0);
  const double sy = (kHeight - 2 * kMargin) / (max_h > 0.0 ? max_h : 1.0);
  const auto colors = palette(a.k);
  const auto color_of = [&](std::size_t v) {
    return label[v] >= 0 ? colors[static_cast<std::size_t>(label[v])] : std::string("#555555");
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\""
      << num(kHeight) << "\" viewBox=\"0 0 " << num(kWidth) << ' ' << num(kHeight) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<g class=\"tree\" transform=\"matrix(" << exact(sx) << " 0 0 " << exact(-sy) << ' '
      << exact(kMargin) << ' ' << exact(kHeight - kMargin) << ")\" fill=\"none\">\n";
  for (std::size_t m = 0; m < d.merges.size(); ++m) {
    const auto& mg = d.merges[m];
    const std::string h = exact(mg.height);
    out << "<polyline class=\"merge\" data-height=\"" << h << "\" points=\""
        << exact(x[mg.left]) << ',' << exact(y[mg.left]) << ' ' << exact(x[mg.left]) << ','
        << h << ' ' << exact(x[mg.right]) << ',' << h << ' ' << exact(x[mg.right]) << ','
        << exact(y[mg.right]) << "\" stroke=\"" << color_of(n + m)
        << "\" stroke-width=\"1\" vector-effect=\"non-scaling-stroke\"/>\n";
  }
  out << "</g>\n<g class=\"leaves\">\n";
  for (std::size_t i = 0; i < n; ++i) {
    out << "<circle class=\"leaf\" data-id=\"" << d.leaf_ids[i] << "\" cx=\""
        << num(kMargin + x[i] * sx, 10) << "\" cy=\"" << num(kHeight - kMargin, 10)
        << "\" r=\"1.5\" fill=\"" << color_of(i) << "\"/>\n";
  }
  out << "</g>\n</svg>\n";
}

void emit_dendrogram(const Dendrogram& d, const Assignment& a,
                     const std::filesystem::path& path) {
  auto f = open_svg(path);
  emit_dendrogram(d, a, f);
  if (!f) throw InputError("write failed: " + path.string());
}

}  // namespace citevec
