#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <regex>
#include <set>
#include <sstream>
#include <tuple>

#include "citevec/errors.hpp"
#include "citevec/synth.hpp"
#include "citevec/viz.hpp"
#include "support.hpp"

using namespace citevec;

namespace {

double dist2(const PointMatrix& m, std::size_t i, std::size_t j) {
  double s = 0.0;
  for (std::size_t d = 0; d < m.dim; ++d) {
    const double t = m.row(i)[d] - m.row(j)[d];
    s += t * t;
  }
  return s;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

std::vector<std::string> attribute(const std::string& text, const std::string& name) {
  std::vector<std::string> out;
  std::regex re(name + "=\"([^\"]*)\"");
  for (std::sregex_iterator it(text.begin(), text.end(), re), end; it != end; ++it)
    out.push_back((*it)[1]);
  return out;
}

}  // namespace

TEST_CASE("k-nearest-neighbour graph against brute force") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto pts = testing::random_points(60, 3, seed);
    const std::size_t k = 1 + seed % 5;
    const auto g = knn_graph(pts, k);
    REQUIRE(g.size() == 60);
    CHECK(g.ids == pts.ids);
    std::set<std::pair<std::size_t, std::size_t>> want;
    for (std::size_t i = 0; i < 60; ++i) {
      std::vector<std::pair<double, std::size_t>> d;
      for (std::size_t j = 0; j < 60; ++j)
        if (j != i) d.push_back({dist2(pts, i, j), j});
      std::sort(d.begin(), d.end());
      for (std::size_t r = 0; r < k; ++r) {
        want.insert({std::min(i, d[r].second), std::max(i, d[r].second)});
      }
    }
    std::set<std::pair<std::size_t, std::size_t>> got;
    for (std::size_t i = 0; i < 60; ++i) {
      CHECK(std::is_sorted(g.adjacency[i].begin(), g.adjacency[i].end()));
      for (auto j : g.adjacency[i]) {
        CHECK(j != i);
        CHECK(std::binary_search(g.adjacency[j].begin(), g.adjacency[j].end(),
                                 static_cast<std::uint32_t>(i)));
        got.insert({std::min<std::size_t>(i, j), std::max<std::size_t>(i, j)});
      }
      CHECK(g.adjacency[i].size() >= k);
    }
    CHECK(got == want);
    CHECK(g.edge_count() == want.size());
  }
  CHECK_THROWS_AS(knn_graph(testing::random_points(5, 2, 1), 0), ContractError);
  CHECK_THROWS_AS(knn_graph(testing::random_points(5, 2, 1), 5), ContractError);
}

TEST_CASE("neighbour ties go to the smaller id") {
  PointMatrix m;
  m.dim = 1;
  const std::vector<std::pair<PatentId, double>> at = {
      {30, 0.0}, {10, -1.0}, {11, -1.1}, {20, 1.0}, {21, 1.1}};
  for (auto [id, x] : at) {
    double v[] = {x};
    m.push_back(id, v);
  }
  const auto g = knn_graph(m, 1);
  // Point 30 has 10 and 20 at distance 1; both of those have a closer partner.
  CHECK(g.ids == std::vector<PatentId>{10, 11, 20, 21, 30});
  CHECK(g.adjacency[4] == std::vector<std::uint32_t>{0});
}

TEST_CASE("layout is deterministic and centred") {
  const auto pts = planted_points(40, 0.05, 2).points;
  const auto g = knn_graph(pts, 5);
  LayoutOptions opt;
  opt.iterations = 100;
  const auto a = fruchterman_reingold(g, opt);
  const auto b = fruchterman_reingold(g, opt);
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
  opt.seed = 2;
  CHECK(fruchterman_reingold(g, opt).x != a.x);

  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::isfinite(a.x[i]));
    CHECK(std::isfinite(a.y[i]));
    sx += a.x[i];
    sy += a.y[i];
    CHECK(a.x[i] >= a.bounds.min_x);
    CHECK(a.x[i] <= a.bounds.max_x);
  }
  CHECK(std::abs(sx / a.size()) < 1e-9);
  CHECK(std::abs(sy / a.size()) < 1e-9);

  // The two planted groups are disconnected in the graph; linked points
  // end up closer than unlinked ones on average.
  double linked = 0, unlinked = 0;
  std::size_t nl = 0, nu = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const double d = std::hypot(a.x[i] - a.x[j], a.y[i] - a.y[j]);
      if (std::binary_search(g.adjacency[i].begin(), g.adjacency[i].end(),
                             static_cast<std::uint32_t>(j))) {
        linked += d;
        ++nl;
      } else {
        unlinked += d;
        ++nu;
      }
    }
  }
  CHECK(linked / nl < unlinked / nu);
}

TEST_CASE("grid repulsion above the exact limit") {
  const auto g = knn_graph(testing::random_points(300, 2, 4), 4);
  LayoutOptions opt;
  opt.iterations = 50;
  opt.exact_limit = 100;
  const auto a = fruchterman_reingold(g, opt);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::isfinite(a.x[i]));
  CHECK(fruchterman_reingold(g, opt).x == a.x);

  SimilarityGraph single;
  single.ids = {5};
  single.adjacency = {{}};
  const auto s = fruchterman_reingold(single);
  CHECK(s.x == std::vector<double>{0.0});
  CHECK_THROWS_AS(fruchterman_reingold(SimilarityGraph{}), ContractError);
}

TEST_CASE("scatter output") {
  const auto pts = testing::random_points(12, 2, 1);
  const auto layout = fruchterman_reingold(knn_graph(pts, 3));
  std::vector<std::size_t> cat(12, 1);
  cat[4] = 0;
  std::ostringstream out;
  emit_scatter(layout, cat, emphasis_key("class <442>", "other"), out);
  const auto svg = out.str();
  CHECK(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\"", 0) == 0);
  CHECK(count(svg, "class=\"point\"") == 12);
  CHECK(count(svg, "class=\"legend-entry\"") == 2);
  CHECK(count(svg, "fill=\"#d62728\"") == 2);  // one point, one legend swatch
  CHECK(svg.find("class &lt;442&gt;") != std::string::npos);
  const auto ids = attribute(svg, "data-id");
  REQUIRE(ids.size() == 12);
  CHECK(ids[4] == std::to_string(pts.ids[4]));

  std::vector<std::size_t> wrong(11, 0);
  CHECK_THROWS_AS(emit_scatter(layout, wrong, ColorKey{{"a"}, palette(1)}, out), ContractError);
  cat[0] = 5;
  CHECK_THROWS_AS(emit_scatter(layout, cat, emphasis_key("a", "b"), out), ContractError);
  CHECK_THROWS_AS(emit_scatter(layout, std::vector<std::size_t>(12, 0),
                               emphasis_key("a", "b"), "/nonexistent/dir/x.svg"),
                  InputError);
}

TEST_CASE("palette") {
  const auto p = palette(12);
  REQUIRE(p.size() == 12);
  CHECK(std::set<std::string>(p.begin(), p.begin() + 10).size() == 10);
  CHECK(p[10] == p[0]);
}

TEST_CASE("dendrogram output keeps exact heights") {
  const auto pts = testing::random_points(25, 3, 8);
  const auto d = ward_cluster(pts);
  const auto a = cut(d, 3);
  std::ostringstream out;
  emit_dendrogram(d, a, out);
  const auto svg = out.str();
  CHECK(count(svg, "class=\"merge\"") == 24);
  CHECK(count(svg, "class=\"leaf\"") == 25);
  const auto heights = attribute(svg, "data-height");
  REQUIRE(heights.size() == 24);
  for (std::size_t i = 0; i < 24; ++i) CHECK(std::stod(heights[i]) == d.merges[i].height);
  // The top merges join different clusters and are drawn grey.
  CHECK(count(svg, "stroke=\"#555555\"") == 2);

  auto other = cut(ward_cluster(testing::random_points(25, 3, 8, true)), 3);
  if (other.ids != d.leaf_ids) CHECK_THROWS_AS(emit_dendrogram(d, other, out), ContractError);
  Assignment wrong = a;
  wrong.ids.pop_back();
  wrong.labels.pop_back();
  CHECK_THROWS_AS(emit_dendrogram(d, wrong, out), ContractError);
}

TEST_CASE("small graph examples") {
  PointMatrix m;
  m.dim = 1;
  for (auto [id, x] : std::vector<std::pair<PatentId, double>>{{1, 0.0}, {2, 1.0}, {3, 5.0}}) {
    double v[] = {x};
    m.push_back(id, v);
  }
  const auto g1 = knn_graph(m, 1);
  CHECK(g1.adjacency[0] == std::vector<std::uint32_t>{1});
  CHECK(g1.adjacency[1] == std::vector<std::uint32_t>{0, 2});
  CHECK(g1.adjacency[2] == std::vector<std::uint32_t>{1});
  const auto full = knn_graph(testing::random_points(9, 2, 3), 8);
  CHECK(full.edge_count() == 36);

  // Naive scan over 200 vectors.
  const auto pts = testing::random_points(200, 36, 17, true);
  const auto g = knn_graph(pts, 10);
  std::vector<std::size_t> order(200);
  for (std::size_t i = 0; i < 200; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return pts.ids[a] < pts.ids[b]; });
  std::set<std::pair<std::size_t, std::size_t>> want, got;
  for (std::size_t a = 0; a < 200; ++a) {
    std::vector<std::tuple<double, PatentId, std::size_t>> d;
    for (std::size_t b = 0; b < 200; ++b)
      if (b != a) d.push_back({dist2(pts, order[a], order[b]), pts.ids[order[b]], b});
    std::sort(d.begin(), d.end());
    for (std::size_t r = 0; r < 10; ++r)
      want.insert({std::min(a, std::get<2>(d[r])), std::max(a, std::get<2>(d[r]))});
    for (auto b : g.adjacency[a]) got.insert({std::min<std::size_t>(a, b), std::max<std::size_t>(a, b)});
  }
  CHECK(got == want);

  SimilarityGraph two;
  two.ids = {1, 2};
  two.adjacency = {{1}, {0}};
  const auto l = fruchterman_reingold(two);
  const double sep = std::hypot(l.x[0] - l.x[1], l.y[0] - l.y[1]);
  CHECK(sep >= 0.1);
  CHECK(sep <= 10.0);
}

TEST_CASE("small drawings") {
  Layout l;
  l.ids = {1, 2, 3};
  l.x = {0, 1, 2};
  l.y = {0, 1, 0};
  l.bounds = {0, 0, 2, 1};
  std::ostringstream three;
  emit_scatter(l, std::vector<std::size_t>{0, 1, 1}, ColorKey{{"8", "442"}, palette(2)}, three);
  CHECK(count(three.str(), "class=\"point\"") == 3);
  CHECK(count(three.str(), "class=\"legend-entry\"") == 2);

  std::ostringstream empty;
  emit_scatter(Layout{}, std::vector<std::size_t>{}, ColorKey{{"a"}, palette(1)}, empty);
  CHECK(count(empty.str(), "class=\"point\"") == 0);
  CHECK(count(empty.str(), "class=\"legend-entry\"") == 1);
  CHECK(empty.str().ends_with("</svg>\n"));

  PointMatrix m;
  m.dim = 1;
  for (double x : {0.0, 1.0, 5.0}) {
    double v[] = {x};
    m.push_back(static_cast<PatentId>(m.size() + 1), v);
  }
  const auto d = ward_cluster(m);
  std::ostringstream tree;
  emit_dendrogram(d, cut(d, 1), tree);
  CHECK(attribute(tree.str(), "data-height") == std::vector<std::string>{"0.5", "13.5"});
  // Junctions sit at the merge heights in data coordinates.
  CHECK(tree.str().find(",13.5 ") != std::string::npos);
  auto strokes = attribute(tree.str(), "stroke");
  CHECK(std::set<std::string>(strokes.begin(), strokes.end()).size() == 1);
  CHECK(count(tree.str(), "class=\"leaf\"") == 3);

  testing::TempDir dir;
  emit_dendrogram(d, cut(d, 2), dir / "a.svg");
  emit_dendrogram(d, cut(d, 2), dir / "b.svg");
  CHECK(testing::read_file(dir / "a.svg") == testing::read_file(dir / "b.svg"));
  CHECK_THROWS_AS(emit_dendrogram(d, cut(d, 2), dir / "no/such/dir/x.svg"), InputError);
}
