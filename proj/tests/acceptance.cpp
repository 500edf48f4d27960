// Acceptance run: one PASS / FAIL / SKIPPED line per criterion.
//
// The optional NBER reproduction runs when CITEVEC_NBER_DIR points at a
// directory holding pat63_99.txt and cite75_99.txt.

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <string>

#include "citevec/bundle.hpp"
#include "citevec/digest.hpp"
#include "citevec/dynamics.hpp"
#include "citevec/errors.hpp"
#include "citevec/pipeline.hpp"
#include "citevec/synth.hpp"
#include "support.hpp"

using namespace citevec;
namespace fs = std::filesystem;

namespace {

enum class Verdict { pass, fail, skipped };

struct Outcome {
  Verdict verdict = Verdict::fail;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {Verdict::fail, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const char* tag = o.verdict == Verdict::pass ? "PASS" : o.verdict == Verdict::fail ? "FAIL" : "SKIPPED";
  if (o.verdict == Verdict::fail) ++failures;
  std::printf("%-7s %s: %s [%.1f s]\n", tag, name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string strf(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Sparse non-negative unit vectors in citation-vector space.
PointMatrix random_unit_vectors(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointMatrix m;
  m.dim = kNumSubcategories;
  std::vector<double> row(m.dim);
  for (std::size_t i = 0; i < n; ++i) {
    double norm = 0.0;
    while (norm == 0.0) {
      for (auto& x : row) {
        x = u(rng) < 0.2 ? u(rng) : 0.0;
        norm += x * x;
      }
    }
    for (auto& x : row) x /= std::sqrt(norm);
    m.push_back(static_cast<PatentId>(1000 + 3 * i), row);
  }
  return m;
}

double brute_ess(const PointMatrix& pts, const Assignment& a) {
  // Assignment ids follow the ascending ids of `pts`, which are generated ascending.
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < a.ids.size(); ++i) groups[a.labels[i]].push_back(i);
  double total = 0.0;
  for (const auto& [label, rows] : groups) {
    for (std::size_t d = 0; d < pts.dim; ++d) {
      double mean = 0.0;
      for (auto r : rows) mean += pts.row(r)[d];
      mean /= static_cast<double>(rows.size());
      for (auto r : rows) total += (pts.row(r)[d] - mean) * (pts.row(r)[d] - mean);
    }
  }
  return total;
}

const std::vector<Date> kDates = testing::synth_dates();

Outcome vectors_suite() {
  std::size_t corpora = 0, vectors = 0, senders = 0, bad_norm = 0, bad_own = 0, bad_mass = 0,
              bad_sum = 0;
  // A subcategory no random corpus uses; one sender at a time is moved there.
  const int probe = kSubcategoryCodes.back();
  for (std::uint64_t seed = 1; seed <= 1000; ++seed, ++corpora) {
    auto rc = testing::random_corpus(seed, 40, 120);
    auto map = testing::identity_map();
    const auto g = build_graph(rc.patents, rc.edges, map);
    for (Date date : {Date(8000), Date(9500), Date(11500)}) {
      const auto s = snapshot(g, date);
      const auto set = vector_set(g, s);
      for (const auto& row : set.rows) {
        const auto own = static_cast<std::size_t>(*subcategory_index(row.subcategory));
        if (row.coords[own] != 0.0) ++bad_own;
        if (row.is_zero) continue;
        ++vectors;
        double sq = 0.0;
        for (double x : row.coords) sq += x * x;
        if (std::abs(std::sqrt(sq) - 1.0) > 1e-9) ++bad_norm;
      }

      // Ordered per-receiver sums straight from the edge list.
      std::map<PatentId, const PatentRecord*> by_id;
      for (const auto& p : g.patents()) by_id[p.id] = &p;
      std::map<PatentId, int> degree;
      for (const auto& e : rc.edges.edges)
        if (by_id.count(e.citing) && by_id.count(e.cited)) ++degree[e.citing];
      for (auto m : s.members) {
        const auto& recv = g.patent(m);
        if (!recv.subcategory) continue;
        Components want{};
        for (const auto& e : rc.edges.edges) {  // ascending citing id
          if (e.cited != recv.id || !by_id.count(e.citing)) continue;
          const auto* snd = by_id.at(e.citing);
          if (snd->grant_date > date || !snd->subcategory || snd->subcategory == recv.subcategory)
            continue;
          want[*subcategory_index(*snd->subcategory)] += 1.0 / degree[e.citing];
        }
        if (raw_sums(g, s, recv.id) != want) ++bad_sum;
      }
    }

    // Per-sender mass: isolate up to three senders on the probe subcategory.
    std::map<PatentId, int> degree;
    std::map<PatentId, Date> granted;
    for (const auto& p : rc.patents) granted[p.id] = p.grant_date;
    for (const auto& e : rc.edges.edges)
      if (granted.count(e.citing) && granted.count(e.cited)) ++degree[e.citing];
    int probed = 0;
    for (auto [sender, d] : degree) {
      if (probed++ == 3) break;
      ++senders;
      auto patents = rc.patents;
      for (auto& p : patents)
        if (p.id == sender) p.uspto_class = 777;
      auto m2 = map;
      m2.add(777, probe);
      const auto g2 = build_graph(patents, rc.edges, m2);
      const Date date(11500);
      const auto s = snapshot(g2, date);
      std::size_t k = 0, reached = 0;
      bool exact = true;
      const bool active = granted[sender] <= date;
      for (const auto& e : rc.edges.edges) {
        if (e.citing != sender || !granted.count(e.cited)) continue;
        const auto& recv = g2.patent(*g2.index_of(e.cited));
        if (active && granted[e.cited] <= date && recv.subcategory && recv.subcategory != probe) ++k;
      }
      for (auto mem : s.members) {
        const auto& recv = g2.patent(mem);
        if (!recv.subcategory) continue;
        const double c = raw_sums(g2, s, recv.id)[kNumSubcategories - 1];
        if (c == 0.0) continue;
        ++reached;
        exact = exact && c == 1.0 / static_cast<double>(d);
      }
      if (!exact || reached != k) ++bad_mass;
    }
  }
  const bool ok = bad_norm == 0 && bad_own == 0 && bad_mass == 0 && bad_sum == 0;
  return {ok ? Verdict::pass : Verdict::fail,
          strf("%zu corpora, %zu non-zero vectors, %zu probed senders; norm violations %zu, "
              "own-subcategory violations %zu, sum mismatches %zu, k/d mismatches %zu",
              corpora, vectors, senders, bad_norm, bad_own, bad_sum, bad_mass)};
}

std::vector<std::pair<PointMatrix, Dendrogram>> oracle_instances;

Outcome ward_oracle() {
  std::size_t instances = 0, mismatched = 0;
  double worst = 0.0;
  for (std::size_t n : {10, 50, 200}) {
    for (std::uint64_t seed = 0; seed < 50; ++seed, ++instances) {
      auto pts = random_unit_vectors(n, n * 1000 + seed);
      const auto fast = ward_cluster(pts);
      const auto slow = ward_cluster_naive(pts);
      bool same = fast.leaf_ids == slow.leaf_ids && fast.merges.size() == slow.merges.size();
      for (std::size_t i = 0; same && i < fast.merges.size(); ++i) {
        const auto& a = fast.merges[i];
        const auto& b = slow.merges[i];
        same = a.left == b.left && a.right == b.right && a.size == b.size;
        const double rel = std::abs(a.height - b.height) / std::max(1.0, std::abs(b.height));
        worst = std::max(worst, rel);
        same = same && rel <= 1e-9;
      }
      if (!same) ++mismatched;
      oracle_instances.emplace_back(std::move(pts), fast);
    }
  }
  return {mismatched == 0 ? Verdict::pass : Verdict::fail,
          strf("%zu instances at n = 10, 50, 200; %zu mismatched; worst relative height "
              "difference %.2e (tolerance 1e-9)",
              instances, mismatched, worst)};
}

Outcome ess_identity() {
  std::size_t cuts = 0, bad = 0;
  double worst = 0.0;
  for (const auto& [pts, d] : oracle_instances) {
    const std::size_t n = d.n_leaves();
    double below = 0.0;
    for (std::size_t k = n; k >= 1; --k, ++cuts) {
      const double ess = brute_ess(pts, cut(d, k));
      const double rel = ess == 0.0 ? std::abs(below) : std::abs(ess - below) / ess;
      worst = std::max(worst, rel);
      if (rel > 1e-6) ++bad;
      if (k > 1) below += d.merges[n - k].height;
    }
  }
  return {bad == 0 && cuts > 0 ? Verdict::pass : Verdict::fail,
          strf("%zu cuts over %zu dendrograms; %zu outside 1e-6; worst relative difference %.2e",
              cuts, oracle_instances.size(), bad, worst)};
}

Outcome planted_recovery() {
  double min_ari = 1.0;
  int gap2 = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto p = planted_points(1000, 0.05, seed);
    const auto d = ward_cluster(p.points);
    const auto a = cut(d, 2);
    min_ari = std::min(min_ari, adjusted_rand(std::span<const int>(a.labels),
                                              std::span<const int>(p.labels)));
    gap2 += gap_k(d, 10) == 2 ? 1 : 0;
  }
  const bool ok = min_ari >= 0.99 && gap2 >= 19;
  return {ok ? Verdict::pass : Verdict::fail,
          strf("n = 2000, sigma = 0.05, 20 seeds; minimum ARI at k = 2: %.4f (need >= 0.99); "
              "gap_k = 2 in %d/20 (need >= 19)",
              min_ari, gap2)};
}

std::vector<std::optional<double>> phis(const RunResult& r) {
  std::vector<std::optional<double>> out;
  for (const auto& s : r.report->classes.at(0).snapshots) out.push_back(s.phi);
  return out;
}

Outcome emergence_backtest() {
  PlantedConfig cfg;  // 4500 background + 500 planted, emergence 1991-07-01
  const std::size_t k = cfg.n_profiles + 1;
  testing::TempDir dir;
  const auto r = testing::synth_run(synth_generate(cfg), dir.path(), k);
  const auto phi = phis(r);
  const auto& c = r.report->classes.at(0);
  bool ok = phi.size() == 4 && phi[0].value_or(0.0) < 0.8;
  for (std::size_t s = 1; s < phi.size(); ++s) ok = ok && phi[s] && *phi[s] >= 0.85;
  ok = ok && c.detected_at == kDates[1];

  int false_detections = 0;
  double null_max = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    PlantedConfig null = cfg;
    null.seed = seed;
    null.profile_shift = planted_shift(0.0);
    testing::TempDir nd;
    const auto nr = testing::synth_run(synth_generate(null), nd.path(), k);
    if (nr.report->classes.at(0).detected()) ++false_detections;
    for (auto p : phis(nr)) null_max = std::max(null_max, p.value_or(0.0));
  }
  ok = ok && false_detections == 0;

  // Other planted seeds, reported but not gated.
  int robust = 0;
  double lowest = 1.0;
  for (std::uint64_t seed = 2; seed <= 10; ++seed) {
    PlantedConfig other = cfg;
    other.seed = seed;
    testing::TempDir od;
    const auto p = phis(testing::synth_run(synth_generate(other), od.path(), k));
    bool all = p[0].value_or(0.0) < 0.8;
    for (std::size_t s = 1; s < p.size(); ++s) {
      all = all && p[s].value_or(0.0) >= 0.85;
      lowest = std::min(lowest, p[s].value_or(0.0));
    }
    robust += all ? 1 : 0;
  }
  auto show = [](const std::optional<double>& p) { return p ? *p : std::nan(""); };
  return {ok ? Verdict::pass : Verdict::fail,
          strf("seed 1, k = %zu: phi = %.4f / %.4f / %.4f / %.4f (need < 0.8, then >= 0.85); "
              "detected %s; null seeds: %d/20 false detections, max phi %.4f; "
              "seeds 2-10 meeting the same bar: %d/9, lowest post-emergence phi %.4f",
              k, show(phi[0]), show(phi[1]), show(phi[2]), show(phi[3]),
              c.detected_at ? c.detected_at->iso().c_str() : "never", false_detections,
              null_max, robust, lowest)};
}

Outcome nber_reproduction() {
  const char* env = std::getenv("CITEVEC_NBER_DIR");
  if (!env) return {Verdict::skipped, "CITEVEC_NBER_DIR not set; NBER patent and citation files not supplied"};
  const fs::path dir(env);
  const auto pat = dir / "pat63_99.txt", cite = dir / "cite75_99.txt";
  if (!fs::exists(pat) || !fs::exists(cite))
    return {Verdict::skipped, "pat63_99.txt or cite75_99.txt missing under " + dir.string()};

  TableFormat format;
  format.date_format = DateFormat::nber_days;
  const auto bundle = ingest(pat, cite, pat, format);
  const auto graph = bundle.graph();
  LabelColumns lc;
  lc.class_code = {"nclass"};
  const auto labels = load_labels(pat, format, lc);

  const std::vector<Date> dates = kDates;
  const std::size_t want_members[] = {18833, 21052, 23191, 25624};
  const std::size_t want_retained[] = {7671, 9382, 11245, 13217};
  const std::size_t want_connected[] = {70920, 92177, 120380, 161711};
  const double want_phi[] = {0.9106, 0.9005, 0.8546, 0.9177};

  std::vector<SnapshotClusters> series;
  bool counts_ok = true;
  std::string detail;
  double cluster_secs = 0.0;
  for (std::size_t i = 0; i < dates.size(); ++i) {
    const auto snap = snapshot(graph, dates[i], std::vector<int>{11});
    const auto set = vector_set(graph, snap);
    const auto connected = connected_citations(graph, snap);
    counts_ok = counts_ok && snap.size() == want_members[i] &&
                set.retained_size() == want_retained[i] && connected == want_connected[i];
    detail += strf("%s: %zu/%zu/%zu; ", dates[i].iso().c_str(), snap.size(),
                  set.retained_size(), connected);
    const auto t0 = std::chrono::steady_clock::now();
    SnapshotClusters sc{dates[i], ward_cluster(set), {}};
    cluster_secs = std::max(cluster_secs, std::chrono::duration<double>(
                                              std::chrono::steady_clock::now() - t0).count());
    sc.assignment = cut(sc.dendrogram, 7);
    series.push_back(std::move(sc));
  }
  const auto tl = track(series);
  std::vector<int> cls = {442};
  const auto rep = backtest(tl, labels, testing::day(1997, 1, 1), 0.8, cls);
  bool phi_ok = true;
  for (std::size_t i = 0; i < dates.size(); ++i) {
    const auto& p = rep.classes[0].snapshots[i].phi;
    phi_ok = phi_ok && p && std::abs(*p - want_phi[i]) <= 0.03;
    detail += strf("phi %.4f (paper %.4f); ", p ? *p : std::nan(""), want_phi[i]);
  }
  detail += strf("slowest clustering %.0f s", cluster_secs);
  return {counts_ok && phi_ok && cluster_secs < 600 ? Verdict::pass : Verdict::fail, detail};
}

Outcome determinism() {
  // Full pipeline with figures, gap-selected k and labels.
  testing::TempDir dir;
  write_corpus(synth_generate(PlantedConfig{}), dir / "in");
  std::vector<std::string> digests;
  for (std::size_t workers : {1, 1, 8, 8}) {
    RunConfig c;
    c.patents = dir / "in/patents.tsv";
    c.citations = dir / "in/citations.tsv";
    c.classmap = dir / "in/classmap.tsv";
    c.labels = dir / "in/labels.tsv";
    c.dates = kDates;
    c.scope = std::vector<int>{kSynthFocalSubcategory};
    c.workers = workers;
    c.out_dir = dir / ("out" + std::to_string(digests.size()));
    run_pipeline(c);
    digests.push_back(sha256_file(c.out_dir / "manifest.json"));
  }
  set_workers(1);
  bool same = true;
  for (const auto& d : digests) same = same && d == digests[0];
  return {same ? Verdict::pass : Verdict::fail,
          strf("4 runs (workers 1, 1, 8, 8) with figures; manifest sha256 %s %s",
              digests[0].substr(0, 16).c_str(), same ? "identical" : "DIFFERS")};
}

Assignment groups(std::vector<std::vector<PatentId>> gs) {
  std::map<PatentId, int> m;
  for (std::size_t g = 0; g < gs.size(); ++g)
    for (auto id : gs[g]) m[id] = static_cast<int>(g);
  Assignment a;
  for (auto [id, l] : m) {
    a.ids.push_back(id);
    a.labels.push_back(l);
  }
  a.k = gs.size();
  return a;
}

std::vector<PatentId> range(PatentId lo, PatentId hi) {
  std::vector<PatentId> v;
  for (PatentId i = lo; i <= hi; ++i) v.push_back(i);
  return v;
}

Outcome event_suite() {
  // Identity series: the clustered synthetic corpus repeated at three dates.
  PlantedConfig cfg;
  cfg.n_background = 900;
  cfg.n_planted = 100;
  testing::TempDir dir;
  const auto r = testing::synth_run(synth_generate(cfg), dir.path(), 5);
  const auto& last = r.clusters.back();
  std::vector<SnapshotClusters> same;
  for (int y : {2000, 2001, 2002})
    same.push_back({testing::day(y, 1, 1), last.dendrogram, last.assignment});
  const auto identity_events = track(same).event_count();

  struct Fixture {
    const char* name;
    Assignment a1, a2;
    ClusterEvent want;
  };
  const std::vector<Fixture> fixtures = {
      {"split", groups({range(1, 10)}), groups({range(1, 5), range(6, 10)}),
       {ClusterEventKind::split, {0}, {0, 1}, 0.0}},
      {"merge", groups({range(1, 5), range(6, 10)}), groups({range(1, 10)}),
       {ClusterEventKind::merge, {0, 1}, {0}, 0.0}},
      {"birth", groups({range(1, 10)}), groups({range(1, 10), range(20, 29)}),
       {ClusterEventKind::birth, {}, {1}, 0.0}},
      {"death", groups({range(1, 10), range(20, 29)}), groups({range(1, 10)}),
       {ClusterEventKind::death, {1}, {}, 0.0}},
  };
  int correct = 0;
  std::string names;
  for (const auto& f : fixtures) {
    const auto common = common_ids(f.a1, f.a2);
    const auto corr = match_clusters(f.a1, f.a2, common);
    const auto ev =
        classify_cluster_events(corr, {cluster_sizes(f.a1), cluster_sizes(f.a2)});
    const bool ok = ev.size() == 1 && ev[0] == f.want;
    correct += ok ? 1 : 0;
    names += std::string(f.name) + (ok ? " ok " : " WRONG ");
  }
  const bool pass = identity_events == 0 && correct == 4;
  return {pass ? Verdict::pass : Verdict::fail,
          strf("identity series: %zu events; fixtures %d/4 (%s)", identity_events, correct,
              names.c_str())};
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  report("citation-vector properties over 1000 random corpora (< 30 s)", [] {
    const auto t0 = std::chrono::steady_clock::now();
    auto o = vectors_suite();
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (s >= 30.0) o = {Verdict::fail, o.detail + strf("; took %.1f s", s)};
    return o;
  });
  report("Ward NN-chain equals the naive reference (< 2 min)", [] {
    const auto t0 = std::chrono::steady_clock::now();
    auto o = ward_oracle();
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (s >= 120.0) o = {Verdict::fail, o.detail + strf("; took %.1f s", s)};
    return o;
  });
  report("ESS identity at every cut", ess_identity);
  report("planted two-group recovery", planted_recovery);
  report("emergence backtest on the planted series (< 5 min)", [] {
    const auto t0 = std::chrono::steady_clock::now();
    auto o = emergence_backtest();
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (s >= 300.0) o = {Verdict::fail, o.detail + strf("; took %.1f s", s)};
    return o;
  });
  report("NBER reproduction of the snapshot counts and class-442 phi", nber_reproduction);
  report("pipeline determinism across worker counts", determinism);
  report("event classification", event_suite);
  std::printf("%s\n", failures == 0 ? "acceptance: all evaluated criteria passed"
                                    : strf("acceptance: %d criteria failed", failures).c_str());
  return failures == 0 ? 0 : 1;
}
