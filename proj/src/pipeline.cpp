#include "citevec/pipeline.hpp"

#include <omp.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "citevec/clustering.hpp"
#include "citevec/digest.hpp"
#include "citevec/errors.hpp"
#include "citevec/predictor.hpp"
#include "citevec/viz.hpp"

namespace citevec {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

// Runs `fn`, prefixing any error message with the stage name while keeping
// the exception category.
template <typename Fn>
auto stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const InputError& e) {
    throw InputError(name + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(name + ": " + e.what());
  } catch (const ContractError& e) {
    throw ContractError(name + ": " + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(name + ": " + e.what());
  }
}

class Staging {
 public:
  explicit Staging(fs::path out) : out_(std::move(out)), dir_(out_ / ".citevec-staging") {
    fs::create_directories(out_);
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Staging() {
    std::error_code ec;
    if (!committed_) fs::remove_all(dir_, ec);
  }

  const fs::path& dir() const { return dir_; }

  void write(const fs::path& rel, const std::string& text) {
    const auto p = dir_ / rel;
    fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw InputError("cannot write " + p.string());
    f << text;
    if (!f) throw InputError("write failed: " + p.string());
    files_.push_back(rel);
  }

  // Sorted relative paths with their digests.
  std::map<std::string, std::string> digests() const {
    std::map<std::string, std::string> out;
    for (const auto& rel : files_) out[rel.generic_string()] = sha256_file(dir_ / rel);
    return out;
  }

  void commit() {
    std::vector<fs::path> entries;
    for (const auto& entry : fs::directory_iterator(dir_)) entries.push_back(entry.path());
    std::sort(entries.begin(), entries.end());
    for (const auto& p : entries) {
      const auto target = out_ / p.filename();
      fs::remove_all(target);
      fs::rename(p, target);
    }
    fs::remove_all(dir_);
    committed_ = true;
  }

 private:
  fs::path out_;
  fs::path dir_;
  std::vector<fs::path> files_;
  bool committed_ = false;
};

std::string exact(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string vectors_tsv(const VectorSet& set) {
  std::ostringstream out;
  out << "patent_id\tsubcategory\tzero";
  for (int code : kSubcategoryCodes) out << "\tc" << code;
  out << '\n';
  for (const auto& row : set.rows) {
    out << row.id << '\t' << row.subcategory << '\t' << (row.is_zero ? 1 : 0);
    for (double c : row.coords) out << '\t' << exact(c);
    out << '\n';
  }
  return out.str();
}

std::string assignment_tsv(const Assignment& a) {
  std::ostringstream out;
  out << "patent_id\tcluster\n";
  for (std::size_t i = 0; i < a.ids.size(); ++i) out << a.ids[i] << '\t' << a.labels[i] << '\n';
  return out.str();
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream out;
  fn(out);
  return out.str();
}

ordered_json config_echo(const RunConfig& c, const std::string& input_digest,
                         const std::optional<std::string>& labels_digest) {
  ordered_json j;
  j["input_sha256"] = input_digest;
  j["labels_sha256"] = labels_digest ? ordered_json(*labels_digest) : ordered_json(nullptr);
  auto dates = ordered_json::array();
  for (auto d : c.dates) dates.push_back(d.iso());
  j["dates"] = dates;
  j["scope"] = c.scope ? ordered_json(*c.scope) : ordered_json(nullptr);
  j["k"] = c.k ? ordered_json(*c.k) : ordered_json("gap");
  j["k_max"] = c.k_max;
  j["theta"] = c.thresholds.theta;
  j["delta"] = c.thresholds.delta;
  j["epsilon"] = c.thresholds.epsilon;
  j["phi_min"] = c.phi_min;
  j["label_date"] = c.label_date ? c.label_date->iso() : c.dates.back().iso();
  j["classes"] = c.classes;
  j["figures"] = c.figures;
  j["layout_neighbors"] = c.layout_neighbors;
  j["layout_iterations"] = c.layout_iterations;
  j["seed"] = c.seed;
  return j;
}

}  // namespace

void check(const RunConfig& c) {
  const bool tables = c.patents || c.citations || c.classmap;
  if (c.bundle && tables) throw ConfigError("give either a bundle or the three tables, not both");
  if (!c.bundle && !(c.patents && c.citations && c.classmap))
    throw ConfigError("inputs missing: need --bundle or --patents, --citations and --classmap");
  if (c.dates.empty()) throw ConfigError("at least one date is required");
  for (std::size_t i = 1; i < c.dates.size(); ++i)
    if (!(c.dates[i - 1] < c.dates[i])) throw ConfigError("dates must be strictly increasing");
  if (c.k && *c.k < 1) throw ConfigError("k must be at least 1");
  if (c.k_max < 2) throw ConfigError("k_max must be at least 2");
  check(c.thresholds);
  if (!(c.phi_min > 0.0 && c.phi_min <= 1.0)) throw ConfigError("phi_min must be in (0, 1]");
  if (c.layout_neighbors < 1) throw ConfigError("layout neighbours must be at least 1");
  if (c.workers < 1) throw ConfigError("workers must be at least 1");
  if (c.out_dir.empty()) throw ConfigError("an output directory is required");
}

void set_workers(std::size_t workers) {
  omp_set_num_threads(static_cast<int>(std::max<std::size_t>(1, workers)));
}

Bundle load_inputs(const RunConfig& c) {
  if (c.bundle) return read_bundle(*c.bundle);
  return ingest(*c.patents, *c.citations, *c.classmap, c.format);
}

RunResult run_pipeline(const RunConfig& c) {
  check(c);
  set_workers(c.workers);

  const Bundle bundle = stage("ingest", [&] { return load_inputs(c); });
  const std::string input_digest = sha256_hex(encode(bundle));
  const CitationGraph graph = stage("graph", [&] { return bundle.graph(); });
  std::optional<Labels> labels;
  std::optional<std::string> labels_digest;
  if (c.labels) {
    labels = stage("labels", [&] { return load_labels(*c.labels, c.format); });
    labels_digest = sha256_file(*c.labels);
  }

  Staging staging(c.out_dir);
  RunResult result;

  for (auto date : c.dates) {
    const std::string tag = date.iso();
    const fs::path dir = fs::path("snapshots") / tag;
    spdlog::info("snapshot {}", tag);
    const Snapshot snap = stage("snapshot " + tag, [&] { return snapshot(graph, date, c.scope); });
    const VectorSet set = stage("vectors " + tag, [&] { return vector_set(graph, snap); });
    staging.write(dir / "vectors.tsv", vectors_tsv(set));

    SnapshotClusters sc;
    sc.date = date;
    sc.dendrogram = stage("cluster " + tag, [&] {
      if (set.retained_size() < 2)
        throw ContractError("fewer than 2 patents with a non-zero citation vector");
      return ward_cluster(set);
    });
    const std::size_t n = sc.dendrogram.n_leaves();
    const std::size_t k = stage("cut " + tag, [&] {
      if (c.k) return std::min(*c.k, n);
      if (n < 3) return n;
      return gap_k(sc.dendrogram, std::min(c.k_max, n));
    });
    sc.assignment = cut(sc.dendrogram, k);
    staging.write(dir / "dendrogram.tsv", render([&](std::ostream& o) {
                    write_merge_table(sc.dendrogram, o);
                  }));
    staging.write(dir / "leaves.txt", render([&](std::ostream& o) {
                    write_leaf_manifest(sc.dendrogram, o);
                  }));
    staging.write(dir / "tree.nwk", to_newick(sc.dendrogram) + "\n");
    staging.write(dir / "assignment.tsv", assignment_tsv(sc.assignment));

    if (c.figures) {
      stage("figures " + tag, [&] {
        staging.write(dir / "dendrogram.svg", render([&](std::ostream& o) {
                        emit_dendrogram(sc.dendrogram, sc.assignment, o);
                      }));
        const auto graph_k = std::min(c.layout_neighbors, n - 1);
        const auto g = knn_graph(set, graph_k);
        LayoutOptions opt;
        opt.iterations = c.layout_iterations;
        opt.seed = c.seed;
        const auto layout = fruchterman_reingold(g, opt);
        std::vector<std::size_t> category(layout.size());
        for (std::size_t i = 0; i < layout.size(); ++i)
          category[i] = static_cast<std::size_t>(sc.assignment.labels[i]);
        ColorKey key;
        key.colors = palette(sc.assignment.k);
        for (std::size_t l = 0; l < sc.assignment.k; ++l)
          key.names.push_back("cluster " + std::to_string(l));
        staging.write(dir / "layout.svg", render([&](std::ostream& o) {
                        emit_scatter(layout, category, key, o);
                      }));
      });
    }

    SnapshotSummary s;
    s.date = date;
    s.members = snap.size();
    s.retained = set.retained_size();
    s.connected_citations = connected_citations(graph, snap);
    s.k = k;
    result.snapshots.push_back(s);
    result.clusters.push_back(std::move(sc));
  }

  if (c.dates.size() >= 2) {
    result.timeline = stage("track", [&] { return track(result.clusters, c.thresholds); });
    staging.write("events.txt", render([&](std::ostream& o) {
                    write_event_report(*result.timeline, o);
                  }));
    staging.write("events.tsv", render([&](std::ostream& o) {
                    write_event_table(*result.timeline, o);
                  }));
    staging.write("tracks.tsv", render([&](std::ostream& o) {
                    write_track_table(*result.timeline, o);
                  }));
  }

  if (labels) {
    result.report = stage("backtest", [&] {
      ClusterTimeline tl;
      if (result.timeline) {
        tl = *result.timeline;
      } else {
        for (const auto& sc : result.clusters) {
          tl.dates.push_back(sc.date);
          tl.assignments.push_back(sc.assignment);
        }
      }
      return backtest(tl, *labels, c.label_date.value_or(c.dates.back()), c.phi_min,
                      c.classes);
    });
    staging.write("backtest.txt", render([&](std::ostream& o) {
                    write_report_text(*result.report, o);
                  }));
    staging.write("backtest.tsv", render([&](std::ostream& o) {
                    write_report_table(*result.report, o);
                  }));
  }

  ordered_json manifest;
  manifest["tool"] = "citevec";
  manifest["config"] = config_echo(c, input_digest, labels_digest);
  auto snaps = ordered_json::array();
  for (const auto& s : result.snapshots) {
    ordered_json j;
    j["date"] = s.date.iso();
    j["members"] = s.members;
    j["retained"] = s.retained;
    j["connected_citations"] = s.connected_citations;
    j["k"] = s.k;
    snaps.push_back(j);
  }
  manifest["snapshots"] = snaps;
  if (result.timeline) manifest["events"] = result.timeline->event_count();
  if (result.report) {
    auto classes = ordered_json::array();
    for (const auto& ce : result.report->classes) {
      ordered_json j;
      j["class"] = ce.cls;
      j["detected"] = ce.detected_at ? ordered_json(ce.detected_at->iso()) : ordered_json(nullptr);
      j["lead_days"] = ce.lead_days ? ordered_json(*ce.lead_days) : ordered_json(nullptr);
      classes.push_back(j);
    }
    manifest["backtest"] = classes;
  }
  ordered_json artifacts = ordered_json::object();
  for (const auto& [path, digest] : staging.digests()) artifacts[path] = digest;
  manifest["artifacts"] = artifacts;
  result.manifest = manifest.dump(2) + "\n";
  staging.write("manifest.json", result.manifest);
  staging.commit();
  spdlog::info("wrote {} artifacts to {}", artifacts.size() + 1, c.out_dir.string());
  return result;
}

}  // namespace citevec
