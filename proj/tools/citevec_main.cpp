// citevec: citation-vector clustering of patent snapshots.
//
// Exit codes: 0 success, 2 input error, 3 configuration error, 4 runtime
// failure.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "citevec/bundle.hpp"
#include "citevec/clustering.hpp"
#include "citevec/corpus.hpp"
#include "citevec/digest.hpp"
#include "citevec/errors.hpp"
#include "citevec/pipeline.hpp"
#include "citevec/predictor.hpp"
#include "citevec/synth.hpp"
#include "citevec/viz.hpp"

namespace fs = std::filesystem;
using namespace citevec;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitConfig = 3;
constexpr int kExitRuntime = 4;

struct Globals {
  std::string out_dir = ".";
  std::size_t workers = 1;
  std::uint64_t seed = 1;
  std::string log_level = "warn";
};

struct InputFlags {
  std::string bundle, patents, citations, classmap;
  std::string delimiter, date_format = "auto";

  void add(CLI::App* app) {
    app->add_option("--bundle", bundle, "Bundle written by ingest");
    app->add_option("--patents", patents, "Patent table");
    app->add_option("--citations", citations, "Citation table");
    app->add_option("--classmap", classmap, "USPTO class to subcategory table");
    app->add_option("--delimiter", delimiter, "Field delimiter (default: detected)");
    app->add_option("--date-format", date_format, "auto, iso, year or nber-days");
  }
};

struct SnapshotFlags {
  std::string as_of;
  std::vector<int> scope;

  void add(CLI::App* app) {
    app->add_option("--as-of", as_of, "Snapshot date")->required();
    app->add_option("--scope", scope, "Subcategory codes of the members");
  }
  std::optional<std::vector<int>> scope_opt() const {
    if (scope.empty()) return std::nullopt;
    return scope;
  }
};

void require_file(const std::string& path, const std::string& flag) {
  if (path.empty()) throw ConfigError(flag + " is required");
  if (!fs::is_regular_file(path)) throw InputError(flag + ": file not found: " + path);
}

TableFormat table_format(const InputFlags& in) {
  TableFormat f;
  if (!in.delimiter.empty()) {
    std::string d = in.delimiter == "\\t" || in.delimiter == "tab" ? "\t" : in.delimiter;
    if (d.size() != 1) throw ConfigError("--delimiter must be a single character");
    f.delimiter = d[0];
  }
  auto df = parse_date_format(in.date_format);
  if (!df) throw ConfigError("--date-format: unknown format " + in.date_format);
  f.date_format = *df;
  return f;
}

void fill_inputs(const InputFlags& in, RunConfig& c) {
  c.format = table_format(in);
  if (!in.bundle.empty()) {
    require_file(in.bundle, "--bundle");
    c.bundle = in.bundle;
    return;
  }
  require_file(in.patents, "--patents");
  require_file(in.citations, "--citations");
  require_file(in.classmap, "--classmap");
  c.patents = in.patents;
  c.citations = in.citations;
  c.classmap = in.classmap;
}

CitationGraph load_graph(const InputFlags& in) {
  RunConfig c;
  fill_inputs(in, c);
  return load_inputs(c).graph();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path.string());
  f << text;
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream out;
  fn(out);
  return out.str();
}

std::vector<Date> parse_dates(const std::vector<std::string>& texts) {
  std::vector<Date> out;
  for (const auto& t : texts) out.push_back(require_date(t, "--dates"));
  return out;
}

struct ClusterFlags {
  std::size_t k = 0;  // 0: gap selection
  std::size_t k_max = 10;

  void add(CLI::App* app) {
    app->add_option("--k", k, "Cluster count (default: largest height gap)");
    app->add_option("--k-max", k_max, "Upper bound for gap selection");
  }
};

struct ThresholdFlags {
  Thresholds t;
  void add(CLI::App* app) {
    app->add_option("--theta", t.theta, "Minimum Jaccard overlap for a correspondence");
    app->add_option("--delta", t.delta, "Size ratio band for growth and contraction");
    app->add_option("--epsilon", t.epsilon, "Relative branch height change");
  }
};

int run(int argc, char** argv) {
  CLI::App app{"citevec: patent citation-vector clustering and emergence backtesting"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--out-dir", g.out_dir, "Output directory");
  app.add_option("--workers", g.workers, "Thread budget")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error, off");

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "Load and validate the tables into a bundle");
  InputFlags ingest_in;
  std::string ingest_out;
  ingest_in.add(ingest_cmd);
  ingest_cmd->add_option("--out", ingest_out, "Bundle path (default: <out-dir>/corpus.bundle)");

  // snapshot
  auto* snap_cmd = app.add_subcommand("snapshot", "Members of a dated snapshot");
  InputFlags snap_in;
  SnapshotFlags snap_f;
  snap_in.add(snap_cmd);
  snap_f.add(snap_cmd);

  // vectors
  auto* vec_cmd = app.add_subcommand("vectors", "Citation vectors of a snapshot");
  InputFlags vec_in;
  SnapshotFlags vec_f;
  vec_in.add(vec_cmd);
  vec_f.add(vec_cmd);

  // cluster
  auto* cl_cmd = app.add_subcommand("cluster", "Ward dendrogram and cut of a snapshot");
  InputFlags cl_in;
  SnapshotFlags cl_f;
  ClusterFlags cl_k;
  bool cl_naive = false;
  cl_in.add(cl_cmd);
  cl_f.add(cl_cmd);
  cl_k.add(cl_cmd);
  cl_cmd->add_flag("--naive", cl_naive, "Use the O(n^3) reference clustering");

  // track / backtest / pipeline share the run configuration.
  struct RunFlags {
    InputFlags in;
    std::vector<std::string> dates;
    std::vector<int> scope;
    ClusterFlags k;
    ThresholdFlags t;
    std::string labels, label_date;
    double phi_min = 0.8;
    std::vector<int> classes;
    bool no_figures = false;
    std::size_t k_neighbors = 10, iterations = 200;
  };
  const auto add_run = [](CLI::App* cmd, RunFlags& f, bool with_labels, bool with_figures) {
    f.in.add(cmd);
    cmd->add_option("--dates", f.dates, "Snapshot dates, increasing")->required()->delimiter(',');
    cmd->add_option("--scope", f.scope, "Subcategory codes of the members")->delimiter(',');
    f.k.add(cmd);
    f.t.add(cmd);
    if (with_labels) {
      auto* l = cmd->add_option("--labels", f.labels, "Labels table (patent_id, class_code)");
      if (!with_figures) l->required();
      cmd->add_option("--label-date", f.label_date, "Date of the labels (default: last date)");
      cmd->add_option("--phi-min", f.phi_min, "Detection threshold");
      cmd->add_option("--classes", f.classes, "Label classes to backtest")->delimiter(',');
    }
    if (with_figures) {
      cmd->add_flag("--no-figures", f.no_figures, "Skip the SVG figures");
      cmd->add_option("--k-neighbors", f.k_neighbors, "Neighbours in the layout graph");
      cmd->add_option("--iterations", f.iterations, "Layout iterations");
    }
  };
  auto* track_cmd = app.add_subcommand("track", "Cluster timeline and events over dates");
  RunFlags track_f;
  add_run(track_cmd, track_f, false, false);
  auto* bt_cmd = app.add_subcommand("backtest", "Emergence backtest against labels");
  RunFlags bt_f;
  add_run(bt_cmd, bt_f, true, false);
  auto* pipe_cmd = app.add_subcommand("pipeline", "All stages, reports, figures and manifest");
  RunFlags pipe_f;
  add_run(pipe_cmd, pipe_f, true, true);

  // layout
  auto* lay_cmd = app.add_subcommand("layout", "Force-directed layout of a snapshot as SVG");
  InputFlags lay_in;
  SnapshotFlags lay_f;
  ClusterFlags lay_k;
  std::size_t lay_neighbors = 10, lay_iterations = 200;
  std::string lay_color = "cluster", lay_labels, lay_highlight, lay_out;
  lay_in.add(lay_cmd);
  lay_f.add(lay_cmd);
  lay_k.add(lay_cmd);
  lay_cmd->add_option("--k-neighbors", lay_neighbors, "Neighbours in the similarity graph");
  lay_cmd->add_option("--iterations", lay_iterations, "Layout iterations");
  lay_cmd->add_option("--color-by", lay_color, "class, cluster or label")
      ->check(CLI::IsMember({"class", "cluster", "label"}));
  lay_cmd->add_option("--labels", lay_labels, "Labels table for --color-by label");
  lay_cmd->add_option("--highlight", lay_highlight, "Label class drawn red, others blue");
  lay_cmd->add_option("--out", lay_out, "SVG path (default: <out-dir>/layout.svg)");

  // synth
  auto* syn_cmd = app.add_subcommand("synth", "Synthetic corpus with a planted emerging class");
  PlantedConfig pc;
  double shift = 1.0;
  std::string syn_start = "1980-01-01", syn_end = "1999-12-31", syn_emerge = "1991-07-01";
  syn_cmd->add_option("--n-background", pc.n_background, "Background focal patents");
  syn_cmd->add_option("--n-planted", pc.n_planted, "Planted focal patents");
  syn_cmd->add_option("--start", syn_start, "First grant date");
  syn_cmd->add_option("--end", syn_end, "Last grant date");
  syn_cmd->add_option("--emergence", syn_emerge, "Emergence date");
  syn_cmd->add_option("--lead-days", pc.planted_lead_days, "Planted grants start this early");
  syn_cmd->add_option("--shift", shift, "Profile shift, 0 (null) to 1 (full)");
  syn_cmd->add_option("--noise", pc.noise, "Share of uniformly drawn citing subcategories");
  syn_cmd->add_option("--profiles", pc.n_profiles, "Background profiles (1-5)");
  syn_cmd->add_option("--min-citations", pc.min_citations, "Fewest citations per patent");
  syn_cmd->add_option("--max-citations", pc.max_citations, "Most citations per patent");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  auto logger = spdlog::stderr_color_mt("citevec");
  spdlog::set_default_logger(logger);
  const auto level = spdlog::level::from_str(g.log_level);
  if (level == spdlog::level::off && g.log_level != "off")
    throw ConfigError("--log-level: unknown level " + g.log_level);
  spdlog::set_level(level);
  set_workers(g.workers);
  const fs::path out_dir = g.out_dir;

  if (*ingest_cmd) {
    require_file(ingest_in.patents, "--patents");
    require_file(ingest_in.citations, "--citations");
    require_file(ingest_in.classmap, "--classmap");
    const Bundle b = ingest(ingest_in.patents, ingest_in.citations, ingest_in.classmap,
                            table_format(ingest_in));
    const CitationGraph graph = b.graph();
    const fs::path path = ingest_out.empty() ? out_dir / "corpus.bundle" : fs::path(ingest_out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_bundle(b, path);
    std::cout << "patents\t" << b.patents.size() << "\n"
              << "citations\t" << graph.edges().size() << "\n"
              << "classes\t" << b.classmap.size() << "\n"
              << "skipped_patent_rows\t" << b.counters.patent_rows_skipped << "\n"
              << "duplicate_citations\t" << b.counters.duplicate_citations << "\n"
              << "self_citations\t" << b.counters.self_citations << "\n"
              << "dangling_citations\t" << graph.counters().dangling_edges << "\n"
              << "unmapped_patents\t" << graph.counters().unmapped_patents << "\n"
              << "bundle\t" << path.string() << "\n"
              << "sha256\t" << sha256_file(path) << "\n";
    return 0;
  }

  if (*snap_cmd) {
    const auto graph = load_graph(snap_in);
    const auto snap = snapshot(graph, require_date(snap_f.as_of, "--as-of"), snap_f.scope_opt());
    std::ostringstream members;
    members << "patent_id\n";
    for (auto m : snap.members) members << graph.patent(m).id << '\n';
    write_text(out_dir / "members.tsv", members.str());
    std::cout << "members\t" << snap.size() << "\n"
              << "internal_citations\t" << snap.edge_view.size() << "\n"
              << "connected_citations\t" << connected_citations(graph, snap) << "\n";
    return 0;
  }

  const auto vectors_of = [&](const InputFlags& in, const SnapshotFlags& f) {
    const auto graph = load_graph(in);
    const auto snap = snapshot(graph, require_date(f.as_of, "--as-of"), f.scope_opt());
    return vector_set(graph, snap);
  };

  if (*vec_cmd) {
    const auto set = vectors_of(vec_in, vec_f);
    std::ostringstream out;
    out << "patent_id\tsubcategory\tzero";
    for (int code : kSubcategoryCodes) out << "\tc" << code;
    out << '\n';
    out.precision(17);
    for (const auto& r : set.rows) {
      out << r.id << '\t' << r.subcategory << '\t' << (r.is_zero ? 1 : 0);
      for (double x : r.coords) out << '\t' << x;
      out << '\n';
    }
    write_text(out_dir / "vectors.tsv", out.str());
    std::cout << "members\t" << set.rows.size() << "\n"
              << "retained\t" << set.retained_size() << "\n"
              << "unmapped\t" << set.unmapped_members << "\n";
    return 0;
  }

  const auto choose_k = [](const Dendrogram& d, const ClusterFlags& f) {
    const std::size_t n = d.n_leaves();
    if (f.k > 0) return std::min(f.k, n);
    if (n < 3) return n;
    return gap_k(d, std::min(f.k_max, n));
  };

  if (*cl_cmd) {
    const auto set = vectors_of(cl_in, cl_f);
    if (set.retained_size() < 2)
      throw ContractError("fewer than 2 patents with a non-zero citation vector");
    const auto d = cl_naive ? ward_cluster_naive(set) : ward_cluster(set);
    const auto a = cut(d, choose_k(d, cl_k));
    write_text(out_dir / "dendrogram.tsv", render([&](std::ostream& o) { write_merge_table(d, o); }));
    write_text(out_dir / "leaves.txt", render([&](std::ostream& o) { write_leaf_manifest(d, o); }));
    write_text(out_dir / "tree.nwk", to_newick(d) + "\n");
    std::ostringstream as;
    as << "patent_id\tcluster\n";
    for (std::size_t i = 0; i < a.ids.size(); ++i) as << a.ids[i] << '\t' << a.labels[i] << '\n';
    write_text(out_dir / "assignment.tsv", as.str());
    std::cout << "leaves\t" << d.n_leaves() << "\nk\t" << a.k << "\n";
    return 0;
  }

  const auto run_config = [&](const RunFlags& f) {
    RunConfig c;
    fill_inputs(f.in, c);
    c.dates = parse_dates(f.dates);
    if (!f.scope.empty()) c.scope = f.scope;
    if (f.k.k > 0) c.k = f.k.k;
    c.k_max = f.k.k_max;
    c.thresholds = f.t.t;
    if (!f.labels.empty()) {
      require_file(f.labels, "--labels");
      c.labels = f.labels;
    }
    if (!f.label_date.empty()) c.label_date = require_date(f.label_date, "--label-date");
    c.phi_min = f.phi_min;
    c.classes = f.classes;
    c.figures = !f.no_figures;
    c.layout_neighbors = f.k_neighbors;
    c.layout_iterations = f.iterations;
    c.seed = g.seed;
    c.out_dir = out_dir;
    c.workers = g.workers;
    return c;
  };

  if (*track_cmd || *bt_cmd || *pipe_cmd) {
    const RunFlags& f = *track_cmd ? track_f : (*bt_cmd ? bt_f : pipe_f);
    RunConfig c = run_config(f);
    if (!*pipe_cmd) c.figures = false;
    if (*track_cmd && c.dates.size() < 2) throw ConfigError("--dates: track needs two or more dates");
    const auto result = run_pipeline(c);
    for (const auto& s : result.snapshots)
      std::cout << s.date.iso() << "\tmembers " << s.members << "\tretained " << s.retained
                << "\tk " << s.k << "\n";
    if (result.timeline) std::cout << "events\t" << result.timeline->event_count() << "\n";
    if (result.report) write_report_text(*result.report, std::cout);
    std::cout << "manifest\t" << (out_dir / "manifest.json").string() << "\n";
    return 0;
  }

  if (*lay_cmd) {
    const auto graph = load_graph(lay_in);
    const auto snap = snapshot(graph, require_date(lay_f.as_of, "--as-of"), lay_f.scope_opt());
    const auto set = vector_set(graph, snap);
    const auto n = set.retained_size();
    if (n < 2) throw ContractError("fewer than 2 patents with a non-zero citation vector");
    const auto sim = knn_graph(set, std::min(lay_neighbors, n - 1));
    LayoutOptions opt;
    opt.iterations = lay_iterations;
    opt.seed = g.seed;
    const auto layout = fruchterman_reingold(sim, opt);

    std::vector<std::size_t> category(layout.size());
    ColorKey key;
    if (lay_color == "cluster") {
      const auto d = ward_cluster(set);
      const auto a = cut(d, choose_k(d, lay_k));
      key.colors = palette(a.k);
      for (std::size_t l = 0; l < a.k; ++l) key.names.push_back("cluster " + std::to_string(l));
      for (std::size_t i = 0; i < layout.size(); ++i)
        category[i] = static_cast<std::size_t>(a.labels[i]);
    } else {
      std::vector<int> cls(layout.size());
      if (lay_color == "class") {
        for (std::size_t i = 0; i < layout.size(); ++i)
          cls[i] = graph.patent(*graph.index_of(layout.ids[i])).uspto_class;
      } else {
        require_file(lay_labels, "--labels");
        const auto labels = load_labels(lay_labels, table_format(lay_in));
        for (std::size_t i = 0; i < layout.size(); ++i) {
          auto it = labels.find(layout.ids[i]);
          cls[i] = it == labels.end() ? -1 : it->second;
        }
      }
      if (!lay_highlight.empty()) {
        key = emphasis_key("class " + lay_highlight, "other");
        int h = 0;
        const auto* end = lay_highlight.data() + lay_highlight.size();
        if (std::from_chars(lay_highlight.data(), end, h).ptr != end)
          throw ConfigError("--highlight: not a class code: " + lay_highlight);
        for (std::size_t i = 0; i < cls.size(); ++i) category[i] = cls[i] == h ? 0 : 1;
      } else {
        std::vector<int> distinct(cls);
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        key.colors = palette(distinct.size());
        for (int v : distinct) key.names.push_back(v < 0 ? "unlabelled" : "class " + std::to_string(v));
        for (std::size_t i = 0; i < cls.size(); ++i)
          category[i] = static_cast<std::size_t>(
              std::lower_bound(distinct.begin(), distinct.end(), cls[i]) - distinct.begin());
      }
    }
    const fs::path path = lay_out.empty() ? out_dir / "layout.svg" : fs::path(lay_out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    emit_scatter(layout, category, key, path);
    std::cout << "points\t" << layout.size() << "\nedges\t" << sim.edge_count() << "\n";
    return 0;
  }

  if (*syn_cmd) {
    pc.seed = g.seed;
    pc.start_date = require_date(syn_start, "--start");
    pc.end_date = require_date(syn_end, "--end");
    pc.emergence_date = require_date(syn_emerge, "--emergence");
    pc.profile_shift = planted_shift(shift);
    const auto corpus = synth_generate(pc);
    write_corpus(corpus, out_dir);
    std::cout << "patents\t" << corpus.patents.size() << "\n"
              << "citations\t" << corpus.citations.edges.size() << "\n"
              << "planted\t" << corpus.planted.size() << "\n";
    return 0;
  }
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
