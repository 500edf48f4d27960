#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "citevec/corpus.hpp"
#include "citevec/pipeline.hpp"
#include "citevec/predictor.hpp"
#include "citevec/synth.hpp"

namespace testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("citevec-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline citevec::Date day(int y, unsigned m, unsigned d) {
  return *citevec::Date::from_ymd(y, m, d);
}

// Patent with an explicit class; classes are mapped 1:1 by `identity_map`.
inline citevec::PatentRecord patent(citevec::PatentId id, citevec::Date date, int cls) {
  citevec::PatentRecord p;
  p.id = id;
  p.grant_date = date;
  p.uspto_class = cls;
  return p;
}

// Maps class c to subcategory c for every subcategory code, so tests can use
// subcategory codes as classes.
inline citevec::ClassMap identity_map() {
  citevec::ClassMap m;
  for (int code : citevec::kSubcategoryCodes) m.add(code, code);
  return m;
}

inline citevec::EdgeList edges(std::vector<citevec::Citation> raw) {
  return citevec::clean_edges(std::move(raw));
}

inline citevec::PointMatrix random_points(std::size_t n, std::size_t dim, std::uint64_t seed,
                                          bool shuffle_ids = false) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<citevec::PatentId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<citevec::PatentId>(100 + 7 * i);
  if (shuffle_ids) std::shuffle(ids.begin(), ids.end(), rng);
  citevec::PointMatrix m;
  m.dim = dim;
  std::vector<double> row(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& x : row) x = u(rng);
    m.push_back(ids[i], row);
  }
  return m;
}

struct RandomCorpus {
  std::vector<citevec::PatentRecord> patents;
  citevec::EdgeList edges;
};

// Patents over a few subcategories (class = subcategory code, plus some
// unmapped class 999), citations pointing mostly backwards in time and a
// few dangling or forward ones.
inline RandomCorpus random_corpus(std::uint64_t seed, int n = 40, int m = 120,
                                  int n_codes = 6) {
  std::mt19937_64 rng(seed);
  RandomCorpus c;
  for (int i = 0; i < n; ++i) {
    int cls = citevec::kSubcategoryCodes[(rng() % static_cast<unsigned>(n_codes)) * 5 % 36];
    if (rng() % 20 == 0) cls = 999;
    c.patents.push_back(patent(1000 + i, citevec::Date(7000 + static_cast<int>(rng() % 4000)), cls));
  }
  std::vector<citevec::Citation> raw;
  for (int e = 0; e < m; ++e) {
    auto a = static_cast<citevec::PatentId>(1000 + rng() % static_cast<unsigned>(n + 3));
    auto b = static_cast<citevec::PatentId>(1000 + rng() % static_cast<unsigned>(n));
    raw.push_back({a, b});
  }
  c.edges = citevec::clean_edges(std::move(raw));
  return c;
}

// The four snapshot dates used with the default synthetic corpus.
inline std::vector<citevec::Date> synth_dates() {
  return {day(1991, 1, 1), day(1994, 1, 1), day(1997, 1, 1), day(1999, 12, 31)};
}

// Writes the corpus under `dir` and runs the pipeline over subcategory 11
// with a fixed cut, backtesting the emerging class.
inline citevec::RunResult synth_run(const citevec::SynthCorpus& corpus,
                                    const std::filesystem::path& dir, std::size_t k,
                                    std::size_t workers = 1) {
  citevec::write_corpus(corpus, dir / "in");
  citevec::RunConfig c;
  c.patents = dir / "in" / "patents.tsv";
  c.citations = dir / "in" / "citations.tsv";
  c.classmap = dir / "in" / "classmap.tsv";
  c.labels = dir / "in" / "labels.tsv";
  c.dates = synth_dates();
  c.scope = std::vector<int>{citevec::kSynthFocalSubcategory};
  c.k = k;
  c.classes = {citevec::kSynthEmergingClass};
  c.figures = false;
  c.out_dir = dir / "out";
  c.workers = workers;
  return citevec::run_pipeline(c);
}

}  // namespace testing
