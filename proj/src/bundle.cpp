#include "citevec/bundle.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <sstream>

#include "citevec/errors.hpp"

namespace citevec {
namespace {

constexpr char kMagic[8] = {'C', 'I', 'T', 'E', 'V', 'E', 'C', '1'};

void put(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  std::uint64_t get() {
    if (bytes_.size() - pos_ < 8) throw InputError("bundle: truncated data");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::int64_t get_signed() { return static_cast<std::int64_t>(get()); }
  std::size_t count() {
    const auto n = get();
    if (n > (bytes_.size() - pos_) / 8) throw InputError("bundle: truncated data");
    return static_cast<std::size_t>(n);
  }
  bool done() const { return pos_ == bytes_.size(); }
  void skip_magic() {
    if (bytes_.size() < sizeof kMagic || !std::equal(kMagic, kMagic + 8, bytes_.begin()))
      throw InputError("bundle: not a citevec bundle");
    pos_ = sizeof kMagic;
  }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

CitationGraph Bundle::graph() const { return build_graph(patents, citations, classmap); }

Bundle ingest(const std::filesystem::path& patents, const std::filesystem::path& citations,
              const std::filesystem::path& classmap, const TableFormat& format) {
  Bundle b;
  auto table = load_patents(patents, format);
  b.patents = std::move(table.records);
  std::sort(b.patents.begin(), b.patents.end(),
            [](const PatentRecord& x, const PatentRecord& y) { return x.id < y.id; });
  for (auto& p : b.patents) p.subcategory.reset();
  b.citations = load_citations(citations, format);
  b.classmap = load_classmap(classmap, format);
  b.counters.patent_rows_skipped = table.skipped;
  b.counters.duplicate_citations = b.citations.duplicates_dropped;
  b.counters.self_citations = b.citations.self_loops_dropped;
  return b;
}

std::string encode(const Bundle& b) {
  std::string out(kMagic, sizeof kMagic);
  put(out, b.patents.size());
  for (const auto& p : b.patents) {
    put(out, static_cast<std::uint64_t>(p.id));
    put(out, static_cast<std::uint64_t>(static_cast<std::int64_t>(p.grant_date.days())));
    put(out, static_cast<std::uint64_t>(static_cast<std::int64_t>(p.uspto_class)));
  }
  put(out, b.citations.edges.size());
  for (const auto& e : b.citations.edges) {
    put(out, static_cast<std::uint64_t>(e.citing));
    put(out, static_cast<std::uint64_t>(e.cited));
  }
  put(out, b.classmap.size());
  for (auto [cls, sub] : b.classmap.entries()) {
    put(out, static_cast<std::uint64_t>(static_cast<std::int64_t>(cls)));
    put(out, static_cast<std::uint64_t>(static_cast<std::int64_t>(sub)));
  }
  put(out, b.counters.patent_rows_skipped);
  put(out, b.counters.duplicate_citations);
  put(out, b.counters.self_citations);
  return out;
}

Bundle decode(const std::string& bytes) {
  Reader r(bytes);
  r.skip_magic();
  Bundle b;
  b.patents.resize(r.count());
  for (auto& p : b.patents) {
    p.id = r.get_signed();
    p.grant_date = Date(static_cast<std::int32_t>(r.get_signed()));
    p.uspto_class = static_cast<int>(r.get_signed());
  }
  b.citations.edges.resize(r.count());
  for (auto& e : b.citations.edges) {
    e.citing = r.get_signed();
    e.cited = r.get_signed();
  }
  const auto n_map = r.count();
  for (std::size_t i = 0; i < n_map; ++i) {
    const auto cls = static_cast<int>(r.get_signed());
    const auto sub = static_cast<int>(r.get_signed());
    b.classmap.add(cls, sub);
  }
  b.counters.patent_rows_skipped = r.get();
  b.counters.duplicate_citations = r.get();
  b.counters.self_citations = r.get();
  if (!r.done()) throw InputError("bundle: trailing data");
  b.citations.duplicates_dropped = b.counters.duplicate_citations;
  b.citations.self_loops_dropped = b.counters.self_citations;
  return b;
}

void write_bundle(const Bundle& bundle, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path.string());
  const auto bytes = encode(bundle);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw InputError("write failed: " + path.string());
}

Bundle read_bundle(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot read bundle " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode(bytes);
}

}  // namespace citevec
