#include <doctest.h>

#include "citevec/bundle.hpp"
#include "citevec/digest.hpp"
#include "citevec/errors.hpp"
#include "support.hpp"

using namespace citevec;

namespace {

const char* kPatents =
    "patent_id\tgrant_date\tuspto_class\n"
    "3\t1990-05-01\t442\n"
    "1\t1989-01-15\t8\n"
    "2\t1990-02-01\t12\n"
    "x\t1990-02-01\t12\n";
const char* kCitations =
    "citing_id\tcited_id\n"
    "3\t1\n"
    "2\t1\n"
    "3\t1\n"
    "2\t2\n"
    "9\t1\n";
const char* kClassmap = "uspto_class\tsubcategory\n442\t11\n8\t11\n12\t12\n";

Bundle load(const testing::TempDir& dir, const char* patents = kPatents,
            const char* citations = kCitations) {
  testing::write_file(dir / "p.tsv", patents);
  testing::write_file(dir / "c.tsv", citations);
  testing::write_file(dir / "m.tsv", kClassmap);
  return ingest(dir / "p.tsv", dir / "c.tsv", dir / "m.tsv");
}

}  // namespace

TEST_CASE("sha256 reference values") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  testing::TempDir dir;
  testing::write_file(dir / "f", "abc");
  CHECK(sha256_file(dir / "f") == sha256_hex("abc"));
  CHECK_THROWS_AS(sha256_file(dir / "none"), InputError);
}

TEST_CASE("ingest counts what it drops") {
  testing::TempDir dir;
  const auto b = load(dir);
  REQUIRE(b.patents.size() == 3);
  CHECK(b.patents[0].id == 1);
  CHECK(b.counters.patent_rows_skipped == 1);
  CHECK(b.counters.duplicate_citations == 1);
  CHECK(b.counters.self_citations == 1);
  CHECK(b.citations.edges.size() == 3);
  const auto g = b.graph();
  CHECK(g.size() == 3);
  CHECK(g.counters().dangling_edges == 1);
  CHECK(g.patent(0).subcategory == 11);
}

TEST_CASE("encoding round trip") {
  testing::TempDir dir;
  const auto b = load(dir);
  const auto bytes = encode(b);
  CHECK(bytes.rfind("CITEVEC1", 0) == 0);
  CHECK(decode(bytes) == b);
  CHECK(encode(decode(bytes)) == bytes);

  write_bundle(b, dir / "b.bin");
  CHECK(read_bundle(dir / "b.bin") == b);
  CHECK(read_bundle(dir / "b.bin").graph() == b.graph());
  CHECK(sha256_file(dir / "b.bin") == sha256_hex(bytes));

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto rc = testing::random_corpus(seed);
    Bundle r;
    r.patents = rc.patents;
    r.citations = rc.edges;
    r.classmap = testing::identity_map();
    r.counters.patent_rows_skipped = seed;
    r.counters.duplicate_citations = r.citations.duplicates_dropped;
    r.counters.self_citations = r.citations.self_loops_dropped;
    CHECK(decode(encode(r)) == r);
  }
}

TEST_CASE("row order does not change the encoding") {
  testing::TempDir a, b;
  const char* shuffled =
      "uspto_class\tpatent_id\tgrant_date\n"
      "12\t2\t1990-02-01\n"
      "442\t3\t1990-05-01\n"
      "12\tx\t1990-02-01\n"
      "8\t1\t1989-01-15\n";
  const char* cites = "cited_id,citing_id\n1,9\n2,2\n1,3\n1,2\n1,3\n";
  CHECK(encode(load(a)) == encode(load(b, shuffled, cites)));
}

TEST_CASE("corrupt bundles are rejected") {
  testing::TempDir dir;
  const auto bytes = encode(load(dir));
  CHECK_THROWS_AS(decode(""), InputError);
  CHECK_THROWS_AS(decode("CITEVEC2" + bytes.substr(8)), InputError);
  for (std::size_t cut : {9ul, bytes.size() / 2, bytes.size() - 1})
    CHECK_THROWS_AS(decode(bytes.substr(0, cut)), InputError);
  CHECK_THROWS_AS(decode(bytes + "x"), InputError);
  CHECK_THROWS_AS(read_bundle(dir / "missing.bin"), InputError);
}
