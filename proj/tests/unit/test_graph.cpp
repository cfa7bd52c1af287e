#include <doctest.h>

#include <algorithm>
#include <set>

#include "mgkt/error.hpp"
#include "mgkt/graph.hpp"
#include "tempdir.hpp"

using namespace mgkt;
using mgkt::testing::temp_dir;
using mgkt::testing::write_text_file;

namespace {

MetabolicGraph chain_graph(std::size_t n) {
  MetabolicGraph g("A", 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto m = g.add_vertex(Kind::Metabolite, "m" + std::to_string(i));
    const auto ge = g.add_vertex(Kind::Gene, "g" + std::to_string(i % 7));
    g.add_triple({m, i % 2 ? Direction::Right : Direction::Left, ge});
  }
  return g;
}

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("split sizes use largest remainders") {
  CHECK(split_sizes(10, {0.6, 0.3, 0.1}) == std::array<std::size_t, 3>{6, 3, 1});
  CHECK(split_sizes(7746, {0.6, 0.3, 0.1}) == std::array<std::size_t, 3>{4648, 2324, 774});
  CHECK(split_sizes(3, {0.6, 0.3, 0.1}) == std::array<std::size_t, 3>{2, 1, 0});
  CHECK(code_of([] { split_sizes(10, {0.5, 0.3, 0.1}); }) == ErrorCode::BadRatios);
  CHECK(code_of([] { split_sizes(10, {1.2, -0.3, 0.1}); }) == ErrorCode::BadRatios);
}

TEST_CASE("split is a seeded partition of the triples") {
  const auto g = chain_graph(40);
  const auto s = split_triples(g, {0.6, 0.3, 0.1}, 5);
  CHECK(s.train.size() == 24);
  CHECK(s.test.size() == 12);
  CHECK(s.valid.size() == 4);
  std::set<Triple> all(s.train.begin(), s.train.end());
  all.insert(s.test.begin(), s.test.end());
  all.insert(s.valid.begin(), s.valid.end());
  CHECK(all.size() == 40);
  const std::set<Triple> expected(g.triples().begin(), g.triples().end());
  CHECK(all == expected);
  const auto again = split_triples(g, {0.6, 0.3, 0.1}, 5);
  CHECK(again.train == s.train);
  CHECK(again.test == s.test);
  const auto other = split_triples(g, {0.6, 0.3, 0.1}, 6);
  CHECK(other.train != s.train);
  CHECK(code_of([] { split_triples(chain_graph(2), {0.6, 0.3, 0.1}, 1); }) == ErrorCode::TooFewTriples);
}

TEST_CASE("negatives avoid every forbidden triple and keep kinds") {
  const auto g = chain_graph(30);
  Rng rng(9);
  for (const Triple& t : g.triples()) {
    const auto negs = sample_negatives(g, t, 10, rng);
    CHECK(negs.size() == 10);
    for (const auto& n : negs) {
      CHECK_FALSE(g.contains(n));
      CHECK(n.metabolite.kind == Kind::Metabolite);
      CHECK(n.gene.kind == Kind::Gene);
      CHECK(n.direction == t.direction);
      CHECK(((n.metabolite == t.metabolite) != (n.gene == t.gene)));
    }
  }
}

TEST_CASE("negative sampling reports exhaustion") {
  MetabolicGraph g("A", 0);
  const auto m = g.add_vertex(Kind::Metabolite, "m");
  const auto ge = g.add_vertex(Kind::Gene, "g");
  g.add_triple({m, Direction::Left, ge});
  Rng rng(1);
  CHECK(code_of([&] { sample_negatives(g, g.triples()[0], 1, rng); }) == ErrorCode::Exhausted);
  // Two genes, both already linked to the only metabolite in the same direction.
  const auto g2 = g.add_vertex(Kind::Gene, "g2");
  g.add_triple({m, Direction::Left, g2});
  CHECK(code_of([&] { sample_negatives(g, g.triples()[0], 1, rng); }) == ErrorCode::Exhausted);
}

TEST_CASE("graph files round trip and reject malformed input") {
  const auto dir = temp_dir("graph");
  const auto g = chain_graph(12);
  save_graph(g, dir / "g.tsv");
  const auto back = load_graph(dir / "g.tsv", "A", 0);
  CHECK(back.num_triples() == g.num_triples());
  for (const Triple& t : g.triples()) {
    CHECK(back.contains(back.make_triple(g.name(t.metabolite), t.direction, g.name(t.gene))));
  }

  write_text_file(dir / "bad_dir.tsv", "m1\tup\tg1\n");
  CHECK(code_of([&] { load_graph(dir / "bad_dir.tsv", "A"); }) == ErrorCode::BadDirection);
  write_text_file(dir / "bad_fields.tsv", "m1\tleft\n");
  CHECK(code_of([&] { load_graph(dir / "bad_fields.tsv", "A"); }) == ErrorCode::MalformedLine);
  write_text_file(dir / "empty.tsv", "# nothing\n");
  CHECK(code_of([&] { load_graph(dir / "empty.tsv", "A"); }) == ErrorCode::EmptyGraph);
  CHECK(code_of([&] { load_graph(dir / "missing.tsv", "A"); }) == ErrorCode::Io);

  write_text_file(dir / "dups.tsv", "m1\tleft\tg1\nm1\tleft\tg1\nm1\tright\tg1\n");
  CHECK(load_graph(dir / "dups.tsv", "A").num_triples() == 2);
}

TEST_CASE("validate_bipartite flags kind clashes as JSON lines") {
  MetabolicGraph g("A", 0);
  const auto m = g.add_vertex(Kind::Metabolite, "m");
  const auto ge = g.add_vertex(Kind::Gene, "g");
  g.add_triple({m, Direction::Left, ge});
  CHECK(validate_bipartite(g).empty());
  g.add_triple({ge, Direction::Left, m});
  const auto v = validate_bipartite(g);
  REQUIRE(!v.empty());
  CHECK(v.front().kind == ViolationKind::WrongKind);
  const auto lines = violations_to_json_lines(v);
  CHECK(std::count(lines.begin(), lines.end(), '\n') == static_cast<long>(v.size()));
  CHECK(lines.find("\"violation\":\"WrongKind\"") != std::string::npos);
}

TEST_CASE("declared kinds catch gene-gene triples and unknown ids") {
  const auto dir = temp_dir("kinds");
  write_text_file(dir / "kinds.tsv", "# id\tkind\nm1\tmetabolite\ng1\tgene\ng2\tgene\nx\tgene\nx\tmetabolite\n");
  write_text_file(dir / "g.tsv", "m1\tleft\tg1\ng1\tleft\tg2\nm1\tright\tghost\nx\tleft\tx\n");
  const auto kinds = load_kinds(dir / "kinds.tsv");
  const auto g = load_graph(dir / "g.tsv", "A", 0);
  const auto v = validate_declared_kinds(g, kinds);
  REQUIRE(v.size() == 2);
  CHECK(v[0].kind == ViolationKind::WrongKind);
  CHECK(v[0].triple_index == 1);
  CHECK(v[0].detail.find("(g1, left, g2)") != std::string::npos);
  CHECK(v[1].kind == ViolationKind::MissingVertex);
  CHECK(v[1].triple_index == 2);
  write_text_file(dir / "bad.tsv", "m1\tprotein\n");
  CHECK_THROWS_AS(load_kinds(dir / "bad.tsv"), Error);
}

TEST_CASE("link files resolve kinds against both graphs") {
  const auto dir = temp_dir("links");
  MetabolicGraph a("A", 0), b("B", 1);
  const auto am = a.add_vertex(Kind::Metabolite, "akg");
  const auto ag = a.add_vertex(Kind::Gene, "YDR");
  const auto bm = b.add_vertex(Kind::Metabolite, "M_akg");
  const auto bg = b.add_vertex(Kind::Gene, "G_1");
  const std::vector<InterLink> links{{ag, bg, Provenance::Seed}, {am, bm, Provenance::Inferred}};
  save_links(links, a, b, dir / "l.tsv", true);
  const auto back = load_links(dir / "l.tsv", a, b);
  REQUIRE(back.size() == 2);
  CHECK(back[0] == links[0]);
  CHECK(back[1].provenance == Provenance::Inferred);
  write_text_file(dir / "mixed.tsv", "akg\tG_1\n");
  CHECK(code_of([&] { load_links(dir / "mixed.tsv", a, b); }) == ErrorCode::MissingVertex);
}

TEST_CASE("joint index lays out both graphs") {
  MetabolicGraph a("A", 0), b("B", 1);
  a.add_vertex(Kind::Gene, "g0");
  a.add_vertex(Kind::Gene, "g1");
  a.add_vertex(Kind::Metabolite, "m0");
  b.add_vertex(Kind::Gene, "h0");
  b.add_vertex(Kind::Metabolite, "n0");
  b.add_vertex(Kind::Metabolite, "n1");
  const JointIndex ix(a, b);
  CHECK(ix.size() == 6);
  for (std::size_t r = 0; r < ix.size(); ++r) CHECK(ix.row(ix.vertex(r)) == r);
  CHECK(ix.row(VertexId{1, Kind::Metabolite, 1}) == 5);
}
