#include <doctest.h>

#include <algorithm>
#include <set>

#include <json.hpp>

#include "micro.hpp"
#include "mgkt/error.hpp"
#include "mgkt/transfer.hpp"
#include "tempdir.hpp"

using namespace mgkt;
using mgkt::testing::triples_of;

namespace {

// The case-study topology: yeast-side gene and metabolite with one triple,
// their counterparts in the other graph without it.
struct CaseStudy {
  MetabolicGraph sc{"SC", 0};
  MetabolicGraph io{"IO", 1};
  VertexId ydr, akg, g616, makg;
  std::vector<InterLink> links;

  CaseStudy() {
    ydr = sc.add_vertex(Kind::Gene, "YDR483W");
    akg = sc.add_vertex(Kind::Metabolite, "akg_c");
    g616 = io.add_vertex(Kind::Gene, "G_JL09_g616");
    makg = io.add_vertex(Kind::Metabolite, "M_akg_c");
    sc.add_triple({akg, Direction::Left, ydr});
    links = {{ydr, g616, Provenance::Inferred}, {akg, makg, Provenance::Inferred}};
    std::sort(links.begin(), links.end());
  }
};

}  // namespace

TEST_CASE("inter-link inference respects the strict distance threshold") {
  MetabolicGraph a("A", 0), b("B", 1);
  a.add_vertex(Kind::Gene, "x");
  b.add_vertex(Kind::Gene, "y");
  const JointIndex ix(a, b);
  Matrix e(2, 2);
  e(1, 0) = 0.1;
  CHECK(infer_inter_links(e, ix, a, b, nullptr, 0.0).empty());
  const auto links = infer_inter_links(e, ix, a, b, nullptr, 0.4);
  REQUIRE(links.size() == 1);
  CHECK(a.name(links[0].left) == "x");
  CHECK(b.name(links[0].right) == "y");
  CHECK(infer_inter_links(e, ix, a, b, nullptr, 0.1).empty());
  // A known link on either endpoint suppresses the pair.
  CHECK(infer_inter_links(e, ix, a, b, nullptr, 0.4, links).empty());
  DanglingState s;
  s.eliminated.insert(*b.find(Kind::Gene, "y"));
  CHECK(infer_inter_links(e, ix, a, b, &s, 0.4).empty());
}

TEST_CASE("inter-link inference matches the mutual nearest neighbour oracle") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto p = mgkt::testing::random_micro_pair(seed);
    const auto state = mgkt::testing::random_dangling_state(p, seed + 1000);
    const double gamma = 0.5 * static_cast<double>(seed % 6);
    const std::span<const InterLink> known =
        seed % 2 == 0 ? std::span<const InterLink>(p.links) : std::span<const InterLink>();
    const auto fast = infer_inter_links(p.embeddings, *p.index, p.a, p.b, &state, gamma, known);
    const auto slow = mgkt::testing::oracle_infer(p, state.eliminated, gamma, known);
    INFO("seed " << seed);
    CHECK(fast == slow);
    // Each vertex appears in at most one inferred link.
    std::set<VertexId> seen;
    for (const auto& l : fast) {
      CHECK(seen.insert(l.left).second);
      CHECK(seen.insert(l.right).second);
    }
  }
}

TEST_CASE("cross and within transfer match the enumeration oracles") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto p = mgkt::testing::random_micro_pair(seed, {.edge_probability = 0.5});
    const auto ta = p.a.triples();
    const auto tb = p.b.triples();
    INFO("seed " << seed);
    const auto cross = transfer_cross(p.links, ta, tb);
    CHECK(triples_of(cross) == mgkt::testing::oracle_cross(p.links, ta, tb));
    const auto within = transfer_within(p.links, ta, tb);
    CHECK(triples_of(within) == mgkt::testing::oracle_within(p.links, ta, tb));
    for (const auto& t : within) CHECK_FALSE(t.triple.cross_graph());
  }
}

TEST_CASE("transfer on the case-study topology emits the counterpart triple") {
  CaseStudy cs;
  const auto cross = transfer_cross(cs.links, cs.sc.triples(), cs.io.triples());
  const Triple target{cs.makg, Direction::Left, cs.g616};
  CHECK(triples_of(cross) == std::vector<Triple>{{cs.akg, Direction::Left, cs.g616},
                                                 {cs.makg, Direction::Left, cs.ydr},
                                                 target});
  const auto within = transfer_within(cs.links, cs.sc.triples(), cs.io.triples());
  REQUIRE(within.size() == 1);
  CHECK(within[0].triple == target);
  CHECK(within[0].evidence.size() == 2);

  // One link only: the pair rule has nothing to pair with.
  const std::vector<InterLink> one{cs.links[0]};
  CHECK(transfer_within(one, cs.sc.triples(), cs.io.triples()).empty());
  CHECK(transfer_cross({}, cs.sc.triples(), cs.io.triples()).empty());

  // An already present target is not emitted again.
  cs.io.add_triple(target);
  CHECK(transfer_within(cs.links, cs.sc.triples(), cs.io.triples()).empty());
}

TEST_CASE("transfer over twin graphs with identity links") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto p = mgkt::testing::random_micro_pair(seed);
    MetabolicGraph twin("B", 1);
    for (const Kind kind : kKinds) {
      for (const auto& v : p.a.vertices(kind)) twin.add_vertex(kind, p.a.name(v));
    }
    std::vector<InterLink> identity;
    for (const Kind kind : kKinds) {
      for (const auto& v : p.a.vertices(kind)) identity.push_back({v, {1, kind, v.index}, Provenance::Seed});
    }
    for (const auto& t : p.a.triples()) {
      twin.add_triple({{1, Kind::Metabolite, t.metabolite.index}, t.direction, {1, Kind::Gene, t.gene.index}});
    }
    CHECK(transfer_within(identity, p.a.triples(), twin.triples()).empty());
    const auto cross = transfer_cross(identity, p.a.triples(), twin.triples());
    // Two swaps per triple of each graph, but swapping A's metabolite equals
    // swapping the twin's gene, so each A triple yields two distinct cross edges.
    CHECK(cross.size() == 2 * p.a.num_triples());
    for (const auto& t : cross) CHECK(t.triple.cross_graph());
  }
}

TEST_CASE("enrich appends novel triples and withholds held-out ones") {
  CaseStudy cs;
  auto transferred = transfer_cross(cs.links, cs.sc.triples(), cs.io.triples());
  REQUIRE(transferred.size() == 3);
  std::vector<Triple> pool(cs.sc.triples().begin(), cs.sc.triples().end());
  auto res = enrich(pool, transferred, {});
  CHECK(res.added.size() == 3);
  CHECK(pool.size() == 4);
  CHECK(res.leaked.empty());
  // Idempotent on a second pass.
  CHECK(enrich(pool, transferred, {}).added.empty());

  std::vector<Triple> fresh(cs.sc.triples().begin(), cs.sc.triples().end());
  const std::unordered_set<std::uint64_t> held_out{transferred[2].triple.key()};
  res = enrich(fresh, transferred, held_out);
  CHECK(res.added.size() == 2);
  REQUIRE(res.leaked.size() == 1);
  CHECK(res.leaked[0] == transferred[2].triple);
  CHECK(std::find(fresh.begin(), fresh.end(), transferred[2].triple) == fresh.end());
}

TEST_CASE("transfer audit writes one JSON object per triple") {
  CaseStudy cs;
  auto transferred = transfer_within(cs.links, cs.sc.triples(), cs.io.triples());
  transferred[0].iteration = 3;
  const auto dir = mgkt::testing::temp_dir("audit");
  append_transfer_audit(dir / "a.jsonl", transferred, cs.sc, cs.io);
  append_transfer_audit(dir / "a.jsonl", transferred, cs.sc, cs.io);
  const auto text = mgkt::testing::read_text_file(dir / "a.jsonl");
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  const auto rec = nlohmann::json::parse(text.substr(0, text.find('\n')));
  CHECK(rec["iteration"] == 3);
  CHECK(rec["rule"] == "within");
  CHECK(rec["triple"] == nlohmann::json::array({"IO:M_akg_c", "left", "IO:G_JL09_g616"}));
  CHECK(rec["source"] == nlohmann::json::array({"SC:akg_c", "left", "SC:YDR483W"}));
}

TEST_CASE("links across the same graph are rejected") {
  CaseStudy cs;
  const std::vector<InterLink> bad{{cs.ydr, cs.ydr, Provenance::Seed}};
  CHECK_THROWS_AS(transfer_cross(bad, cs.sc.triples(), cs.io.triples()), Error);
}
