#include <doctest.h>

#include <json.hpp>

#include "mgkt/error.hpp"
#include "mgkt/eval.hpp"

using namespace mgkt;

namespace {

MetabolicGraph ring_graph() {
  MetabolicGraph g("A", 0);
  for (int i = 0; i < 6; ++i) g.add_vertex(Kind::Metabolite, "m" + std::to_string(i));
  for (int i = 0; i < 6; ++i) g.add_vertex(Kind::Gene, "g" + std::to_string(i));
  for (std::uint32_t i = 0; i < 6; ++i) {
    g.add_triple({{0, Kind::Metabolite, i}, Direction::Left, {0, Kind::Gene, i}});
    g.add_triple({{0, Kind::Metabolite, i}, Direction::Right, {0, Kind::Gene, (i + 1) % 6}});
  }
  return g;
}

}  // namespace

TEST_CASE("eval set holds each test triple followed by its corruptions") {
  const auto g = ring_graph();
  std::unordered_set<std::uint64_t> known;
  for (const auto& t : g.triples()) known.insert(t.key());
  const NegativeSampler sampler({&g}, known);
  const std::vector<Triple> test(g.triples().begin(), g.triples().begin() + 3);
  const auto items = build_eval_set(test, sampler, 4, 11);
  REQUIRE(items.size() == 15);
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i % 5 == 0) {
      CHECK(items[i].valid);
      CHECK(items[i].triple == test[i / 5]);
    } else {
      CHECK_FALSE(items[i].valid);
      CHECK_FALSE(known.contains(items[i].triple.key()));
      CHECK(items[i].triple.direction == test[i / 5].direction);
    }
  }
  const auto again = build_eval_set(test, sampler, 4, 11);
  for (std::size_t i = 0; i < items.size(); ++i) CHECK(again[i].triple == items[i].triple);
}

TEST_CASE("evaluate splits the confusion by relation and graph") {
  MetabolicGraph a("A", 0), b("B", 1);
  const auto ma = a.add_vertex(Kind::Metabolite, "m");
  const auto ga = a.add_vertex(Kind::Gene, "g");
  const auto mb = b.add_vertex(Kind::Metabolite, "n");
  const auto gb = b.add_vertex(Kind::Gene, "h");
  const JointIndex ix(a, b);
  // One-dimensional TransE with zero relations: score = |m - g|.
  auto model = LinkPredModel::init(LpVariant::TransE, ix.size(), 1, 1.0, 1);
  model.relation.value.fill(0.0);
  model.vertex.value(ix.row(ma), 0) = 0.0;
  model.vertex.value(ix.row(ga), 0) = 0.5;
  model.vertex.value(ix.row(mb), 0) = 3.0;
  model.vertex.value(ix.row(gb), 0) = 3.0;
  Thresholds tau;
  tau.tau = {1.0, 1.0};
  const std::vector<LabeledTriple> items{{{ma, Direction::Left, ga}, true},    // tp, A, left
                                         {{ma, Direction::Right, gb}, false},  // score 3: tn, A, right
                                         {{mb, Direction::Left, gb}, false},   // score 0: fp, B, left
                                         {{mb, Direction::Right, ga}, true}};  // score 2.5: fn, B, right
  const auto r = evaluate(model, tau, items, ix);
  CHECK(r.overall.tp == 1);
  CHECK(r.overall.tn == 1);
  CHECK(r.overall.fp == 1);
  CHECK(r.overall.fn == 1);
  CHECK(r.per_relation[0].tp == 1);
  CHECK(r.per_relation[0].fp == 1);
  CHECK(r.per_relation[1].tn == 1);
  CHECK(r.per_relation[1].fn == 1);
  CHECK(r.per_graph[0].tp + r.per_graph[0].tn == 2);
  CHECK(r.per_graph[1].fp + r.per_graph[1].fn == 2);
  const auto j = nlohmann::json::parse(r.to_json());
  CHECK(j["f1"].get<double>() == doctest::Approx(0.5));
  CHECK(j["per_relation"]["left"]["tp"] == 1);
  CHECK_FALSE(j.contains("alignment_hits_at_1"));
  CHECK_THROWS_AS(evaluate(model, tau, {}, ix), Error);
}

TEST_CASE("alignment hits at one counts exact nearest counterparts") {
  MetabolicGraph a("A", 0), b("B", 1);
  const auto a0 = a.add_vertex(Kind::Gene, "a0");
  const auto a1 = a.add_vertex(Kind::Gene, "a1");
  const auto a2 = a.add_vertex(Kind::Gene, "a2");
  const auto b0 = b.add_vertex(Kind::Gene, "b0");
  const auto b1 = b.add_vertex(Kind::Gene, "b1");
  const auto b2 = b.add_vertex(Kind::Gene, "b2");
  const JointIndex ix(a, b);
  Matrix e(ix.size(), 1);
  e(ix.row(a0), 0) = 0.0;
  e(ix.row(a1), 0) = 1.0;
  e(ix.row(a2), 0) = 2.0;
  e(ix.row(b0), 0) = 0.1;
  e(ix.row(b1), 0) = 2.1;  // nearer to a2 than b2 is
  e(ix.row(b2), 0) = 2.5;
  const std::vector<InterLink> heldout{{a0, b0, Provenance::Seed}, {a1, b1, Provenance::Seed}, {a2, b2, Provenance::Seed}};
  CHECK(eval_alignment(e, ix, b, heldout) == doctest::Approx(1.0 / 3.0));
  // Equidistant candidates resolve to the lowest name.
  e(ix.row(b1), 0) = -0.1;
  const std::vector<InterLink> tie{{a0, b1, Provenance::Seed}};
  CHECK(eval_alignment(e, ix, b, tie) == 0.0);
  CHECK_THROWS_AS(eval_alignment(e, ix, b, {}), Error);
}
