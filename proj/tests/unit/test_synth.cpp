#include <doctest.h>

#include <chrono>
#include <cmath>
#include <map>
#include <set>

#include "mgkt/error.hpp"
#include "mgkt/synth.hpp"
#include "tempdir.hpp"

using namespace mgkt;

namespace {

SynthSpec small_spec() {
  SynthSpec s;
  s.n_genes = 60;
  s.n_metabolites = 40;
  s.edge_density = 0.08;
  s.n_modules = 4;
  s.surface_dim = s.description_dim = s.smiles_dim = s.sequence_dim = 4;
  return s;
}

// Renamed B triple for each A triple, through the complete alignment truth.
std::set<std::tuple<std::string, Direction, std::string>> renamed_a(const SynthInstance& inst) {
  std::map<std::pair<Kind, std::string>, std::string> to_b;
  for (const auto& l : inst.truth.true_inter) to_b[{l.kind, l.left}] = l.right;
  std::set<std::tuple<std::string, Direction, std::string>> out;
  for (const auto& t : inst.a.triples()) {
    out.emplace(to_b.at({Kind::Metabolite, inst.a.name(t.metabolite)}), t.direction,
                to_b.at({Kind::Gene, inst.a.name(t.gene)}));
  }
  return out;
}

std::set<std::tuple<std::string, Direction, std::string>> named(const MetabolicGraph& g) {
  std::set<std::tuple<std::string, Direction, std::string>> out;
  for (const auto& t : g.triples()) out.emplace(g.name(t.metabolite), t.direction, g.name(t.gene));
  return out;
}

}  // namespace

TEST_CASE("graph A has the requested size and every vertex carries a triple") {
  const auto spec = small_spec();
  const auto inst = generate(spec);
  CHECK(inst.a.num_genes() == 60);
  CHECK(inst.a.num_metabolites() == 40);
  CHECK(inst.a.num_triples() == static_cast<std::size_t>(std::llround(0.08 * 60 * 40)));
  for (const MetabolicGraph* g : {&inst.a, &inst.b}) {
    for (const Kind kind : kKinds) {
      for (const auto& v : g->vertices(kind)) CHECK_FALSE(g->neighbors(v).empty());
    }
    CHECK(validate_bipartite(*g).empty());
  }
}

TEST_CASE("without hiding, danglings or noise graph B is a renamed twin") {
  auto spec = small_spec();
  spec.p_hide_intra = 0.0;
  spec.p_dangling = 0.0;
  spec.feature_noise = 0.0;
  const auto inst = generate(spec);
  CHECK(inst.b.num_genes() == inst.a.num_genes());
  CHECK(inst.b.num_metabolites() == inst.a.num_metabolites());
  CHECK(renamed_a(inst) == named(inst.b));
  CHECK(inst.truth.hidden_triples.empty());
  CHECK(inst.truth.planted_danglings.empty());
  // Features of aligned vertices coincide.
  std::map<std::pair<std::string, FeatureField>, std::vector<float>> fa, fb;
  for (const auto& r : inst.features_a) fa[{r.vertex_id, r.field}] = r.values;
  for (const auto& r : inst.features_b) fb[{r.vertex_id, r.field}] = r.values;
  for (const auto& l : inst.truth.true_inter) {
    CHECK(fa.at({l.left, FeatureField::Surface}) == fb.at({l.right, FeatureField::Surface}));
  }
}

TEST_CASE("hidden triples are exactly the A triples missing from B") {
  const auto inst = generate(small_spec());
  const auto expected = renamed_a(inst);
  auto present = named(inst.b);
  std::set<std::tuple<std::string, Direction, std::string>> hidden;
  for (const auto& h : inst.truth.hidden_triples) hidden.emplace(h.metabolite, h.direction, h.gene);
  std::set<std::tuple<std::string, Direction, std::string>> missing;
  for (const auto& t : expected) {
    if (!present.contains(t)) missing.insert(t);
  }
  CHECK(hidden == missing);
  CHECK(hidden.size() == static_cast<std::size_t>(std::llround(0.3 * static_cast<double>(inst.a.num_triples()))));
}

TEST_CASE("dangling count, seed split and determinism") {
  auto spec = small_spec();
  spec.n_genes = 100;
  spec.n_metabolites = 100;
  spec.edge_density = 0.05;
  const auto inst = generate(spec);
  CHECK(inst.truth.planted_danglings.size() == 20);
  CHECK(inst.b.num_vertices() == 220);
  CHECK(inst.seeds.size() == 100);
  CHECK(inst.heldout.size() == 100);
  CHECK(inst.truth.true_inter.size() == 200);
  std::set<std::string> planted;
  for (const auto& [kind, name] : inst.truth.planted_danglings) planted.insert(name);
  for (const auto& l : inst.truth.true_inter) CHECK_FALSE(planted.contains(l.right));

  const auto again = generate(spec);
  CHECK(named(again.a) == named(inst.a));
  CHECK(named(again.b) == named(inst.b));
  CHECK(again.seeds == inst.seeds);
  spec.seed = 2;
  CHECK(named(generate(spec).b) != named(inst.b));
}

TEST_CASE("instances round trip through files") {
  const auto inst = generate(small_spec());
  const auto dir = mgkt::testing::temp_dir("synth");
  const auto paths = write_instance(inst, dir);
  const auto a = load_graph(paths.graph_a, "A", 0);
  const auto b = load_graph(paths.graph_b, "B", 1);
  CHECK(named(a) == named(inst.a));
  CHECK(named(b) == named(inst.b));
  CHECK(load_links(paths.seeds, a, b).size() == inst.seeds.size());
  const auto truth = load_truth(paths.truth);
  CHECK(truth.true_inter.size() == inst.truth.true_inter.size());
  CHECK(truth.hidden_triples.size() == inst.truth.hidden_triples.size());
  CHECK(truth_to_json(truth) == truth_to_json(inst.truth));
  const auto features = load_features(paths.features_b, b);
  CHECK(features.dims() == FeatureDims{4, 4, 4, 4});
}

TEST_CASE("recovery scores for perfect and empty predictions") {
  const auto inst = generate(small_spec());
  std::vector<InterLink> perfect_links = inst.heldout;
  std::set<VertexId> planted;
  for (const auto& [kind, name] : inst.truth.planted_danglings) planted.insert(*inst.b.find(kind, name));
  std::vector<TransferredTriple> transferred;
  for (const auto& h : inst.truth.hidden_triples) {
    transferred.push_back({{*inst.b.find(Kind::Metabolite, h.metabolite), h.direction, *inst.b.find(Kind::Gene, h.gene)}});
  }
  const auto best = score_recovery(perfect_links, planted, transferred, inst.truth, inst.a, inst.b);
  CHECK(best.inter_precision == 1.0);
  CHECK(best.inter_recall == 1.0);
  CHECK(best.dangling_precision == 1.0);
  CHECK(best.dangling_recall == 1.0);
  CHECK(best.hidden_recall == 1.0);

  const auto none = score_recovery({}, {}, {}, inst.truth, inst.a, inst.b);
  CHECK(none.inter_recall == 0.0);
  CHECK(none.dangling_recall == 0.0);
  CHECK(none.hidden_recall == 0.0);
  CHECK(none.dangling_precision == 0.0);

  GroundTruth bad = inst.truth;
  bad.planted_danglings.emplace_back(Kind::Gene, "nobody");
  CHECK_THROWS_AS(score_recovery({}, {}, {}, bad, inst.a, inst.b), Error);
}

TEST_CASE("invalid specs are rejected") {
  auto spec = small_spec();
  spec.p_hide_intra = 1.5;
  CHECK_THROWS_AS(generate(spec), Error);
  spec = small_spec();
  spec.edge_density = 0.001;  // fewer triples than vertices need
  CHECK_THROWS_AS(generate(spec), Error);
}

TEST_CASE("a large instance of about 2k vertices per graph generates quickly") {
  SynthSpec spec;
  spec.n_genes = 1097;
  spec.n_metabolites = 1046;
  spec.edge_density = 7746.0 / (1097.0 * 1046.0);
  spec.p_hide_intra = 0.24;
  spec.p_dangling = 0.063;
  const auto start = std::chrono::steady_clock::now();
  const auto inst = generate(spec);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(seconds < 5.0);
  CHECK(inst.a.num_triples() == 7746);
  CHECK(inst.a.num_vertices() == 2143);
}
