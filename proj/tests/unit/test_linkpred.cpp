#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "gradcheck.hpp"
#include "mgkt/error.hpp"
#include "mgkt/linkpred.hpp"
#include "tempdir.hpp"

using namespace mgkt;

namespace {

struct Toy {
  MetabolicGraph a{"A", 0};
  MetabolicGraph b{"B", 1};
  std::unique_ptr<JointIndex> index;
  Triple t;

  Toy() {
    const auto m = a.add_vertex(Kind::Metabolite, "m");
    const auto g = a.add_vertex(Kind::Gene, "g");
    t = {m, Direction::Right, g};
    a.add_triple(t);
    b.add_vertex(Kind::Gene, "h");
    index = std::make_unique<JointIndex>(a, b);
  }
};

LinkPredModel model_with(LpVariant v, const Toy& toy, std::vector<double> m, std::vector<double> g,
                         std::vector<double> r) {
  auto model = LinkPredModel::init(v, toy.index->size(), m.size(), 1.0, 1);
  model.vertex.value.fill(0.0);
  std::copy(m.begin(), m.end(), model.vertex.value.row(toy.index->row(toy.t.metabolite)).begin());
  std::copy(g.begin(), g.end(), model.vertex.value.row(toy.index->row(toy.t.gene)).begin());
  std::copy(r.begin(), r.end(), model.relation.value.row(1).begin());
  return model;
}

// Exhaustive F1 over every distinct score as a cutoff, smallest cutoff on ties.
// F1 = 2tp / (2tp + fp + fn) is compared as an exact fraction.
double brute_best_threshold(const std::vector<std::pair<double, bool>>& items) {
  double best_tau = 0.0;
  long best_num = -1, best_den = 1;
  std::vector<double> cutoffs;
  for (const auto& [s, _] : items) cutoffs.push_back(s);
  std::sort(cutoffs.begin(), cutoffs.end());
  for (const double tau : cutoffs) {
    long tp = 0, fp = 0, fn = 0;
    for (const auto& [s, y] : items) {
      if (s <= tau && y) ++tp;
      if (s <= tau && !y) ++fp;
      if (s > tau && y) ++fn;
    }
    const long num = 2 * tp;
    const long den = std::max(1L, 2 * tp + fp + fn);
    if (num * best_den > best_num * den) {
      best_num = num;
      best_den = den;
      best_tau = tau;
    }
  }
  return best_tau;
}

}  // namespace

TEST_CASE("scores follow the closed forms of each variant") {
  const Toy toy;
  const auto transe = model_with(LpVariant::TransE, toy, {1.0, -2.0, 0.5}, {0.0, 1.0, 1.0}, {0.5, 0.5, 0.5});
  CHECK(score(transe, toy.t, *toy.index) == doctest::Approx(1.5 + 2.5 + 0.0));

  const auto distmult = model_with(LpVariant::DistMult, toy, {1.0, -2.0, 0.5}, {2.0, 1.0, 4.0}, {0.5, 1.0, 2.0});
  CHECK(score(distmult, toy.t, *toy.index) == doctest::Approx(-(1.0 - 2.0 + 4.0)));

  const double phase0 = std::numbers::pi / 2, phase1 = 0.3;
  const auto rotate =
      model_with(LpVariant::RotatE, toy, {1.0, 0.0, 0.5, -0.5}, {0.0, 1.0, 2.0, 0.0}, {phase0, phase1});
  const std::complex<double> m0(1.0, 0.0), m1(0.5, -0.5), g0(0.0, 1.0), g1(2.0, 0.0);
  const double expected = std::abs(m0 * std::polar(1.0, phase0) - g0) + std::abs(m1 * std::polar(1.0, phase1) - g1);
  CHECK(score(rotate, toy.t, *toy.index) == doctest::Approx(expected));
  // A quarter turn maps (1, 0) onto (0, 1) exactly.
  CHECK(std::abs(m0 * std::polar(1.0, phase0) - g0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("TransE is invariant to a shared translation and nonnegative") {
  const Toy toy;
  auto model = model_with(LpVariant::TransE, toy, {1.0, -2.0, 0.5}, {0.0, 1.0, 1.0}, {0.5, 0.5, 0.5});
  const double before = score(model, toy.t, *toy.index);
  for (std::size_t r : {toy.index->row(toy.t.metabolite), toy.index->row(toy.t.gene)}) {
    for (double& x : model.vertex.value.row(r)) x += 3.25;
  }
  CHECK(score(model, toy.t, *toy.index) == doctest::Approx(before));
  CHECK(before >= 0.0);
}

TEST_CASE("init validates its arguments") {
  CHECK_THROWS_AS(LinkPredModel::init(LpVariant::RotatE, 3, 5, 1.0, 1), Error);
  CHECK_THROWS_AS(LinkPredModel::init(LpVariant::TransE, 3, 4, 0.0, 1), Error);
  CHECK_THROWS_AS(LinkPredModel::init(LpVariant::TransE, 3, 4, 1.0, 1, 0.0), Error);
  const auto m = LinkPredModel::init(LpVariant::TransE, 3, 4, 1.0, 1, 0.01);
  for (const double x : m.vertex.value.flat()) CHECK(std::abs(x) <= 0.01);
  CHECK(parse_variant("rotate") == LpVariant::RotatE);
  CHECK_FALSE(parse_variant("complex").has_value());
}

TEST_CASE("hinge loss is zero exactly when every negative clears the margin") {
  const Toy toy;
  auto model = model_with(LpVariant::TransE, toy, {0.0, 0.0}, {0.5, 0.0}, {0.5, 0.0});
  const VertexId h{1, Kind::Gene, 0};
  const Triple neg{toy.t.metabolite, toy.t.direction, h};
  // f(pos) = 0, f(neg) = |0.5 - h| summed; put h far away first.
  model.vertex.value(toy.index->row(h), 0) = 2.0;
  LpBatch batch{{toy.t}, {neg}, 1};
  CHECK(lp_loss(model, batch, *toy.index, false).loss == 0.0);
  model.vertex.value(toy.index->row(h), 0) = 1.0;  // f(neg) = 0.5 < 1
  const auto r = lp_loss(model, batch, *toy.index, false);
  CHECK(r.loss == doctest::Approx(0.5));
  CHECK(r.active_terms == 1);
}

TEST_CASE("link prediction gradients match central differences") {
  for (const LpVariant v : {LpVariant::TransE, LpVariant::RotatE, LpVariant::DistMult}) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto r = mgkt::testing::linkpred_gradient_check(v, seed);
      INFO(to_string(v) << " seed " << seed << " worst " << r.worst_param);
      CHECK(r.max_relative_error < 1e-4);
    }
  }
}

TEST_CASE("threshold selection maximises F1 and prefers the smallest cutoff") {
  const std::vector<std::pair<double, bool>> simple{{0.1, true}, {0.2, true}, {0.3, false}, {0.9, false}};
  CHECK(best_threshold(simple) == 0.2);
  // Two cutoffs reach F1 = 2/3: 0.1 (tp=1, fn=1) and 0.4 (tp=2, fp=2).
  const std::vector<std::pair<double, bool>> tied{{0.1, true}, {0.2, false}, {0.3, false}, {0.4, true}, {0.5, false}};
  CHECK(best_threshold(tied) == brute_best_threshold(tied));
  CHECK(best_threshold(tied) == 0.1);

  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::pair<double, bool>> items(1 + rng.uniform_index(12));
    for (auto& [s, y] : items) {
      s = 0.25 * static_cast<double>(rng.uniform_index(8));
      y = rng.coin();
    }
    INFO("trial " << trial);
    CHECK(best_threshold(items) == brute_best_threshold(items));
  }
}

TEST_CASE("classification is monotone in the threshold") {
  const Toy toy;
  const auto model = model_with(LpVariant::TransE, toy, {1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0});
  Thresholds tau;
  tau.tau[1] = 0.5;
  CHECK_FALSE(classify(model, tau, toy.t, *toy.index));
  tau.tau[1] = 1.0;
  CHECK(classify(model, tau, toy.t, *toy.index));
  tau.tau[1] = 7.0;
  CHECK(classify(model, tau, toy.t, *toy.index));
}

TEST_CASE("confusion counts and derived metrics") {
  Confusion c;
  c.add(true, true);
  c.add(true, true);
  c.add(true, false);
  c.add(false, true);
  c.add(false, false);
  CHECK(c.tp == 2);
  CHECK(c.fp == 1);
  CHECK(c.fn == 1);
  CHECK(c.tn == 1);
  CHECK(c.precision() == doctest::Approx(2.0 / 3.0));
  CHECK(c.recall() == doctest::Approx(2.0 / 3.0));
  CHECK(c.f1() == doctest::Approx(2.0 / 3.0));
  CHECK(Confusion{}.f1() == 0.0);
}

TEST_CASE("checkpoints round trip and report missing or foreign files") {
  const auto model = LinkPredModel::init(LpVariant::RotatE, 5, 6, 2.0, 3);
  Thresholds tau;
  tau.tau = {1.25, -0.5};
  const auto dir = mgkt::testing::temp_dir("lp");
  save_lp_checkpoint(dir / "m.bin", model, tau);
  const auto [back, back_tau] = load_lp_checkpoint(dir / "m.bin");
  CHECK(back.variant == LpVariant::RotatE);
  CHECK(back.margin == 2.0);
  CHECK(back.vertex.value == model.vertex.value);
  CHECK(back.relation.value == model.relation.value);
  CHECK(back_tau.tau == tau.tau);
  try {
    load_lp_checkpoint(dir / "absent.bin");
    FAIL("expected MissingCheckpoint");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingCheckpoint);
  }
  mgkt::testing::write_text_file(dir / "junk.bin", "not a model at all");
  try {
    load_lp_checkpoint(dir / "junk.bin");
    FAIL("expected BadCheckpoint");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadCheckpoint);
  }
}

TEST_CASE("training separates a small structured graph") {
  // Two modules: metabolites m0..m3 link left to genes g0..g3, m4..m7 to g4..g7.
  MetabolicGraph a("A", 0), b("B", 1);
  for (int i = 0; i < 8; ++i) a.add_vertex(Kind::Metabolite, "m" + std::to_string(i));
  for (int i = 0; i < 8; ++i) a.add_vertex(Kind::Gene, "g" + std::to_string(i));
  b.add_vertex(Kind::Gene, "x");
  b.add_vertex(Kind::Metabolite, "y");
  std::vector<Triple> train;
  std::vector<LabeledTriple> valid;
  for (std::uint32_t m = 0; m < 8; ++m) {
    for (std::uint32_t g = 0; g < 8; ++g) {
      const Triple t{{0, Kind::Metabolite, m}, Direction::Left, {0, Kind::Gene, g}};
      const bool same = (m < 4) == (g < 4);
      if (same) {
        a.add_triple(t);
        train.push_back(t);
      }
      valid.push_back({t, same});
    }
  }
  const JointIndex ix(a, b);
  LpConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 200;
  cfg.learning_rate = 0.05;
  cfg.negatives = 4;
  cfg.batch_size = 16;
  cfg.init_scale = 0.1;
  const auto res = train_lp(a, b, ix, train, valid, cfg);
  CHECK(res.valid_f1 == doctest::Approx(1.0));
  CHECK(confusion(res.model, res.tau, valid, ix).f1() == doctest::Approx(1.0));
  // Same inputs, same model.
  const auto again = train_lp(a, b, ix, train, valid, cfg);
  CHECK(again.model.vertex.value == res.model.vertex.value);
}
