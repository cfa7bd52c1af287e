#include <doctest.h>

#include <cmath>

#include "micro.hpp"
#include "mgkt/dangling.hpp"
#include "mgkt/error.hpp"
#include "tempdir.hpp"

using namespace mgkt;

namespace {

// Genes only: A = {g0, g1, g2}, B = {h0, h1, h2}; 2-d embeddings.
struct GenePair {
  MetabolicGraph a{"A", 0};
  MetabolicGraph b{"B", 1};
  std::unique_ptr<JointIndex> index;
  Matrix e;

  explicit GenePair(std::initializer_list<std::pair<double, double>> coords) {
    for (int i = 0; i < 3; ++i) a.add_vertex(Kind::Gene, "g" + std::to_string(i));
    for (int i = 0; i < 3; ++i) b.add_vertex(Kind::Gene, "h" + std::to_string(i));
    index = std::make_unique<JointIndex>(a, b);
    e = Matrix(6, 2);
    std::size_t r = 0;
    for (const auto& [x, y] : coords) {
      e(r, 0) = x;
      e(r, 1) = y;
      ++r;
    }
  }
};

}  // namespace

TEST_CASE("alpha is the largest seed distance or the fixed value") {
  GenePair p({{0, 0}, {0, 0}, {0, 0}, {1.0, 0}, {2.0, 0.5}, {0.2, 0.1}});
  const std::vector<InterLink> seeds{{p.a.vertices(Kind::Gene)[0], p.b.vertices(Kind::Gene)[0], Provenance::Seed},
                                     {p.a.vertices(Kind::Gene)[1], p.b.vertices(Kind::Gene)[1], Provenance::Seed},
                                     {p.a.vertices(Kind::Gene)[2], p.b.vertices(Kind::Gene)[2], Provenance::Seed}};
  // Seed distances 1.0, 2.5 and 0.3.
  CHECK(compute_alpha(p.e, seeds, *p.index) == doctest::Approx(2.5));
  CHECK(compute_alpha(p.e, seeds, *p.index, AlphaMode::Fixed, 0.7) == 0.7);
  CHECK_THROWS_AS(compute_alpha(p.e, {}, *p.index), Error);
}

TEST_CASE("candidate weight decays linearly with tenure") {
  DanglingState s;
  s.tenure_limit = 5;
  CHECK(s.weight(0) == 1.0);
  CHECK(s.weight(2) == doctest::Approx(0.6));
  CHECK(s.weight(5) == 0.0);
  CHECK(s.weight(9) == 0.0);
}

TEST_CASE("an outlier becomes a candidate while a vertex with an identical counterpart does not") {
  GenePair p({{0, 0}, {1, 0}, {10, 10}, {0, 0}, {1, 0}, {0, 1}});
  DanglingState s;
  s.alpha = 0.7;
  s.theta = 0.8;
  s = update_candidates(s, p.e, *p.index);
  const VertexId outlier = p.a.vertices(Kind::Gene)[2];
  REQUIRE(s.candidates.size() == 1);
  CHECK(s.candidates.at(outlier) == 1);
  CHECK(s.nn_distance.at(outlier) == doctest::Approx(19.0));
  CHECK(s.nn_distance.at(p.a.vertices(Kind::Gene)[0]) == 0.0);

  s = update_candidates(s, p.e, *p.index);
  CHECK(s.candidates.at(outlier) == 2);

  // Moving the outlier back resets its membership.
  p.e(2, 0) = 0.0;
  p.e(2, 1) = 1.0;
  s = update_candidates(s, p.e, *p.index);
  CHECK(s.candidates.empty());
}

TEST_CASE("finalize eliminates candidates that reached the tenure limit") {
  GenePair p({{0, 0}, {1, 0}, {10, 10}, {0, 0}, {1, 0}, {0, 1}});
  DanglingState s;
  s.tenure_limit = 2;
  const auto g = p.a.vertices(Kind::Gene);
  s.candidates = {{g[0], 1}, {g[2], 2}};
  s = finalize(s);
  CHECK(s.eliminated == std::set<VertexId>{g[2]});
  CHECK(s.candidates.size() == 1);

  const auto w = vertex_weights(s, *p.index);
  CHECK(w[0] == doctest::Approx(0.5));
  CHECK(w[1] == 1.0);
  CHECK(w[2] == 0.0);

  // Eliminated vertices leave both pools; g2 can no longer be a candidate.
  s.alpha = 0.0;
  s.candidates.clear();
  s = update_candidates(s, p.e, *p.index);
  CHECK_FALSE(s.candidates.contains(g[2]));
}

TEST_CASE("candidate updates match the brute-force rank oracle on random micro pairs") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto p = mgkt::testing::random_micro_pair(seed);
    const auto prior = mgkt::testing::random_dangling_state(p, seed * 7 + 1);
    const auto fast = update_candidates(prior, p.embeddings, *p.index);
    const auto slow = mgkt::testing::oracle_update(prior, p);
    INFO("seed " << seed);
    CHECK(fast.candidates == slow.candidates);
    CHECK(fast.eliminated == prior.eliminated);
  }
}

TEST_CASE("twin graphs with identical embeddings yield no candidates") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto p = mgkt::testing::random_micro_pair(seed);
    // Copy A's rows onto B where a same-position counterpart exists; drop the rest of B.
    MetabolicGraph twin("B", 1);
    for (const Kind kind : kKinds) {
      for (const auto& v : p.a.vertices(kind)) twin.add_vertex(kind, p.a.name(v));
    }
    const JointIndex ix(p.a, twin);
    Matrix e(ix.size(), p.embeddings.cols());
    for (std::size_t r = 0; r < ix.size(); ++r) {
      VertexId v = ix.vertex(r);
      v.graph = 0;
      const auto src = p.embeddings.row(p.index->row(v));
      std::copy(src.begin(), src.end(), e.row(r).begin());
    }
    DanglingState s;
    s.alpha = 0.0;
    for (int epoch = 0; epoch < 3; ++epoch) {
      s = update_candidates(s, e, ix);
      CHECK(s.candidates.empty());
    }
  }
}

TEST_CASE("down-weighting scales edges by the smaller endpoint weight") {
  MetabolicGraph a("A", 0), b("B", 1);
  const auto m = a.add_vertex(Kind::Metabolite, "m");
  const auto g0 = a.add_vertex(Kind::Gene, "g0");
  const auto g1 = a.add_vertex(Kind::Gene, "g1");
  a.add_triple({m, Direction::Left, g0});
  a.add_triple({m, Direction::Right, g1});
  b.add_vertex(Kind::Gene, "h");
  const JointIndex ix(a, b);
  DanglingState s;
  s.tenure_limit = 4;
  s.candidates[g0] = 1;
  s.eliminated.insert(g1);
  const auto adj = apply_downweights(s, a, b, ix);
  const auto weight_between = [&](VertexId x, VertexId y) {
    const auto r = ix.row(x);
    for (std::size_t e = adj.offsets[r]; e < adj.offsets[r + 1]; ++e) {
      if (adj.cols[e] == ix.row(y)) return adj.weights[e];
    }
    return -1.0;
  };
  CHECK(weight_between(m, g0) == doctest::Approx(0.75));
  CHECK(weight_between(g0, m) == doctest::Approx(0.75));
  CHECK(weight_between(m, g1) == 0.0);
}

TEST_CASE("dangling report lists candidates and eliminated vertices in order") {
  GenePair p({{0, 0}, {1, 0}, {10, 10}, {0, 0}, {1, 0}, {0, 1}});
  DanglingState s;
  const auto g = p.a.vertices(Kind::Gene);
  s.tenure_limit = 3;
  s.candidates[g[2]] = 2;
  s.eliminated.insert(g[0]);
  s.nn_distance[g[2]] = 19.0;
  const auto rows = dangling_report_rows(s, 7);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].vertex == g[0]);
  CHECK(rows[0].eliminated);
  CHECK(std::isnan(rows[0].nn_distance));
  const auto dir = mgkt::testing::temp_dir("dangling");
  write_dangling_report(dir / "d.csv", rows, p.a, p.b);
  CHECK(mgkt::testing::read_text_file(dir / "d.csv") ==
        "epoch,vertex_id,status,tenure,nn_distance\n7,A:g0,eliminated,3,\n7,A:g2,candidate,2,19\n");
}
