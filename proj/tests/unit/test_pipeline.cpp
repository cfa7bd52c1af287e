#include <doctest.h>

#include <algorithm>
#include <set>

#include "mgkt/error.hpp"
#include "mgkt/pipeline.hpp"
#include "tempdir.hpp"

using namespace mgkt;
using mgkt::testing::read_text_file;
using mgkt::testing::temp_dir;

namespace {

// A small synthetic instance and a fast run configuration over it.
RunConfig small_run(const std::filesystem::path& dir, std::size_t feature_dim = 6) {
  SynthSpec spec;
  spec.n_genes = 40;
  spec.n_metabolites = 40;
  spec.edge_density = 0.08;
  spec.n_modules = 4;
  spec.surface_dim = spec.description_dim = spec.smiles_dim = spec.sequence_dim = feature_dim;
  const auto paths = write_instance(generate(spec), dir);
  RunConfig c;
  c.graph_a = paths.graph_a;
  c.graph_b = paths.graph_b;
  c.features_a = paths.features_a;
  c.features_b = paths.features_b;
  c.seeds = paths.seeds;
  c.heldout_links = paths.heldout;
  c.truth = paths.truth;
  c.dim = 8;
  c.modality_dim = 4;
  c.align_lr = 0.01;
  c.outer_iterations = 2;
  c.transfer_cadence = 3;
  c.lp_dim = 8;
  c.lp_epochs = 10;
  c.lp_lr = 0.01;
  c.lp_batch = 64;
  return c;
}

}  // namespace

TEST_CASE("a full run writes every artifact and is reproducible byte for byte") {
  const auto dir = temp_dir("pipeline_det");
  const auto c = small_run(dir / "data");
  const auto r1 = run(c, dir / "run1");
  const auto r2 = run(c, dir / "run2");
  for (const char* f : {"run_report.json", "eval_report.json", "predictions.csv", "links.tsv", "loss_trace.csv",
                        "dangling_report.csv", "transfer_audit.jsonl", "config.cfg", "manifest.json"}) {
    INFO(f);
    REQUIRE(std::filesystem::exists(dir / "run1" / f));
    CHECK(read_text_file(dir / "run1" / f) == read_text_file(dir / "run2" / f));
  }
  CHECK(r1.to_json() == r2.to_json());
  REQUIRE(r1.recovery.has_value());
  CHECK(r1.seed_links == 40);
  CHECK(r1.added + r1.leakage <= r1.transferred);
}

TEST_CASE("the dangling scan starts from the input vectors before any training epoch") {
  const auto dir = temp_dir("pipeline_initial_scan");
  auto c = small_run(dir / "data", 32);
  auto ws = load_workspace(c);
  AlignmentModel model(align_config(ws->config), *ws->index, &*ws->features_a, &*ws->features_b);
  DanglingState expected_state;
  expected_state.alpha = c.alpha;
  expected_state.theta = c.theta;
  expected_state.tenure_limit = c.tenure_limit;
  const auto expected = dangling_condition(model.initial_embeddings(), *ws->index, expected_state);
  REQUIRE_FALSE(expected.empty());

  const auto outcome = run_alignment(*ws);
  std::set<VertexId> scanned;
  for (const auto& row : outcome.dangling_rows) {
    if (row.epoch != 0) continue;
    CHECK_FALSE(row.eliminated);
    CHECK(row.tenure == 1);
    scanned.insert(row.vertex);
  }
  CHECK(scanned == expected);

  c.de = false;
  auto ws_off = load_workspace(c);
  CHECK(run_alignment(*ws_off).dangling_rows.empty());
}

TEST_CASE("bootstrap seeding with a zero threshold reduces to the no-transfer baseline") {
  const auto dir = temp_dir("pipeline_gamma");
  auto c = small_run(dir / "data");
  c.seed_mode = SeedMode::Bootstrap;
  c.gamma_d = 0.0;
  const auto zero = run(c);
  CHECK(zero.seed_links == 0);
  CHECK(zero.inferred_links == 0);
  CHECK(zero.added == 0);

  auto base = c;
  base.seed_mode = SeedMode::File;
  base.kt = false;
  check_dependencies(base);
  const auto baseline = run(base);
  CHECK(zero.f1() == baseline.f1());
  CHECK(zero.train_pool == baseline.train_pool);
}

TEST_CASE("training pools round trip with graph-tagged endpoints") {
  const auto dir = temp_dir("pipeline_pool");
  auto c = small_run(dir / "data");
  auto ws = load_workspace(c);
  const auto align = run_alignment(*ws);
  const auto pool = build_train_pool(*ws, align.transferred);
  CHECK(pool.pool.size() == ws->split_a.train.size() + ws->split_b.train.size() + pool.enrich.added.size());
  for (const auto& t : pool.enrich.added) CHECK_FALSE(ws->held_out_keys.contains(t.key()));
  save_pool(dir / "pool.tsv", pool.pool, ws->a, ws->b);
  CHECK(load_pool(dir / "pool.tsv", ws->a, ws->b) == pool.pool);
}

TEST_CASE("a sweep runs one configuration per grid point") {
  const auto dir = temp_dir("pipeline_sweep");
  auto c = small_run(dir / "data");
  c.kt = false;
  c.lp_epochs = 2;
  check_dependencies(c);
  const SweepGrid grid{{"variant", {"transe", "distmult"}}, {"beta", {"1", "2"}}};
  const auto rows = sweep(c, grid);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].assignment == std::vector<std::pair<std::string, std::string>>{{"variant", "transe"}, {"beta", "1"}});
  CHECK(rows[3].report.config.variant == LpVariant::DistMult);
  const auto csv = sweep_to_csv(rows);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("missing inputs are reported with their error codes") {
  RunConfig c;
  c.graph_a = "/nonexistent/a.tsv";
  c.graph_b = "/nonexistent/b.tsv";
  try {
    run(c);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
  }
}
