#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "mgkt/config.hpp"
#include "mgkt/dangling.hpp"
#include "mgkt/encoder.hpp"
#include "mgkt/eval.hpp"
#include "mgkt/features.hpp"
#include "mgkt/graph.hpp"
#include "mgkt/linkpred.hpp"
#include "mgkt/synth.hpp"
#include "mgkt/transfer.hpp"

namespace mgkt {

/// Loaded and split inputs of a run. Not movable: the index is referenced by models.
struct Workspace {
  RunConfig config;
  MetabolicGraph a{"A", 0};
  MetabolicGraph b{"B", 1};
  MetabolicGraph train_a{"A", 0};  // all vertices, training triples only
  MetabolicGraph train_b{"B", 1};
  std::unique_ptr<JointIndex> index;
  DataSplit split_a;
  DataSplit split_b;
  std::optional<FeatureTable> features_a;
  std::optional<FeatureTable> features_b;
  std::vector<InterLink> seed_links;
  std::vector<InterLink> heldout_links;
  std::optional<GroundTruth> truth;
  std::unordered_set<std::uint64_t> true_keys;      // every known triple
  std::unordered_set<std::uint64_t> held_out_keys;  // test + validation

  Workspace() = default;
  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;
};

/// Validates the config, loads graphs (and features/links as needed) and splits both graphs.
std::unique_ptr<Workspace> load_workspace(RunConfig config);

struct AlignmentOutcome {
  std::vector<InterLink> seeds;
  std::vector<InterLink> inferred;
  DanglingState dangling;
  double alpha = 0.0;
  Matrix embeddings;
  std::vector<AlignmentEpoch> trace;
  std::vector<DanglingReportRow> dangling_rows;
  std::vector<TransferredTriple> transferred;
};

/// Encoder settings of a run; the alignment RNG stream is derived from the master seed.
AlignConfig align_config(const RunConfig& config);

/// Interactive loop: with de on, an initial dangling scan of the input vectors
/// (epoch 0), then outer_iterations x (transfer_cadence alignment epochs, each
/// followed by a dangling update when de is on), then link inference and
/// triple transfer at the end of every iteration. Writes its side files into
/// `out` when given.
AlignmentOutcome run_alignment(Workspace& ws, const std::optional<std::filesystem::path>& out = std::nullopt);

/// Both transfer rules over the training triples of each graph, for the given links.
std::vector<TransferredTriple> transfer_triples(const Workspace& ws, std::span<const InterLink> links);

struct PoolOutcome {
  std::vector<Triple> pool;
  EnrichResult enrich;
};

/// Training triples of both graphs plus the transferred ones (leakage-guarded).
PoolOutcome build_train_pool(const Workspace& ws, std::span<const TransferredTriple> transferred);

/// Triple pools may mix graphs; endpoints are written as `A:id` / `B:id`.
void save_pool(const std::filesystem::path& path, std::span<const Triple> pool, const MetabolicGraph& a,
               const MetabolicGraph& b);
std::vector<Triple> load_pool(const std::filesystem::path& path, const MetabolicGraph& a, const MetabolicGraph& b);

/// Labeled validation or test items of both graphs, corruptions filtered against all splits.
std::vector<LabeledTriple> labeled_split(const Workspace& ws, bool test);

struct LinkPredOutcome {
  LpTrainResult train;
  EvalReport test;
};

LinkPredOutcome run_linkpred(const Workspace& ws, std::span<const Triple> pool, const Matrix* warm_start = nullptr,
                             const std::optional<std::filesystem::path>& out = std::nullopt);

struct RunReport {
  RunConfig config;
  std::size_t seed_links = 0;
  std::size_t inferred_links = 0;
  std::size_t eliminated = 0;
  double alpha = 0.0;
  std::optional<double> final_align_loss;
  std::size_t transferred = 0;
  std::size_t cross = 0;
  std::size_t within = 0;
  std::size_t added = 0;
  std::size_t leakage = 0;
  std::size_t train_pool = 0;
  int best_epoch = 0;
  double valid_f1 = 0.0;
  Thresholds tau;
  EvalReport test;
  std::optional<RecoveryReport> recovery;

  double f1() const noexcept { return test.overall.f1(); }
  std::string to_json() const;
};

/// Full run. With `out` set, every artifact (manifest, loss trace, dangling
/// report, links, audit log, checkpoints, predictions, reports) is written there.
RunReport run(const RunConfig& config, const std::optional<std::filesystem::path>& out = std::nullopt);

/// Manifest: resolved config plus git blob hashes of every input file.
void write_manifest(const std::filesystem::path& path, const RunConfig& config);

using SweepGrid = std::vector<std::pair<std::string, std::vector<std::string>>>;

struct SweepRow {
  std::vector<std::pair<std::string, std::string>> assignment;
  RunReport report;
};

/// Cartesian product over the grid; one run per point.
std::vector<SweepRow> sweep(const RunConfig& base, const SweepGrid& grid,
                            const std::optional<std::filesystem::path>& out = std::nullopt);
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

}  // namespace mgkt
