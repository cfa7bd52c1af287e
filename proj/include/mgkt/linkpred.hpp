#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "mgkt/encoder.hpp"
#include "mgkt/graph.hpp"
#include "mgkt/matrix.hpp"

namespace mgkt {

enum class LpVariant : std::uint8_t { TransE = 0, RotatE = 1, DistMult = 2 };
std::string_view to_string(LpVariant v) noexcept;
std::optional<LpVariant> parse_variant(std::string_view name) noexcept;

/// Triple scorer over the rows of a JointIndex; lower scores mean more plausible.
///   TransE:   |m + r - g|_1
///   RotatE:   sum_k |m_k * exp(i phase_k) - g_k| over complex pairs (re, im) = (x[2k], x[2k+1])
///   DistMult: -sum_i m_i r_i g_i
struct LinkPredModel {
  LpVariant variant = LpVariant::TransE;
  Param vertex;    // rows x dim
  Param relation;  // 2 x dim (RotatE: 2 x dim/2 phases)
  double margin = 1.0;

  /// Vertex and translation entries are drawn from U(-init_scale, init_scale);
  /// RotatE phases from U(-pi, pi).
  static LinkPredModel init(LpVariant variant, std::size_t rows, std::size_t dim, double margin, std::uint64_t seed,
                            double init_scale = 1e-3);
  std::size_t dim() const noexcept { return vertex.value.cols(); }
  std::vector<Param*> parameters() { return {&vertex, &relation}; }
};

double score(const LinkPredModel& model, const Triple& t, const JointIndex& index);
/// Adds w * d score / d params into the gradient slots.
void score_backward(LinkPredModel& model, const Triple& t, const JointIndex& index, double w);

struct LpBatch {
  std::vector<Triple> positives;
  std::vector<Triple> negatives;  // negatives[i * per_positive + j] corrupts positives[i]
  std::size_t per_positive = 10;
};

/// Sum of max(0, f(pos) - f(neg) + margin); accumulates gradients when asked.
LossResult lp_loss(LinkPredModel& model, const LpBatch& batch, const JointIndex& index, bool with_gradients);

struct LabeledTriple {
  Triple triple;
  bool valid = false;
};

/// Per-relation classification thresholds: valid iff score <= tau[direction].
struct Thresholds {
  std::array<double, 2> tau{0.0, 0.0};
};

bool classify(const LinkPredModel& model, const Thresholds& tau, const Triple& t, const JointIndex& index);

/// Threshold maximising F1 over the scored items (ties: smallest threshold).
double best_threshold(std::span<const std::pair<double, bool>> scored);
/// Per-relation thresholds; a relation without positive items falls back to the pooled threshold.
Thresholds select_thresholds(const LinkPredModel& model, std::span<const LabeledTriple> items, const JointIndex& index);

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double precision() const noexcept;
  double recall() const noexcept;
  double f1() const noexcept;
  void add(bool predicted, bool actual) noexcept;
};

Confusion confusion(const LinkPredModel& model, const Thresholds& tau, std::span<const LabeledTriple> items,
                    const JointIndex& index);

struct LpConfig {
  LpVariant variant = LpVariant::TransE;
  std::size_t dim = 512;
  double learning_rate = 5e-4;
  double margin = 1.0;
  std::size_t negatives = 10;
  std::size_t epochs = 100;
  std::size_t batch_size = 256;
  std::size_t eval_every = 5;
  double init_scale = 1e-3;
  std::uint64_t seed = 1;
};

struct LpEpoch {
  int epoch;
  double loss;
  double valid_f1;  // NaN when not evaluated that epoch
};

struct LpTrainResult {
  LinkPredModel model;
  Thresholds tau;
  double valid_f1 = 0.0;
  int best_epoch = 0;
  std::vector<LpEpoch> trace;
};

/// Mini-batch margin training. Negatives avoid every triple in `train_pool`.
/// The returned model is the snapshot with the best validation F1.
/// `warm_start` (rows x dim) seeds the vertex table when given.
LpTrainResult train_lp(const MetabolicGraph& a, const MetabolicGraph& b, const JointIndex& index,
                       std::span<const Triple> train_pool, std::span<const LabeledTriple> valid, const LpConfig& config,
                       const Matrix* warm_start = nullptr);

void save_lp_checkpoint(const std::filesystem::path& path, const LinkPredModel& model, const Thresholds& tau);
std::pair<LinkPredModel, Thresholds> load_lp_checkpoint(const std::filesystem::path& path);

void write_predictions(const std::filesystem::path& path, const LinkPredModel& model, const Thresholds& tau,
                       std::span<const LabeledTriple> items, const JointIndex& index, const MetabolicGraph& a,
                       const MetabolicGraph& b);

}  // namespace mgkt
