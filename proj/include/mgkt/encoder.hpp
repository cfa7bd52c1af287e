#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "mgkt/adam.hpp"
#include "mgkt/features.hpp"
#include "mgkt/graph.hpp"
#include "mgkt/matrix.hpp"
#include "mgkt/rng.hpp"

namespace mgkt {

/// Symmetric weighted adjacency over the rows of a JointIndex, in CSR form.
/// Self-loops are not stored; the GCN adds them during normalisation.
struct WeightedAdjacency {
  std::vector<std::size_t> offsets{0};
  std::vector<std::uint32_t> cols;
  std::vector<double> weights;

  std::size_t rows() const noexcept { return offsets.size() - 1; }
  std::size_t nnz() const noexcept { return cols.size(); }

  /// Builds from undirected edges; parallel edges collapse keeping the minimum weight.
  static WeightedAdjacency from_edges(std::size_t n, std::span<const std::tuple<std::size_t, std::size_t, double>> edges);
};

/// Both graphs' triples as one adjacency. An edge's weight is the minimum of
/// its endpoints' vertex weights (1 when `vertex_weights` is empty).
WeightedAdjacency build_adjacency(const MetabolicGraph& a, const MetabolicGraph& b, const JointIndex& index,
                                  std::span<const double> vertex_weights = {});

/// Smooth rectifier used by the GCN layers: x * sigmoid(x).
double silu(double x) noexcept;
double silu_grad(double x) noexcept;
double sigmoid(double x) noexcept;

/// Â H with Â = D^-1/2 (A + I) D^-1/2 and D the weighted degree plus one.
Matrix propagate(const WeightedAdjacency& adj, const Matrix& h);

/// silu(Â H W).
Matrix gcn_forward(const Matrix& h, const WeightedAdjacency& adj, const Matrix& weight);

/// gate * v_agg + (1 - gate) * v_in, gate = sigmoid(v_in Θ + bias) elementwise.
Matrix highway_forward(const Matrix& v_in, const Matrix& v_agg, const Matrix& gate_weight, const Matrix& gate_bias);

struct AttentionReadout {
  Matrix readout;                   // [h, attention-pooled neighbours], N x 2D
  std::vector<double> coefficients; // one per CSR entry of the adjacency
};

/// Attention over neighbours: z = h Wg, logit(u,v) = leaky_relu(a_src.z_u + a_dst.z_v),
/// coefficient(u,v) proportional to weight(u,v) * exp(logit). Vertices without
/// positive-weight neighbours get a zero pooled vector.
AttentionReadout gat_readout(const Matrix& h, const WeightedAdjacency& adj, const Matrix& proj, const Matrix& attn_src,
                             const Matrix& attn_dst, double leaky_slope = 0.2);

struct EncoderParams {
  std::vector<Param> layer_weight;  // D x D per GCN layer
  std::vector<Param> gate_weight;   // D x D per layer
  std::vector<Param> gate_bias;     // 1 x D per layer
  Param attn_proj;                  // D x D
  Param attn_src;                   // 1 x D
  Param attn_dst;                   // 1 x D
  Param out_proj;                   // 2D x D, maps the readout back to D

  static EncoderParams init(std::size_t dim, std::size_t layers, Rng& rng);
  std::size_t layers() const noexcept { return layer_weight.size(); }
  std::size_t dim() const noexcept { return attn_proj.value.rows(); }
  std::vector<Param*> all();
  void zero_grad();
};

/// Activations kept by encode() for backpropagation.
struct EncoderTrace {
  std::vector<Matrix> layer_in;
  std::vector<Matrix> propagated;
  std::vector<Matrix> pre_activation;
  std::vector<Matrix> aggregated;
  std::vector<Matrix> gate;
  Matrix top;  // output of the GCN stack
  Matrix projected;
  std::vector<double> logits;  // pre-LeakyReLU, per CSR entry
  std::vector<double> coefficients;
  Matrix readout;
  Matrix output;  // before row normalisation
  std::vector<double> norms;
};

/// Full structure encoder: GCN + highway stack, attention readout, projection
/// to D, then each row scaled to unit L1 norm.
Matrix encode(const Matrix& x0, const WeightedAdjacency& adj, const EncoderParams& params, EncoderTrace* trace = nullptr,
              double leaky_slope = 0.2);

/// Accumulates parameter gradients for dLoss/dE and returns dLoss/dX0.
Matrix encode_backward(const Matrix& d_embeddings, const WeightedAdjacency& adj, EncoderParams& params,
                       const EncoderTrace& trace, double leaky_slope = 0.2);

struct AlignmentBatch {
  std::vector<InterLink> positives;
  std::vector<InterLink> negatives;  // negatives[i * per_positive + j] corrupts positives[i]
  std::size_t per_positive = 10;
  double margin = 5.0;
};

/// Draws `rate` negatives per positive by replacing one endpoint (coin flip)
/// with a different vertex of the same kind in that endpoint's graph.
AlignmentBatch sample_alignment_batch(std::span<const InterLink> positives, const JointIndex& index, std::size_t rate,
                                      double margin, Rng& rng);

struct LossResult {
  double loss = 0.0;
  std::size_t active_terms = 0;
};

/// Sum over (positive, negative) pairs of max(0, d(pos) - d(neg) + margin).
/// When d_embeddings is non-null its rows receive the subgradient.
LossResult alignment_loss(const AlignmentBatch& batch, const Matrix& embeddings, const JointIndex& index,
                          Matrix* d_embeddings);

double mean_link_distance(std::span<const InterLink> links, const Matrix& embeddings, const JointIndex& index);

struct AlignConfig {
  std::size_t dim = 512;
  std::size_t layers = 2;
  std::size_t modality_dim = 128;
  double learning_rate = 4e-4;
  double margin = 5.0;
  std::size_t negatives = 10;
  bool use_features = true;
  std::uint64_t seed = 1;
};

/// Trainable alignment state: input embeddings (fused features or a free
/// table), encoder parameters, optimiser and RNG.
class AlignmentModel {
 public:
  AlignmentModel(const AlignConfig& config, const JointIndex& index, const FeatureTable* features_a,
                 const FeatureTable* features_b);

  const AlignConfig& config() const noexcept { return config_; }
  int epoch() const noexcept { return epoch_; }

  /// Input vectors before structure encoding, rows scaled to unit L1 norm.
  Matrix initial_embeddings();
  Matrix embed(const WeightedAdjacency& adj);
  /// One full-batch optimisation step; returns the loss before the update.
  double train_epoch(std::span<const InterLink> positives, const WeightedAdjacency& adj);

  void save(const std::filesystem::path& path) const;
  void load(const std::filesystem::path& path);

  std::vector<Param*> parameters();

 private:
  Matrix inputs();

  AlignConfig config_;
  const JointIndex* index_;
  std::unique_ptr<FusionBatch> fusion_batch_;
  FusionParams fusion_;
  Param free_inputs_;
  EncoderParams encoder_;
  Adam adam_;
  Rng rng_;
  int epoch_ = 0;
};

struct AlignmentEpoch {
  int epoch;
  double loss;
  double mean_seed_distance;
};

void write_loss_trace(const std::filesystem::path& path, std::span<const AlignmentEpoch> trace);

}  // namespace mgkt
