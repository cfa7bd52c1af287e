#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mgkt/graph.hpp"
#include "mgkt/matrix.hpp"

namespace mgkt {

/// Precomputed modality vectors of one vertex. `modality` is the SMILES
/// embedding for metabolites and the sequence embedding for genes.
struct FeatureBundle {
  std::vector<double> surface;
  std::vector<double> description;
  std::optional<std::vector<double>> modality;
};

struct FeatureDims {
  std::size_t surface = 0;
  std::size_t description = 0;
  std::size_t smiles = 0;
  std::size_t sequence = 0;

  std::size_t text() const noexcept { return surface + description; }
  bool operator==(const FeatureDims&) const = default;
};

/// Field tags of the feature file format.
enum class FeatureField : std::uint8_t { Surface = 1, Description = 2, Smiles = 3, Sequence = 4 };
std::string_view to_string(FeatureField field) noexcept;
std::optional<FeatureField> parse_feature_field(std::string_view name) noexcept;

struct FeatureRecord {
  std::string vertex_id;
  FeatureField field = FeatureField::Surface;
  std::vector<float> values;
};

/// Feature file I/O. Binary: a sequence of little-endian blocks
///   [id_len:u32][id bytes][field_tag:u8][dim:u32][float32 x dim]
/// TSV (selected by a .tsv/.txt extension): `id<TAB>field_name<TAB>v1 v2 ...`.
void write_feature_file(const std::filesystem::path& path, std::span<const FeatureRecord> records);
std::vector<FeatureRecord> read_feature_file(const std::filesystem::path& path);

/// Per-vertex bundles of one graph, indexed by VertexId.
class FeatureTable {
 public:
  FeatureTable() = default;
  FeatureTable(FeatureDims dims, std::size_t genes, std::size_t metabolites);

  const FeatureDims& dims() const noexcept { return dims_; }
  const FeatureBundle& at(VertexId v) const { return bundles_[static_cast<int>(v.kind)].at(v.index); }
  FeatureBundle& at(VertexId v) { return bundles_[static_cast<int>(v.kind)].at(v.index); }
  std::size_t count(Kind kind) const noexcept { return bundles_[static_cast<int>(kind)].size(); }

 private:
  FeatureDims dims_;
  std::array<std::vector<FeatureBundle>, 2> bundles_;
};

/// Resolves records against the vertices of `graph`. Surface and description
/// records apply to every vertex carrying the id; SMILES only to metabolites,
/// sequences only to genes. Unknown ids are skipped with a warning.
FeatureTable load_features(const std::filesystem::path& path, const MetabolicGraph& graph);
FeatureTable build_feature_table(std::span<const FeatureRecord> records, const MetabolicGraph& graph);

/// Trainable projections: smiles (ds x p), sequence (dq x p) and the shared
/// layer ((surface + description + p) x out). Row-vector convention: y = x W.
struct FusionParams {
  Param smiles_proj;
  Param sequence_proj;
  Param shared_proj;

  std::size_t projected_dim() const noexcept { return shared_proj.value.rows() - text_dim; }
  std::size_t out_dim() const noexcept { return shared_proj.value.cols(); }
  std::size_t text_dim = 0;

  /// Entries uniform in +-1/sqrt(fan_in).
  static FusionParams init(const FeatureDims& dims, std::size_t projected_dim, std::size_t out_dim, Rng& rng);
  std::vector<Param*> all() { return {&smiles_proj, &sequence_proj, &shared_proj}; }
  void zero_grad();
};

/// shared_proj applied to [surface, description, proj(modality)]; an absent
/// modality contributes the zero vector.
std::vector<double> fuse(const FeatureBundle& bundle, Kind kind, const FusionParams& params);

/// Per-vertex uniform init in +-1/sqrt(dim), rows ordered genes then metabolites.
Matrix random_init(const MetabolicGraph& graph, std::size_t dim, std::uint64_t seed);
Matrix random_init(std::size_t rows, std::size_t dim, std::uint64_t seed);

/// Fusion over every row of a JointIndex, caching inputs for backprop.
class FusionBatch {
 public:
  FusionBatch(const FeatureTable& a, const FeatureTable& b, const JointIndex& index);

  Matrix forward(const FusionParams& params);
  /// Accumulates parameter gradients given dLoss/dOutput.
  void backward(const Matrix& d_out, FusionParams& params) const;

  const FeatureDims& dims() const noexcept { return dims_; }

 private:
  FeatureDims dims_;
  Matrix text_;                        // N x (surface + description)
  Matrix smiles_;                      // rows with a SMILES vector
  Matrix sequence_;                    // rows with a sequence vector
  std::vector<std::size_t> smiles_rows_;
  std::vector<std::size_t> sequence_rows_;
  Matrix concat_;                      // N x (text + p), cached by forward
};

}  // namespace mgkt
