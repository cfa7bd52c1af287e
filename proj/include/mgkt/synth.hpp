#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mgkt/features.hpp"
#include "mgkt/graph.hpp"
#include "mgkt/transfer.hpp"

namespace mgkt {

/// Generator settings for a pair of related graphs. Graph A is a
/// planted-partition bipartite graph: vertices fall into `n_modules` groups
/// and each triple joins a same-module pair with probability `p_in_module`.
/// Graph B is a renamed copy of A with triples hidden and dangling vertices added.
struct SynthSpec {
  std::size_t n_genes = 150;
  std::size_t n_metabolites = 150;
  double edge_density = 0.04;
  double p_hide_intra = 0.3;
  double p_hide_inter = 0.5;
  double p_dangling = 0.1;
  double feature_noise = 0.1;
  std::size_t n_modules = 10;
  double p_in_module = 0.8;
  double shared_offset = 1.0;  // added to every latent coordinate of aligned vertices; danglings lack it
  double p_missing_modality = 0.0;
  std::size_t surface_dim = 32;
  std::size_t description_dim = 32;
  std::size_t smiles_dim = 32;
  std::size_t sequence_dim = 32;
  std::uint64_t seed = 1;

  void validate() const;
};

struct NamedLink {
  Kind kind;
  std::string left;
  std::string right;
};

struct NamedTriple {
  std::string metabolite;
  Direction direction;
  std::string gene;
};

struct GroundTruth {
  std::vector<NamedLink> true_inter;  // every aligned pair
  std::vector<NamedLink> seeds;       // the exported subset
  std::vector<std::pair<Kind, std::string>> planted_danglings;  // in graph B
  std::vector<NamedTriple> hidden_triples;                      // true in A, absent from B (B names)
};

struct SynthInstance {
  MetabolicGraph a{"A", 0};
  MetabolicGraph b{"B", 1};
  std::vector<FeatureRecord> features_a;
  std::vector<FeatureRecord> features_b;
  std::vector<InterLink> seeds;
  std::vector<InterLink> heldout;
  GroundTruth truth;
};

SynthInstance generate(const SynthSpec& spec);

struct SynthPaths {
  std::filesystem::path graph_a, graph_b, features_a, features_b, seeds, heldout, truth;
  static SynthPaths in(const std::filesystem::path& dir);
};

/// Writes graphs, binary feature files, link files and truth.json into `dir`.
SynthPaths write_instance(const SynthInstance& instance, const std::filesystem::path& dir);

std::string truth_to_json(const GroundTruth& truth);
GroundTruth load_truth(const std::filesystem::path& path);

struct RecoveryReport {
  double inter_precision = 0.0;
  double inter_recall = 0.0;  // over true pairs that were not seeds
  std::size_t inferred = 0;
  double dangling_precision = 0.0;
  double dangling_recall = 0.0;
  std::size_t eliminated = 0;
  double hidden_recall = 0.0;  // hidden B triples among transferred triples
  std::size_t hidden = 0;

  std::string to_json() const;
};

RecoveryReport score_recovery(std::span<const InterLink> inferred, const std::set<VertexId>& eliminated,
                              std::span<const TransferredTriple> transferred, const GroundTruth& truth,
                              const MetabolicGraph& a, const MetabolicGraph& b);

}  // namespace mgkt
