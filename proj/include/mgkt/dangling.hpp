#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "mgkt/encoder.hpp"
#include "mgkt/graph.hpp"
#include "mgkt/matrix.hpp"

namespace mgkt {

enum class AlphaMode { Fixed, Computed };

struct DanglingState {
  std::map<VertexId, int> candidates;  // vertex -> consecutive epochs satisfying the condition
  std::set<VertexId> eliminated;
  std::map<VertexId, double> nn_distance;  // cross-graph NN distance from the latest update
  double alpha = 0.7;
  double theta = 0.8;
  int tenure_limit = 5;

  /// Linear decay 1 - tenure / limit, clamped to [0, 1].
  double weight(int tenure) const noexcept;
};

/// Largest seed-pair distance over the initial embeddings; `Fixed` mode returns `fixed_alpha`.
double compute_alpha(const Matrix& initial_embeddings, std::span<const InterLink> seeds, const JointIndex& index,
                     AlphaMode mode = AlphaMode::Computed, double fixed_alpha = 0.7);

/// Vertices currently satisfying the dangling condition, per kind and over
/// non-eliminated vertices: the cross-graph NN is farther than alpha, and for
/// every vertex v' of the other graph, 1 + |{u in own graph : d(u,v') < d(v,v')}|
/// exceeds theta * |own graph pool|. Also reports each pool vertex's NN distance.
std::set<VertexId> dangling_condition(const Matrix& embeddings, const JointIndex& index, const DanglingState& state,
                                      std::map<VertexId, double>* nn_distance = nullptr);

/// Tenure bookkeeping: members still satisfying the condition gain one epoch,
/// new members start at 1, members that stop satisfying it leave.
DanglingState update_candidates(DanglingState state, const Matrix& embeddings, const JointIndex& index);

/// Moves candidates with tenure >= limit to the eliminated set.
DanglingState finalize(DanglingState state);

/// Per-row vertex weights: candidates weight(tenure), eliminated 0, others 1.
std::vector<double> vertex_weights(const DanglingState& state, const JointIndex& index);

/// Adjacency with every edge weighted by the smaller of its endpoints' vertex weights.
WeightedAdjacency apply_downweights(const DanglingState& state, const MetabolicGraph& a, const MetabolicGraph& b,
                                   const JointIndex& index);

struct DanglingReportRow {
  int epoch;
  VertexId vertex;
  bool eliminated;
  int tenure;
  double nn_distance;
};

/// Rows for the current state, candidates and eliminated vertices in VertexId order.
std::vector<DanglingReportRow> dangling_report_rows(const DanglingState& state, int epoch);
void write_dangling_report(const std::filesystem::path& path, std::span<const DanglingReportRow> rows,
                           const MetabolicGraph& a, const MetabolicGraph& b);

}  // namespace mgkt
