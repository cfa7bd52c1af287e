#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <vector>

#include "mgkt/graph.hpp"
#include "mgkt/matrix.hpp"

namespace mgkt {

/// Manhattan distance; throws DimMismatch on unequal lengths.
double manhattan(std::span<const double> a, std::span<const double> b);

/// Rows of (graph, kind) in a JointIndex, skipping excluded vertices.
std::vector<VertexId> pool(const JointIndex& index, std::uint8_t graph, Kind kind,
                           const std::set<VertexId>* excluded = nullptr);

/// |left| x |right| Manhattan distance matrix between the given vertices' rows.
Matrix cross_distances(const Matrix& embeddings, const JointIndex& index, std::span<const VertexId> left,
                       std::span<const VertexId> right);

/// Nearest column per row of `distances`; ties resolved by the lowest name.
/// Returns -1 for every row when there are no columns.
std::vector<long> nearest_by_row(const Matrix& distances, std::span<const std::string* const> column_names);

/// Mutual nearest neighbours across the two graphs, per kind, with distance
/// strictly below `threshold`. Excluded vertices are removed from both pools.
std::vector<InterLink> mutual_nearest(const Matrix& embeddings, const JointIndex& index, const MetabolicGraph& a,
                                      const MetabolicGraph& b, const std::set<VertexId>* excluded, double threshold);

/// Scales every row to unit L1 norm (zero rows are left as they are).
Matrix l1_normalized(const Matrix& m);

}  // namespace mgkt
