#include "mgkt/nearest.hpp"

#include "mgkt/error.hpp"
#include "mgkt/kernels.hpp"

namespace mgkt {

double manhattan(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimMismatch,
                "manhattan: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  return kernels::l1_distance(a, b);
}

std::vector<VertexId> pool(const JointIndex& index, std::uint8_t graph, Kind kind, const std::set<VertexId>* excluded) {
  std::vector<VertexId> out;
  const std::size_t n = index.count(graph, kind);
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const VertexId v{graph, kind, i};
    if (excluded && excluded->contains(v)) continue;
    out.push_back(v);
  }
  return out;
}

Matrix cross_distances(const Matrix& embeddings, const JointIndex& index, std::span<const VertexId> left,
                       std::span<const VertexId> right) {
  Matrix d(left.size(), right.size());
  const auto& ops = kernels::active();
  const std::size_t dim = embeddings.cols();
  for (std::size_t i = 0; i < left.size(); ++i) {
    const double* a = embeddings.row(index.row(left[i])).data();
    for (std::size_t j = 0; j < right.size(); ++j) {
      d(i, j) = ops.l1_distance(a, embeddings.row(index.row(right[j])).data(), dim);
    }
  }
  return d;
}

std::vector<long> nearest_by_row(const Matrix& distances, std::span<const std::string* const> column_names) {
  std::vector<long> out(distances.rows(), -1);
  for (std::size_t i = 0; i < distances.rows(); ++i) {
    long best = -1;
    for (std::size_t j = 0; j < distances.cols(); ++j) {
      if (best < 0) {
        best = static_cast<long>(j);
        continue;
      }
      const double dj = distances(i, j);
      const double db = distances(i, static_cast<std::size_t>(best));
      if (dj < db || (dj == db && *column_names[j] < *column_names[static_cast<std::size_t>(best)])) {
        best = static_cast<long>(j);
      }
    }
    out[i] = best;
  }
  return out;
}

std::vector<InterLink> mutual_nearest(const Matrix& embeddings, const JointIndex& index, const MetabolicGraph& a,
                                      const MetabolicGraph& b, const std::set<VertexId>* excluded, double threshold) {
  std::vector<InterLink> links;
  for (const Kind kind : kKinds) {
    const auto left = pool(index, 0, kind, excluded);
    const auto right = pool(index, 1, kind, excluded);
    if (left.empty() || right.empty()) continue;
    const Matrix d = cross_distances(embeddings, index, left, right);
    const Matrix dt = d.transposed();
    std::vector<const std::string*> left_names;
    std::vector<const std::string*> right_names;
    for (const auto& v : left) left_names.push_back(&a.name(v));
    for (const auto& v : right) right_names.push_back(&b.name(v));
    const auto nn_left = nearest_by_row(d, right_names);
    const auto nn_right = nearest_by_row(dt, left_names);
    for (std::size_t i = 0; i < left.size(); ++i) {
      const auto j = static_cast<std::size_t>(nn_left[i]);
      if (static_cast<std::size_t>(nn_right[j]) != i) continue;
      if (!(d(i, j) < threshold)) continue;
      links.push_back({left[i], right[j], Provenance::Inferred});
    }
  }
  return links;
}

Matrix l1_normalized(const Matrix& m) {
  Matrix out = m;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const double n = kernels::abs_sum(row);
    if (n > 0.0) {
      for (double& x : row) x /= n;
    }
  }
  return out;
}

}  // namespace mgkt
