#include "mgkt/dangling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "mgkt/error.hpp"
#include "mgkt/nearest.hpp"

namespace mgkt {
namespace {

// Marks own-graph vertices (rows of d) that are dangling with respect to the
// other graph (columns of d).
void scan_side(const Matrix& d, std::span<const VertexId> own, const DanglingState& state, std::set<VertexId>& out,
               std::map<VertexId, double>* nn_distance) {
  const std::size_t n_own = d.rows();
  const std::size_t n_other = d.cols();
  if (n_own == 0 || n_other == 0) return;
  // Protected iff at least one other-graph vertex ranks it within floor(theta * n_own).
  const auto k = static_cast<std::size_t>(std::floor(state.theta * static_cast<double>(n_own)));
  std::vector<bool> protected_(n_own, false);
  if (k > 0) {
    std::vector<double> column(n_own);
    for (std::size_t j = 0; j < n_other; ++j) {
      for (std::size_t i = 0; i < n_own; ++i) column[i] = d(i, j);
      if (k >= n_own) {
        std::fill(protected_.begin(), protected_.end(), true);
        break;
      }
      std::vector<double> sorted = column;
      std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end());
      const double kth = sorted[k - 1];
      for (std::size_t i = 0; i < n_own; ++i) {
        if (column[i] <= kth) protected_[i] = true;
      }
    }
  }
  for (std::size_t i = 0; i < n_own; ++i) {
    double nn = INFINITY;
    for (std::size_t j = 0; j < n_other; ++j) nn = std::min(nn, d(i, j));
    if (nn_distance) (*nn_distance)[own[i]] = nn;
    if (nn > state.alpha && !protected_[i]) out.insert(own[i]);
  }
}

}  // namespace

double DanglingState::weight(int tenure) const noexcept {
  if (tenure_limit <= 0) return 0.0;
  return std::clamp(1.0 - static_cast<double>(tenure) / tenure_limit, 0.0, 1.0);
}

double compute_alpha(const Matrix& initial_embeddings, std::span<const InterLink> seeds, const JointIndex& index,
                     AlphaMode mode, double fixed_alpha) {
  if (mode == AlphaMode::Fixed) return fixed_alpha;
  if (seeds.empty()) throw Error(ErrorCode::EmptyInput, "computed alpha needs at least one seed link");
  double alpha = 0.0;
  for (const auto& s : seeds) {
    alpha = std::max(alpha, manhattan(initial_embeddings.row(index.row(s.left)), initial_embeddings.row(index.row(s.right))));
  }
  return alpha;
}

std::set<VertexId> dangling_condition(const Matrix& embeddings, const JointIndex& index, const DanglingState& state,
                                      std::map<VertexId, double>* nn_distance) {
  std::set<VertexId> out;
  for (const Kind kind : kKinds) {
    const auto left = pool(index, 0, kind, &state.eliminated);
    const auto right = pool(index, 1, kind, &state.eliminated);
    const Matrix d = cross_distances(embeddings, index, left, right);
    scan_side(d, left, state, out, nn_distance);
    scan_side(d.transposed(), right, state, out, nn_distance);
  }
  return out;
}

DanglingState update_candidates(DanglingState state, const Matrix& embeddings, const JointIndex& index) {
  std::map<VertexId, double> nn;
  const auto satisfied = dangling_condition(embeddings, index, state, &nn);
  std::map<VertexId, int> next;
  for (const VertexId& v : satisfied) {
    const auto it = state.candidates.find(v);
    next[v] = it == state.candidates.end() ? 1 : it->second + 1;
  }
  state.candidates = std::move(next);
  state.nn_distance = std::move(nn);
  return state;
}

DanglingState finalize(DanglingState state) {
  for (auto it = state.candidates.begin(); it != state.candidates.end();) {
    if (it->second >= state.tenure_limit) {
      state.eliminated.insert(it->first);
      it = state.candidates.erase(it);
    } else {
      ++it;
    }
  }
  return state;
}

std::vector<double> vertex_weights(const DanglingState& state, const JointIndex& index) {
  std::vector<double> w(index.size(), 1.0);
  for (const auto& [v, tenure] : state.candidates) w[index.row(v)] = state.weight(tenure);
  for (const auto& v : state.eliminated) w[index.row(v)] = 0.0;
  return w;
}

WeightedAdjacency apply_downweights(const DanglingState& state, const MetabolicGraph& a, const MetabolicGraph& b,
                                   const JointIndex& index) {
  const auto w = vertex_weights(state, index);
  return build_adjacency(a, b, index, w);
}

std::vector<DanglingReportRow> dangling_report_rows(const DanglingState& state, int epoch) {
  std::vector<DanglingReportRow> rows;
  const auto nn_of = [&](const VertexId& v) {
    const auto it = state.nn_distance.find(v);
    return it == state.nn_distance.end() ? NAN : it->second;
  };
  for (const auto& [v, tenure] : state.candidates) rows.push_back({epoch, v, false, tenure, nn_of(v)});
  for (const auto& v : state.eliminated) rows.push_back({epoch, v, true, state.tenure_limit, nn_of(v)});
  std::stable_sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) { return x.vertex < y.vertex; });
  return rows;
}

void write_dangling_report(const std::filesystem::path& path, std::span<const DanglingReportRow> rows,
                           const MetabolicGraph& a, const MetabolicGraph& b) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.precision(10);
  out << "epoch,vertex_id,status,tenure,nn_distance\n";
  for (const auto& r : rows) {
    const MetabolicGraph& g = r.vertex.graph == 0 ? a : b;
    out << r.epoch << ',' << g.tag() << ':' << g.name(r.vertex) << ',' << (r.eliminated ? "eliminated" : "candidate")
        << ',' << r.tenure << ',';
    if (!std::isnan(r.nn_distance)) out << r.nn_distance;
    out << '\n';
  }
}

}  // namespace mgkt
