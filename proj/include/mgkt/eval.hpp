#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mgkt/graph.hpp"
#include "mgkt/linkpred.hpp"
#include "mgkt/matrix.hpp"

namespace mgkt {

/// Each test triple followed by `rate` corruptions from `sampler`, whose
/// forbidden set should hold every known true triple (all splits).
std::vector<LabeledTriple> build_eval_set(std::span<const Triple> test, const NegativeSampler& sampler,
                                          std::size_t rate, std::uint64_t seed);

struct EvalReport {
  Confusion overall;
  std::array<Confusion, 2> per_relation;  // indexed by Direction
  std::array<Confusion, 2> per_graph;     // indexed by the metabolite's graph slot
  std::optional<double> hits_at_1;

  std::string to_json() const;
};

EvalReport evaluate(const LinkPredModel& model, const Thresholds& tau, std::span<const LabeledTriple> items,
                    const JointIndex& index);

/// Fraction of held-out links whose left vertex has its right vertex as the
/// nearest same-kind vertex of the other graph (ties to the lowest id).
double eval_alignment(const Matrix& embeddings, const JointIndex& index, const MetabolicGraph& b,
                      std::span<const InterLink> heldout);

}  // namespace mgkt
