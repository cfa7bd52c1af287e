#include "mgkt/eval.hpp"

#include <json.hpp>

#include "mgkt/error.hpp"
#include "mgkt/nearest.hpp"

namespace mgkt {
namespace {

nlohmann::json confusion_json(const Confusion& c) {
  return {{"precision", c.precision()}, {"recall", c.recall()}, {"f1", c.f1()},
          {"tp", c.tp},                {"fp", c.fp},           {"tn", c.tn}, {"fn", c.fn}};
}

}  // namespace

std::vector<LabeledTriple> build_eval_set(std::span<const Triple> test, const NegativeSampler& sampler,
                                          std::size_t rate, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LabeledTriple> items;
  items.reserve(test.size() * (rate + 1));
  for (const Triple& t : test) {
    items.push_back({t, true});
    for (const Triple& n : sampler.sample(t, rate, rng)) items.push_back({n, false});
  }
  return items;
}

std::string EvalReport::to_json() const {
  nlohmann::json j = confusion_json(overall);
  j["per_relation"] = {{"left", confusion_json(per_relation[0])}, {"right", confusion_json(per_relation[1])}};
  j["per_graph"] = {{"A", confusion_json(per_graph[0])}, {"B", confusion_json(per_graph[1])}};
  if (hits_at_1) j["alignment_hits_at_1"] = *hits_at_1;
  return j.dump(2) + "\n";
}

EvalReport evaluate(const LinkPredModel& model, const Thresholds& tau, std::span<const LabeledTriple> items,
                    const JointIndex& index) {
  if (items.empty()) throw Error(ErrorCode::EmptyInput, "evaluation set is empty");
  EvalReport r;
  for (const auto& it : items) {
    const bool predicted = classify(model, tau, it.triple, index);
    r.overall.add(predicted, it.valid);
    r.per_relation[static_cast<std::size_t>(it.triple.direction)].add(predicted, it.valid);
    r.per_graph[it.triple.metabolite.graph == 0 ? 0 : 1].add(predicted, it.valid);
  }
  return r;
}

double eval_alignment(const Matrix& embeddings, const JointIndex& index, const MetabolicGraph& b,
                      std::span<const InterLink> heldout) {
  if (heldout.empty()) throw Error(ErrorCode::EmptyInput, "no held-out links to evaluate");
  std::size_t hits = 0;
  for (const Kind kind : kKinds) {
    std::vector<VertexId> queries;
    std::vector<VertexId> answers;
    for (const auto& l : heldout) {
      if (l.left.kind != kind) continue;
      queries.push_back(l.left);
      answers.push_back(l.right);
    }
    if (queries.empty()) continue;
    const auto candidates = pool(index, 1, kind);
    std::vector<const std::string*> names;
    for (const auto& v : candidates) names.push_back(&b.name(v));
    const Matrix d = cross_distances(embeddings, index, queries, candidates);
    const auto nn = nearest_by_row(d, names);
    for (std::size_t i = 0; i < queries.size(); ++i) {
      if (nn[i] >= 0 && candidates[static_cast<std::size_t>(nn[i])] == answers[i]) ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(heldout.size());
}

}  // namespace mgkt
