#include "mgkt/transfer.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "mgkt/error.hpp"
#include "mgkt/nearest.hpp"

namespace mgkt {
namespace {

using Counterparts = std::multimap<VertexId, const InterLink*>;

Counterparts counterparts(std::span<const InterLink> inter) {
  Counterparts m;
  for (const auto& l : inter) {
    if (l.left.kind != l.right.kind || l.left.graph == l.right.graph) {
      throw Error(ErrorCode::InvalidArgument, "inter-link endpoints must share a kind and lie in different graphs");
    }
    m.emplace(l.left, &l);
    m.emplace(l.right, &l);
  }
  return m;
}

VertexId across(const InterLink& l, const VertexId& v) { return l.left == v ? l.right : l.left; }

struct Emitter {
  std::set<std::uint64_t> seen;
  std::vector<TransferredTriple> out;

  Emitter(std::span<const Triple> a, std::span<const Triple> b) {
    for (const auto& t : a) seen.insert(t.key());
    for (const auto& t : b) seen.insert(t.key());
  }

  void emit(const Triple& t, TransferRule rule, std::vector<InterLink> evidence, const Triple& source) {
    if (t.metabolite.kind != Kind::Metabolite || t.gene.kind != Kind::Gene) {
      throw Error(ErrorCode::InvalidGraph, "transfer produced a triple with wrong endpoint kinds");
    }
    if (!seen.insert(t.key()).second) return;
    out.push_back({t, rule, std::move(evidence), source, 0});
  }

  std::vector<TransferredTriple> finish() {
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.triple < y.triple; });
    return std::move(out);
  }
};

std::vector<const Triple*> sorted_sources(std::span<const Triple> a, std::span<const Triple> b) {
  std::vector<const Triple*> all;
  for (const auto& t : a) all.push_back(&t);
  for (const auto& t : b) all.push_back(&t);
  std::sort(all.begin(), all.end(), [](const Triple* x, const Triple* y) { return *x < *y; });
  return all;
}

}  // namespace

std::string_view to_string(TransferRule rule) noexcept { return rule == TransferRule::Cross ? "cross" : "within"; }

std::vector<InterLink> infer_inter_links(const Matrix& embeddings, const JointIndex& index, const MetabolicGraph& a,
                                         const MetabolicGraph& b, const DanglingState* dangling, double gamma_d,
                                         std::span<const InterLink> known) {
  auto links = mutual_nearest(embeddings, index, a, b, dangling ? &dangling->eliminated : nullptr, gamma_d);
  std::set<VertexId> linked;
  for (const auto& l : known) {
    linked.insert(l.left);
    linked.insert(l.right);
  }
  std::erase_if(links, [&](const InterLink& l) { return linked.contains(l.left) || linked.contains(l.right); });
  return links;
}

std::vector<TransferredTriple> transfer_cross(std::span<const InterLink> inter, std::span<const Triple> triples_a,
                                              std::span<const Triple> triples_b) {
  const auto map = counterparts(inter);
  Emitter emitter(triples_a, triples_b);
  for (const Triple* t : sorted_sources(triples_a, triples_b)) {
    for (auto [it, end] = map.equal_range(t->metabolite); it != end; ++it) {
      Triple swapped = *t;
      swapped.metabolite = across(*it->second, t->metabolite);
      emitter.emit(swapped, TransferRule::Cross, {*it->second}, *t);
    }
    for (auto [it, end] = map.equal_range(t->gene); it != end; ++it) {
      Triple swapped = *t;
      swapped.gene = across(*it->second, t->gene);
      emitter.emit(swapped, TransferRule::Cross, {*it->second}, *t);
    }
    // Swapping the second endpoint of an already swapped triple.
    for (auto [mi, mend] = map.equal_range(t->metabolite); mi != mend; ++mi) {
      for (auto [gi, gend] = map.equal_range(t->gene); gi != gend; ++gi) {
        Triple swapped = *t;
        swapped.metabolite = across(*mi->second, t->metabolite);
        swapped.gene = across(*gi->second, t->gene);
        emitter.emit(swapped, TransferRule::Cross, {*mi->second, *gi->second}, *t);
      }
    }
  }
  return emitter.finish();
}

std::vector<TransferredTriple> transfer_within(std::span<const InterLink> inter, std::span<const Triple> triples_a,
                                               std::span<const Triple> triples_b) {
  const auto map = counterparts(inter);
  Emitter emitter(triples_a, triples_b);
  for (const Triple* t : sorted_sources(triples_a, triples_b)) {
    for (auto [mi, mend] = map.equal_range(t->metabolite); mi != mend; ++mi) {
      for (auto [gi, gend] = map.equal_range(t->gene); gi != gend; ++gi) {
        Triple moved = *t;
        moved.metabolite = across(*mi->second, t->metabolite);
        moved.gene = across(*gi->second, t->gene);
        if (moved.metabolite.graph != moved.gene.graph) continue;
        emitter.emit(moved, TransferRule::Within, {*mi->second, *gi->second}, *t);
      }
    }
  }
  return emitter.finish();
}

EnrichResult enrich(std::vector<Triple>& train_pool, std::span<const TransferredTriple> transferred,
                    const std::unordered_set<std::uint64_t>& held_out) {
  std::unordered_set<std::uint64_t> present;
  for (const auto& t : train_pool) present.insert(t.key());
  EnrichResult result;
  for (const auto& tt : transferred) {
    const auto key = tt.triple.key();
    if (held_out.contains(key)) {
      result.leaked.push_back(tt.triple);
      continue;
    }
    if (!present.insert(key).second) continue;
    train_pool.push_back(tt.triple);
    result.added.push_back(tt.triple);
  }
  return result;
}

void append_transfer_audit(const std::filesystem::path& path, std::span<const TransferredTriple> transferred,
                           const MetabolicGraph& a, const MetabolicGraph& b) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  const auto label = [&](const VertexId& v) {
    const MetabolicGraph& g = v.graph == 0 ? a : b;
    return g.tag() + ":" + g.name(v);
  };
  const auto triple_json = [&](const Triple& t) {
    return nlohmann::json::array({label(t.metabolite), std::string(to_string(t.direction)), label(t.gene)});
  };
  for (const auto& tt : transferred) {
    nlohmann::json evidence = nlohmann::json::array();
    for (const auto& l : tt.evidence) evidence.push_back({label(l.left), label(l.right)});
    nlohmann::json rec = {{"iteration", tt.iteration},
                          {"rule", std::string(to_string(tt.rule))},
                          {"triple", triple_json(tt.triple)},
                          {"source", triple_json(tt.source)},
                          {"evidence", evidence}};
    out << rec.dump() << '\n';
  }
}

}  // namespace mgkt
