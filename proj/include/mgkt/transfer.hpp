#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <unordered_set>
#include <vector>

#include "mgkt/dangling.hpp"
#include "mgkt/graph.hpp"
#include "mgkt/matrix.hpp"

namespace mgkt {

enum class TransferRule : std::uint8_t { Cross = 1, Within = 2 };
std::string_view to_string(TransferRule rule) noexcept;

/// A derived triple with the links and the source triple that produced it.
struct TransferredTriple {
  Triple triple;
  TransferRule rule = TransferRule::Cross;
  std::vector<InterLink> evidence;
  Triple source;
  int iteration = 0;
};

struct TransferLedger {
  std::vector<InterLink> inferred;
  std::vector<TransferredTriple> transferred;
  double gamma_d = 0.4;
  std::size_t leakage = 0;
};

/// Mutual nearest neighbours (per kind, ties to the lowest id) closer than
/// gamma_d. Eliminated dangling vertices are removed from both pools first,
/// and pairs touching a vertex that already has a known link are dropped.
std::vector<InterLink> infer_inter_links(const Matrix& embeddings, const JointIndex& index, const MetabolicGraph& a,
                                         const MetabolicGraph& b, const DanglingState* dangling, double gamma_d,
                                         std::span<const InterLink> known = {});

/// Endpoint swap: a triple touching a linked vertex is re-emitted with that
/// endpoint replaced by its counterpart, giving a cross-graph triple. The swap
/// is closed under repetition, so a triple with both endpoints linked also
/// yields the fully swapped triple. Applied from both graphs; output excludes
/// input triples and is sorted.
std::vector<TransferredTriple> transfer_cross(std::span<const InterLink> inter, std::span<const Triple> triples_a,
                                              std::span<const Triple> triples_b);

/// Pair rule: a triple whose two endpoints are both linked is re-emitted in
/// the other graph between the counterparts. Output excludes input triples and is sorted.
std::vector<TransferredTriple> transfer_within(std::span<const InterLink> inter, std::span<const Triple> triples_a,
                                               std::span<const Triple> triples_b);

struct EnrichResult {
  std::vector<Triple> added;
  std::vector<Triple> leaked;
};

/// Appends transferred triples to the training pool. Triples whose key is in
/// `held_out` (test and validation) are withheld and reported as leakage;
/// triples already in the pool are skipped.
EnrichResult enrich(std::vector<Triple>& train_pool, std::span<const TransferredTriple> transferred,
                    const std::unordered_set<std::uint64_t>& held_out);

/// One JSON object per transferred triple.
void append_transfer_audit(const std::filesystem::path& path, std::span<const TransferredTriple> transferred,
                           const MetabolicGraph& a, const MetabolicGraph& b);

}  // namespace mgkt
