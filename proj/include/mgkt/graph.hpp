#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mgkt/rng.hpp"

namespace mgkt {

enum class Kind : std::uint8_t { Gene = 0, Metabolite = 1 };
enum class Direction : std::uint8_t { Left = 0, Right = 1 };

inline constexpr std::array<Kind, 2> kKinds{Kind::Gene, Kind::Metabolite};
inline constexpr std::array<Direction, 2> kDirections{Direction::Left, Direction::Right};

std::string_view to_string(Kind kind) noexcept;
std::string_view to_string(Direction direction) noexcept;
std::optional<Direction> parse_direction(std::string_view token) noexcept;

inline constexpr Kind other(Kind kind) noexcept {
  return kind == Kind::Gene ? Kind::Metabolite : Kind::Gene;
}

/// Handle to a vertex: the graph slot (0 or 1 in a graph pair), its kind and
/// its dense position within (graph, kind). The string identifier lives in
/// the owning MetabolicGraph.
struct VertexId {
  std::uint8_t graph = 0;
  Kind kind = Kind::Gene;
  std::uint32_t index = 0;

  auto operator<=>(const VertexId&) const = default;
};

struct VertexIdHash {
  std::size_t operator()(const VertexId& v) const noexcept {
    return (static_cast<std::size_t>(v.graph) << 40) ^ (static_cast<std::size_t>(v.kind) << 32) ^ v.index;
  }
};

/// (metabolite, direction, gene). Triples stored in a MetabolicGraph are
/// intra-graph; transferred cross-graph triples may mix graph slots.
struct Triple {
  VertexId metabolite;
  Direction direction = Direction::Left;
  VertexId gene;

  auto operator<=>(const Triple&) const = default;

  bool cross_graph() const noexcept { return metabolite.graph != gene.graph; }
  std::uint64_t key() const noexcept;
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const noexcept { return std::hash<std::uint64_t>{}(t.key()); }
};

using TripleSet = std::unordered_set<Triple, TripleHash>;

struct Neighbor {
  VertexId vertex;
  Direction direction = Direction::Left;
  double weight = 1.0;
};

class MetabolicGraph {
 public:
  explicit MetabolicGraph(std::string tag = "A", std::uint8_t slot = 0);

  const std::string& tag() const noexcept { return tag_; }
  std::uint8_t slot() const noexcept { return slot_; }

  /// Returns the existing handle when the identifier is already known.
  VertexId add_vertex(Kind kind, std::string_view local_id);
  std::optional<VertexId> find(Kind kind, std::string_view local_id) const;
  bool has_vertex(VertexId v) const noexcept;
  const std::string& name(VertexId v) const;

  std::size_t count(Kind kind) const noexcept { return names_[static_cast<int>(kind)].size(); }
  std::size_t num_genes() const noexcept { return count(Kind::Gene); }
  std::size_t num_metabolites() const noexcept { return count(Kind::Metabolite); }
  std::size_t num_vertices() const noexcept { return num_genes() + num_metabolites(); }
  std::vector<VertexId> vertices(Kind kind) const;

  /// Inserts the triple unless it is already present (returns false then).
  /// Kinds are not enforced here; validate_bipartite reports violations.
  bool add_triple(const Triple& t);
  bool contains(const Triple& t) const noexcept { return keys_.contains(t.key()); }
  std::span<const Triple> triples() const noexcept { return triples_; }
  std::size_t num_triples() const noexcept { return triples_.size(); }

  /// Symmetric closure of the triples with unit weights.
  std::span<const Neighbor> neighbors(VertexId v) const;

  Triple make_triple(std::string_view metabolite, Direction d, std::string_view gene) const;

 private:
  std::string tag_;
  std::uint8_t slot_;
  std::array<std::vector<std::string>, 2> names_;
  std::array<std::unordered_map<std::string, std::uint32_t>, 2> lookup_;
  std::array<std::vector<std::vector<Neighbor>>, 2> adjacency_;
  std::vector<Triple> triples_;
  std::unordered_set<std::uint64_t> keys_;
};

/// Reads the three-column TSV triple format: metabolite<TAB>direction<TAB>gene,
/// direction in {left, right}, '#' lines are comments. Duplicates collapse.
MetabolicGraph load_graph(const std::filesystem::path& path, std::string tag, std::uint8_t slot = 0);
void save_graph(const MetabolicGraph& graph, const std::filesystem::path& path);
void save_triples(const MetabolicGraph& graph, std::span<const Triple> triples,
                  const std::filesystem::path& path);
/// Reads triples against the vertex sets of an existing graph.
std::vector<Triple> load_triples(const MetabolicGraph& graph, const std::filesystem::path& path);

enum class ViolationKind { WrongKind, MissingVertex, CrossGraph };
std::string_view to_string(ViolationKind kind) noexcept;

struct Violation {
  ViolationKind kind;
  std::size_t triple_index;
  std::string detail;
};

std::vector<Violation> validate_bipartite(const MetabolicGraph& graph);

/// Declared vertex kinds, read from `id<TAB>gene|metabolite` lines. An id may
/// be declared with both kinds.
using KindTable = std::unordered_map<std::string, std::array<bool, 2>>;
KindTable load_kinds(const std::filesystem::path& path);

/// Checks each triple's endpoints against the declarations: an undeclared id
/// is MissingVertex, an id declared only with the other kind is WrongKind.
std::vector<Violation> validate_declared_kinds(const MetabolicGraph& graph, const KindTable& kinds);
/// One JSON object per violation, newline-terminated.
std::string violations_to_json_lines(std::span<const Violation> violations);

struct DataSplit {
  std::vector<Triple> train;
  std::vector<Triple> test;
  std::vector<Triple> valid;
  std::uint64_t seed = 0;
};

/// Largest-remainder sizes for n items; ties go to the earlier bucket.
std::array<std::size_t, 3> split_sizes(std::size_t n, const std::array<double, 3>& ratios);

DataSplit split_triples(const MetabolicGraph& graph, const std::array<double, 3>& ratios,
                        std::uint64_t seed);

/// Corrupts either endpoint of triples against a set of forbidden keys.
/// Replacement vertices are drawn from the graph owning the replaced endpoint.
class NegativeSampler {
 public:
  NegativeSampler(std::vector<const MetabolicGraph*> graphs, std::unordered_set<std::uint64_t> forbidden);

  std::vector<Triple> sample(const Triple& positive, std::size_t rate, Rng& rng) const;
  bool forbidden(const Triple& t) const noexcept { return forbidden_.contains(t.key()); }

 private:
  const MetabolicGraph& owner(const VertexId& v) const;

  std::vector<const MetabolicGraph*> graphs_;
  std::unordered_set<std::uint64_t> forbidden_;
};

/// `rate` corruptions of t, none of which is a triple of g.
std::vector<Triple> sample_negatives(const MetabolicGraph& graph, const Triple& t, std::size_t rate, Rng& rng);

enum class Provenance { Seed, Inferred };
std::string_view to_string(Provenance p) noexcept;

/// Cross-graph equivalence; left lives in graph slot 0, right in slot 1.
struct InterLink {
  VertexId left;
  VertexId right;
  Provenance provenance = Provenance::Seed;

  bool operator==(const InterLink& o) const noexcept { return left == o.left && right == o.right; }
  auto operator<=>(const InterLink& o) const noexcept {
    if (auto c = left <=> o.left; c != 0) return c;
    return right <=> o.right;
  }
};

/// Reads `left_id<TAB>right_id[<TAB>seed|inferred]`. Each pair must resolve to
/// the same kind in both graphs.
std::vector<InterLink> load_links(const std::filesystem::path& path, const MetabolicGraph& left,
                                  const MetabolicGraph& right, Provenance default_provenance = Provenance::Seed);
void save_links(std::span<const InterLink> links, const MetabolicGraph& left, const MetabolicGraph& right,
                const std::filesystem::path& path, bool with_provenance = false);

/// Row layout of both graphs in one matrix: [A genes, A metabolites, B genes, B metabolites].
class JointIndex {
 public:
  JointIndex(const MetabolicGraph& a, const MetabolicGraph& b);

  std::size_t size() const noexcept { return total_; }
  std::size_t offset(std::uint8_t graph, Kind kind) const noexcept { return offsets_[graph * 2 + static_cast<int>(kind)]; }
  std::size_t count(std::uint8_t graph, Kind kind) const noexcept { return counts_[graph * 2 + static_cast<int>(kind)]; }
  std::size_t row(VertexId v) const noexcept { return offset(v.graph, v.kind) + v.index; }
  VertexId vertex(std::size_t row) const noexcept;

 private:
  std::array<std::size_t, 4> offsets_{};
  std::array<std::size_t, 4> counts_{};
  std::size_t total_ = 0;
};

}  // namespace mgkt
