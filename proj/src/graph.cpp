#include "mgkt/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "mgkt/error.hpp"
#include "mgkt/log.hpp"

namespace mgkt {
namespace {

int k(Kind kind) { return static_cast<int>(kind); }

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

bool skippable(std::string_view line) {
  return line.empty() || line.front() == '#';
}

std::string json_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (const char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return in;
}

}  // namespace

std::string_view to_string(Kind kind) noexcept { return kind == Kind::Gene ? "gene" : "metabolite"; }

std::string_view to_string(Direction direction) noexcept {
  return direction == Direction::Left ? "left" : "right";
}

std::optional<Direction> parse_direction(std::string_view token) noexcept {
  if (token == "left") return Direction::Left;
  if (token == "right") return Direction::Right;
  return std::nullopt;
}

std::uint64_t Triple::key() const noexcept {
  constexpr std::uint64_t mask = (1ULL << 29) - 1;
  return (static_cast<std::uint64_t>(metabolite.graph & 1) << 63) |
         (static_cast<std::uint64_t>(gene.graph & 1) << 62) |
         (static_cast<std::uint64_t>(direction) << 61) |
         (static_cast<std::uint64_t>(metabolite.kind) << 60) |
         (static_cast<std::uint64_t>(gene.kind) << 59) |
         ((static_cast<std::uint64_t>(metabolite.index) & mask) << 29) |
         (static_cast<std::uint64_t>(gene.index) & mask);
}

MetabolicGraph::MetabolicGraph(std::string tag, std::uint8_t slot) : tag_(std::move(tag)), slot_(slot) {}

VertexId MetabolicGraph::add_vertex(Kind kind, std::string_view local_id) {
  auto& lookup = lookup_[k(kind)];
  if (auto it = lookup.find(std::string(local_id)); it != lookup.end()) {
    return VertexId{slot_, kind, it->second};
  }
  const auto index = static_cast<std::uint32_t>(names_[k(kind)].size());
  names_[k(kind)].emplace_back(local_id);
  lookup.emplace(std::string(local_id), index);
  adjacency_[k(kind)].emplace_back();
  return VertexId{slot_, kind, index};
}

std::optional<VertexId> MetabolicGraph::find(Kind kind, std::string_view local_id) const {
  const auto& lookup = lookup_[k(kind)];
  if (auto it = lookup.find(std::string(local_id)); it != lookup.end()) return VertexId{slot_, kind, it->second};
  return std::nullopt;
}

bool MetabolicGraph::has_vertex(VertexId v) const noexcept {
  return v.graph == slot_ && v.index < names_[k(v.kind)].size();
}

const std::string& MetabolicGraph::name(VertexId v) const {
  if (!has_vertex(v)) throw Error(ErrorCode::MissingVertex, "vertex not in graph " + tag_);
  return names_[k(v.kind)][v.index];
}

std::vector<VertexId> MetabolicGraph::vertices(Kind kind) const {
  std::vector<VertexId> out;
  out.reserve(count(kind));
  for (std::uint32_t i = 0; i < count(kind); ++i) out.push_back(VertexId{slot_, kind, i});
  return out;
}

bool MetabolicGraph::add_triple(const Triple& t) {
  if (!keys_.insert(t.key()).second) return false;
  triples_.push_back(t);
  if (has_vertex(t.metabolite) && has_vertex(t.gene)) {
    adjacency_[k(t.metabolite.kind)][t.metabolite.index].push_back(Neighbor{t.gene, t.direction, 1.0});
    adjacency_[k(t.gene.kind)][t.gene.index].push_back(Neighbor{t.metabolite, t.direction, 1.0});
  }
  return true;
}

std::span<const Neighbor> MetabolicGraph::neighbors(VertexId v) const {
  if (!has_vertex(v)) throw Error(ErrorCode::MissingVertex, "vertex not in graph " + tag_);
  return adjacency_[k(v.kind)][v.index];
}

Triple MetabolicGraph::make_triple(std::string_view metabolite, Direction d, std::string_view gene) const {
  const auto m = find(Kind::Metabolite, metabolite);
  const auto g = find(Kind::Gene, gene);
  if (!m) throw Error(ErrorCode::MissingVertex, "unknown metabolite " + std::string(metabolite));
  if (!g) throw Error(ErrorCode::MissingVertex, "unknown gene " + std::string(gene));
  return Triple{*m, d, *g};
}

MetabolicGraph load_graph(const std::filesystem::path& path, std::string tag, std::uint8_t slot) {
  auto in = open_input(path);
  MetabolicGraph graph(std::move(tag), slot);
  std::string raw;
  std::size_t line_no = 0;
  std::size_t duplicates = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = strip_cr(raw);
    if (skippable(line)) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 3 || fields[0].empty() || fields[2].empty()) {
      throw Error(ErrorCode::MalformedLine,
                  path.string() + ":" + std::to_string(line_no) + ": expected metabolite<TAB>direction<TAB>gene");
    }
    const auto dir = parse_direction(fields[1]);
    if (!dir) {
      throw Error(ErrorCode::BadDirection, path.string() + ":" + std::to_string(line_no) + ": direction '" +
                                               std::string(fields[1]) + "' is not left|right");
    }
    const VertexId m = graph.add_vertex(Kind::Metabolite, fields[0]);
    const VertexId g = graph.add_vertex(Kind::Gene, fields[2]);
    if (!graph.add_triple(Triple{m, *dir, g})) ++duplicates;
  }
  if (graph.num_triples() == 0) throw Error(ErrorCode::EmptyGraph, path.string() + " holds no triples");
  if (duplicates > 0) {
    log::warn(path.string() + ": collapsed " + std::to_string(duplicates) + " duplicate triple(s)");
  }
  const auto violations = validate_bipartite(graph);
  if (!violations.empty()) throw Error(ErrorCode::InvalidGraph, violations.front().detail);
  return graph;
}

void save_triples(const MetabolicGraph& graph, std::span<const Triple> triples, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "# metabolite\tdirection\tgene\n";
  for (const Triple& t : triples) {
    out << graph.name(t.metabolite) << '\t' << to_string(t.direction) << '\t' << graph.name(t.gene) << '\n';
  }
}

void save_graph(const MetabolicGraph& graph, const std::filesystem::path& path) {
  save_triples(graph, graph.triples(), path);
}

std::vector<Triple> load_triples(const MetabolicGraph& graph, const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<Triple> out;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = strip_cr(raw);
    if (skippable(line)) continue;
    const auto fields = split_tabs(line);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (fields.size() != 3) throw Error(ErrorCode::MalformedLine, where + ": expected 3 fields");
    const auto dir = parse_direction(fields[1]);
    if (!dir) throw Error(ErrorCode::BadDirection, where + ": bad direction");
    out.push_back(graph.make_triple(fields[0], *dir, fields[2]));
  }
  return out;
}

std::string_view to_string(ViolationKind kind) noexcept {
  switch (kind) {
    case ViolationKind::WrongKind: return "WrongKind";
    case ViolationKind::MissingVertex: return "MissingVertex";
    case ViolationKind::CrossGraph: return "CrossGraph";
  }
  return "Unknown";
}

std::vector<Violation> validate_bipartite(const MetabolicGraph& graph) {
  std::vector<Violation> out;
  const auto describe = [&](const VertexId& v) {
    if (graph.has_vertex(v)) return std::string(to_string(v.kind)) + ":" + graph.name(v);
    return std::string(to_string(v.kind)) + "#" + std::to_string(v.index) + "@" + std::to_string(v.graph);
  };
  const auto triples = graph.triples();
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const Triple& t = triples[i];
    const std::string text =
        "(" + describe(t.metabolite) + ", " + std::string(to_string(t.direction)) + ", " + describe(t.gene) + ")";
    if (t.metabolite.graph != graph.slot() || t.gene.graph != graph.slot()) {
      out.push_back({ViolationKind::CrossGraph, i, "triple " + text + " leaves graph " + graph.tag()});
      continue;
    }
    if (t.metabolite.kind != Kind::Metabolite || t.gene.kind != Kind::Gene) {
      out.push_back({ViolationKind::WrongKind, i, "triple " + text + " does not join a metabolite to a gene"});
      continue;
    }
    if (!graph.has_vertex(t.metabolite) || !graph.has_vertex(t.gene)) {
      out.push_back({ViolationKind::MissingVertex, i, "triple " + text + " references an unknown vertex"});
    }
  }
  return out;
}

KindTable load_kinds(const std::filesystem::path& path) {
  auto in = open_input(path);
  KindTable table;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = strip_cr(raw);
    if (skippable(line)) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 2 || fields[0].empty() || (fields[1] != "gene" && fields[1] != "metabolite")) {
      throw Error(ErrorCode::MalformedLine,
                  path.string() + ":" + std::to_string(line_no) + ": expected id<TAB>gene|metabolite");
    }
    const Kind kind = fields[1] == "gene" ? Kind::Gene : Kind::Metabolite;
    table[std::string(fields[0])][static_cast<int>(kind)] = true;
  }
  return table;
}

std::vector<Violation> validate_declared_kinds(const MetabolicGraph& graph, const KindTable& kinds) {
  std::vector<Violation> out;
  const auto triples = graph.triples();
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const Triple& t = triples[i];
    const std::string text = "(" + graph.name(t.metabolite) + ", " + std::string(to_string(t.direction)) + ", " +
                             graph.name(t.gene) + ")";
    for (const VertexId& v : {t.metabolite, t.gene}) {
      const auto it = kinds.find(graph.name(v));
      if (it == kinds.end()) {
        out.push_back({ViolationKind::MissingVertex, i, "triple " + text + " references undeclared id " + graph.name(v)});
        break;
      }
      if (!it->second[static_cast<int>(v.kind)]) {
        out.push_back({ViolationKind::WrongKind, i,
                       "triple " + text + " uses " + graph.name(v) + " as a " + std::string(to_string(v.kind)) +
                           " but it is declared a " + std::string(to_string(other(v.kind)))});
        break;
      }
    }
  }
  return out;
}

std::string violations_to_json_lines(std::span<const Violation> violations) {
  std::ostringstream out;
  for (const Violation& v : violations) {
    out << "{\"violation\":\"" << to_string(v.kind) << "\",\"triple_index\":" << v.triple_index
        << ",\"detail\":\"" << json_escape(v.detail) << "\"}\n";
  }
  return out.str();
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const std::array<double, 3>& ratios) {
  const double total = ratios[0] + ratios[1] + ratios[2];
  if (std::fabs(total - 1.0) > 1e-9 || std::any_of(ratios.begin(), ratios.end(), [](double r) { return r < 0.0; })) {
    throw Error(ErrorCode::BadRatios, "split ratios must be non-negative and sum to 1");
  }
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = ratios[i] * static_cast<double>(n);
    sizes[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    remainder[i] = exact - static_cast<double>(sizes[i]);
    assigned += sizes[i];
  }
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return remainder[a] > remainder[b] + 1e-12; });
  for (std::size_t r = 0; assigned < n; ++r, ++assigned) ++sizes[order[r % 3]];
  return sizes;
}

DataSplit split_triples(const MetabolicGraph& graph, const std::array<double, 3>& ratios, std::uint64_t seed) {
  if (graph.num_triples() < 3) throw Error(ErrorCode::TooFewTriples, "need at least 3 triples to split");
  const auto sizes = split_sizes(graph.num_triples(), ratios);
  std::vector<Triple> shuffled(graph.triples().begin(), graph.triples().end());
  Rng rng(seed);
  shuffle(shuffled.begin(), shuffled.end(), rng);
  DataSplit split;
  split.seed = seed;
  auto it = shuffled.begin();
  split.train.assign(it, it + static_cast<std::ptrdiff_t>(sizes[0]));
  it += static_cast<std::ptrdiff_t>(sizes[0]);
  split.test.assign(it, it + static_cast<std::ptrdiff_t>(sizes[1]));
  it += static_cast<std::ptrdiff_t>(sizes[1]);
  split.valid.assign(it, shuffled.end());
  return split;
}

NegativeSampler::NegativeSampler(std::vector<const MetabolicGraph*> graphs, std::unordered_set<std::uint64_t> forbidden)
    : graphs_(std::move(graphs)), forbidden_(std::move(forbidden)) {}

const MetabolicGraph& NegativeSampler::owner(const VertexId& v) const {
  for (const MetabolicGraph* g : graphs_) {
    if (g->slot() == v.graph) return *g;
  }
  throw Error(ErrorCode::MissingVertex, "no graph owns slot " + std::to_string(v.graph));
}

std::vector<Triple> NegativeSampler::sample(const Triple& positive, std::size_t rate, Rng& rng) const {
  const std::size_t genes = owner(positive.gene).num_genes();
  const std::size_t metabolites = owner(positive.metabolite).num_metabolites();
  std::vector<Triple> out;
  out.reserve(rate);
  if (genes < 2 && metabolites < 2) {
    throw Error(ErrorCode::Exhausted, "no alternative vertex on either side to corrupt");
  }
  const std::size_t budget = 100 * rate + 100;
  std::size_t attempts = 0;
  while (out.size() < rate) {
    if (++attempts > budget) {
      throw Error(ErrorCode::Exhausted, "could not find enough non-colliding corruptions");
    }
    Triple t = positive;
    const bool gene_side = rng.coin();
    if (gene_side) {
      if (genes < 2) continue;
      // Offset draw over the other genes keeps the replacement distinct.
      const auto r = static_cast<std::uint32_t>(rng.uniform_index(genes - 1));
      t.gene.index = r >= positive.gene.index ? r + 1 : r;
    } else {
      if (metabolites < 2) continue;
      const auto r = static_cast<std::uint32_t>(rng.uniform_index(metabolites - 1));
      t.metabolite.index = r >= positive.metabolite.index ? r + 1 : r;
    }
    if (forbidden(t)) continue;
    out.push_back(t);
  }
  return out;
}

std::vector<Triple> sample_negatives(const MetabolicGraph& graph, const Triple& t, std::size_t rate, Rng& rng) {
  if (rate < 1) throw Error(ErrorCode::InvalidArgument, "negative sampling rate must be >= 1");
  std::unordered_set<std::uint64_t> keys;
  keys.reserve(graph.num_triples());
  for (const Triple& x : graph.triples()) keys.insert(x.key());
  const NegativeSampler sampler({&graph}, std::move(keys));
  return sampler.sample(t, rate, rng);
}

std::string_view to_string(Provenance p) noexcept { return p == Provenance::Seed ? "seed" : "inferred"; }

std::vector<InterLink> load_links(const std::filesystem::path& path, const MetabolicGraph& left,
                                  const MetabolicGraph& right, Provenance default_provenance) {
  auto in = open_input(path);
  std::vector<InterLink> out;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = strip_cr(raw);
    if (skippable(line)) continue;
    const auto fields = split_tabs(line);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (fields.size() < 2 || fields.size() > 3) throw Error(ErrorCode::MalformedLine, where + ": expected left<TAB>right");
    Provenance provenance = default_provenance;
    if (fields.size() == 3) {
      if (fields[2] == "seed") {
        provenance = Provenance::Seed;
      } else if (fields[2] == "inferred") {
        provenance = Provenance::Inferred;
      } else {
        throw Error(ErrorCode::MalformedLine, where + ": provenance must be seed|inferred");
      }
    }
    std::optional<InterLink> found;
    int matches = 0;
    for (const Kind kind : kKinds) {
      const auto l = left.find(kind, fields[0]);
      const auto r = right.find(kind, fields[1]);
      if (l && r) {
        found = InterLink{*l, *r, provenance};
        ++matches;
      }
    }
    if (matches == 0) {
      throw Error(ErrorCode::MissingVertex, where + ": link endpoints do not resolve to one kind in both graphs");
    }
    if (matches > 1) throw Error(ErrorCode::MalformedLine, where + ": link endpoints are ambiguous between kinds");
    out.push_back(*found);
  }
  return out;
}

void save_links(std::span<const InterLink> links, const MetabolicGraph& left, const MetabolicGraph& right,
                const std::filesystem::path& path, bool with_provenance) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << "# left_id\tright_id" << (with_provenance ? "\tprovenance" : "") << '\n';
  for (const InterLink& l : links) {
    out << left.name(l.left) << '\t' << right.name(l.right);
    if (with_provenance) out << '\t' << to_string(l.provenance);
    out << '\n';
  }
}

JointIndex::JointIndex(const MetabolicGraph& a, const MetabolicGraph& b) {
  counts_ = {a.num_genes(), a.num_metabolites(), b.num_genes(), b.num_metabolites()};
  std::size_t running = 0;
  for (int i = 0; i < 4; ++i) {
    offsets_[i] = running;
    running += counts_[i];
  }
  total_ = running;
}

VertexId JointIndex::vertex(std::size_t row) const noexcept {
  int block = 3;
  while (block > 0 && row < offsets_[block]) --block;
  return VertexId{static_cast<std::uint8_t>(block / 2), static_cast<Kind>(block % 2),
                  static_cast<std::uint32_t>(row - offsets_[block])};
}

}  // namespace mgkt
