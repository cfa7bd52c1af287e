#include "mgkt/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include <json.hpp>

#include "mgkt/error.hpp"

namespace mgkt {
namespace {

std::string padded(char prefix_kind, char prefix_graph, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%c%05zu", prefix_kind, prefix_graph, i);
  return buf;
}

std::size_t round_count(double x) { return static_cast<std::size_t>(std::llround(x)); }

std::vector<double> gaussian(std::size_t n, double shift, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal() + shift;
  return v;
}

void emit_features(std::vector<FeatureRecord>& out, const std::string& id, Kind kind, const std::vector<double>& latent,
                   const SynthSpec& spec, double noise, bool with_modality, Rng& rng) {
  std::vector<float> values(latent.size());
  for (std::size_t i = 0; i < latent.size(); ++i) values[i] = static_cast<float>(latent[i] + noise * rng.normal());
  const auto slice = [&](std::size_t from, std::size_t n) {
    return std::vector<float>(values.begin() + static_cast<std::ptrdiff_t>(from),
                              values.begin() + static_cast<std::ptrdiff_t>(from + n));
  };
  out.push_back({id, FeatureField::Surface, slice(0, spec.surface_dim)});
  out.push_back({id, FeatureField::Description, slice(spec.surface_dim, spec.description_dim)});
  if (with_modality) {
    const std::size_t from = spec.surface_dim + spec.description_dim;
    if (kind == Kind::Metabolite) {
      out.push_back({id, FeatureField::Smiles, slice(from, spec.smiles_dim)});
    } else {
      out.push_back({id, FeatureField::Sequence, slice(from, spec.sequence_dim)});
    }
  }
}

nlohmann::json link_json(const NamedLink& l) { return {std::string(to_string(l.kind)), l.left, l.right}; }

NamedLink link_from_json(const nlohmann::json& j) {
  const auto kind = j.at(0).get<std::string>();
  if (kind != "gene" && kind != "metabolite") throw Error(ErrorCode::TruthMismatch, "unknown kind " + kind);
  return {kind == "gene" ? Kind::Gene : Kind::Metabolite, j.at(1).get<std::string>(), j.at(2).get<std::string>()};
}

double ratio(std::size_t hits, std::size_t total) {
  return total == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(total);
}

double precision_of(std::size_t hits, std::size_t predicted, std::size_t truth_size) {
  if (predicted == 0) return truth_size == 0 ? 1.0 : 0.0;
  return static_cast<double>(hits) / static_cast<double>(predicted);
}

}  // namespace

void SynthSpec::validate() const {
  for (const double p : {p_hide_intra, p_hide_inter, p_dangling, p_in_module, p_missing_modality}) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::ConfigInvalid, "synth probabilities must lie in [0, 1]");
  }
  if (n_genes < 2 || n_metabolites < 2) throw Error(ErrorCode::ConfigInvalid, "synth needs at least 2 vertices per kind");
  if (n_modules < 1) throw Error(ErrorCode::ConfigInvalid, "synth needs at least one module");
  if (feature_noise < 0.0) throw Error(ErrorCode::ConfigInvalid, "feature noise must be non-negative");
  if (surface_dim < 1 || description_dim < 1 || smiles_dim < 1 || sequence_dim < 1) {
    throw Error(ErrorCode::ConfigInvalid, "synth feature dims must be >= 1");
  }
  if (!(edge_density > 0.0 && edge_density <= 1.0)) throw Error(ErrorCode::ConfigInvalid, "edge density must lie in (0, 1]");
}

SynthInstance generate(const SynthSpec& spec) {
  spec.validate();
  const std::size_t ng = spec.n_genes;
  const std::size_t nm = spec.n_metabolites;
  const std::size_t n_triples = round_count(spec.edge_density * static_cast<double>(ng * nm));
  if (n_triples == 0) throw Error(ErrorCode::EmptyGraph, "edge density yields an empty graph");

  SynthInstance inst;
  Rng topo(derive_seed(spec.seed, "synth.topology"));
  for (std::size_t i = 0; i < ng; ++i) inst.a.add_vertex(Kind::Gene, padded('g', 'a', i));
  for (std::size_t i = 0; i < nm; ++i) inst.a.add_vertex(Kind::Metabolite, padded('m', 'a', i));

  // Planted-partition triples: vertex i belongs to module i % n_modules.
  const std::size_t modules = spec.n_modules;
  std::vector<std::vector<std::uint32_t>> genes_in(modules);
  for (std::size_t i = 0; i < ng; ++i) genes_in[i % modules].push_back(static_cast<std::uint32_t>(i));
  std::set<std::pair<std::uint32_t, std::uint32_t>> pairs;
  std::vector<Triple> triples_a;
  const auto draw_gene = [&](std::uint32_t m) {
    const auto& local = genes_in[m % modules];
    if (topo.uniform() < spec.p_in_module && !local.empty()) return local[topo.uniform_index(local.size())];
    return static_cast<std::uint32_t>(topo.uniform_index(ng));
  };
  const auto place = [&](std::uint32_t m, std::uint32_t g) {
    if (!pairs.emplace(m, g).second) return false;
    const Direction d = topo.coin() ? Direction::Right : Direction::Left;
    const Triple t{{0, Kind::Metabolite, m}, d, {0, Kind::Gene, g}};
    inst.a.add_triple(t);
    triples_a.push_back(t);
    return true;
  };
  // Cover pass: every vertex needs a triple, since graph files list triples only.
  std::vector<bool> gene_used(ng, false);
  for (std::uint32_t m = 0; m < nm; ++m) {
    const std::uint32_t g = draw_gene(m);
    place(m, g);
    gene_used[g] = true;
  }
  for (std::uint32_t g = 0; g < ng; ++g) {
    if (gene_used[g]) continue;
    std::uint32_t m = static_cast<std::uint32_t>(topo.uniform_index(nm));
    if (topo.uniform() < spec.p_in_module) {
      const std::size_t in_module = (nm + modules - 1 - g % modules) / modules;
      if (in_module > 0) m = static_cast<std::uint32_t>(g % modules + modules * topo.uniform_index(in_module));
    }
    place(m, g);
  }
  if (triples_a.size() > n_triples) {
    throw Error(ErrorCode::ConfigInvalid, "edge density too low to give every vertex a triple");
  }
  const std::size_t budget = 100 * n_triples + 10000;
  for (std::size_t attempt = 0; triples_a.size() < n_triples; ++attempt) {
    if (attempt > budget) throw Error(ErrorCode::ConfigInvalid, "edge density too high to sample distinct triples");
    const auto m = static_cast<std::uint32_t>(topo.uniform_index(nm));
    place(m, draw_gene(m));
  }

  // Graph B: a shuffled renaming plus dangling vertices.
  const double total = static_cast<double>(ng + nm);
  const auto n_dangling = static_cast<std::size_t>(std::ceil(spec.p_dangling * total - 1e-9));
  const std::size_t dangling_genes = round_count(static_cast<double>(n_dangling) * static_cast<double>(ng) / total);
  const std::size_t dangling_mets = n_dangling - dangling_genes;
  std::array<std::vector<std::uint32_t>, 2> rename;  // A index (then dangling) -> B index
  for (const Kind kind : kKinds) {
    const std::size_t n = (kind == Kind::Gene ? ng + dangling_genes : nm + dangling_mets);
    auto& perm = rename[static_cast<int>(kind)];
    perm.resize(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<std::uint32_t>(i);
    shuffle(perm.begin(), perm.end(), topo);
    for (std::size_t i = 0; i < n; ++i) inst.b.add_vertex(kind, padded(kind == Kind::Gene ? 'g' : 'm', 'b', i));
  }
  const auto to_b = [&](const VertexId& v) {
    return VertexId{1, v.kind, rename[static_cast<int>(v.kind)][v.index]};
  };

  std::vector<std::size_t> order(triples_a.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  shuffle(order.begin(), order.end(), topo);
  const std::size_t n_hidden = round_count(spec.p_hide_intra * static_cast<double>(triples_a.size()));
  // Hidden triples never strip a vertex of its last triple in B.
  std::vector<bool> hidden(triples_a.size(), false);
  std::array<std::vector<std::size_t>, 2> degree_left{std::vector<std::size_t>(nm, 0), std::vector<std::size_t>(ng, 0)};
  for (const Triple& t : triples_a) {
    ++degree_left[0][t.metabolite.index];
    ++degree_left[1][t.gene.index];
  }
  std::size_t hidden_count = 0;
  for (std::size_t k = 0; k < order.size() && hidden_count < n_hidden; ++k) {
    const Triple& t = triples_a[order[k]];
    if (degree_left[0][t.metabolite.index] < 2 || degree_left[1][t.gene.index] < 2) continue;
    --degree_left[0][t.metabolite.index];
    --degree_left[1][t.gene.index];
    hidden[order[k]] = true;
    ++hidden_count;
  }
  for (std::size_t i = 0; i < triples_a.size(); ++i) {
    const Triple& t = triples_a[i];
    const Triple tb{to_b(t.metabolite), t.direction, to_b(t.gene)};
    if (hidden[i]) {
      inst.truth.hidden_triples.push_back({inst.b.name(tb.metabolite), t.direction, inst.b.name(tb.gene)});
    } else {
      inst.b.add_triple(tb);
    }
  }

  // Dangling vertices get about the average degree of their kind in A.
  for (const Kind kind : kKinds) {
    const std::size_t own = kind == Kind::Gene ? ng : nm;
    const std::size_t extra = kind == Kind::Gene ? dangling_genes : dangling_mets;
    const std::size_t degree = std::max<std::size_t>(1, round_count(static_cast<double>(n_triples) / static_cast<double>(own)));
    const std::size_t partners = inst.b.count(other(kind));
    for (std::size_t j = 0; j < extra; ++j) {
      const VertexId v{1, kind, rename[static_cast<int>(kind)][own + j]};
      inst.truth.planted_danglings.emplace_back(kind, inst.b.name(v));
      std::size_t placed = 0;
      for (std::size_t attempt = 0; placed < std::min(degree, partners) && attempt < 100 * degree; ++attempt) {
        const VertexId u{1, other(kind), static_cast<std::uint32_t>(topo.uniform_index(partners))};
        const Direction d = topo.coin() ? Direction::Right : Direction::Left;
        const Triple t = kind == Kind::Gene ? Triple{u, d, v} : Triple{v, d, u};
        if (inst.b.add_triple(t)) ++placed;
      }
    }
  }

  // Alignment ground truth and the exported seed subset.
  std::vector<InterLink> aligned;
  for (const Kind kind : kKinds) {
    const std::size_t own = kind == Kind::Gene ? ng : nm;
    for (std::uint32_t i = 0; i < own; ++i) {
      const VertexId va{0, kind, i};
      aligned.push_back({va, to_b(va), Provenance::Seed});
      inst.truth.true_inter.push_back({kind, inst.a.name(va), inst.b.name(to_b(va))});
    }
  }
  Rng link_rng(derive_seed(spec.seed, "synth.links"));
  shuffle(aligned.begin(), aligned.end(), link_rng);
  const std::size_t n_seeds = round_count((1.0 - spec.p_hide_inter) * static_cast<double>(aligned.size()));
  inst.seeds.assign(aligned.begin(), aligned.begin() + static_cast<std::ptrdiff_t>(n_seeds));
  inst.heldout.assign(aligned.begin() + static_cast<std::ptrdiff_t>(n_seeds), aligned.end());
  std::sort(inst.seeds.begin(), inst.seeds.end());
  std::sort(inst.heldout.begin(), inst.heldout.end());
  for (const auto& s : inst.seeds) inst.truth.seeds.push_back({s.left.kind, inst.a.name(s.left), inst.b.name(s.right)});

  // Features: aligned pairs share an offset latent; danglings draw fresh unshifted ones.
  Rng feat(derive_seed(spec.seed, "synth.features"));
  const auto latent_dim = [&](Kind kind) {
    return spec.surface_dim + spec.description_dim + (kind == Kind::Gene ? spec.sequence_dim : spec.smiles_dim);
  };
  std::array<std::vector<std::vector<double>>, 2> latent_b;
  for (const Kind kind : kKinds) latent_b[static_cast<int>(kind)].resize(inst.b.count(kind));
  for (const Kind kind : kKinds) {
    for (const VertexId& va : inst.a.vertices(kind)) {
      const auto latent = gaussian(latent_dim(kind), spec.shared_offset, feat);
      emit_features(inst.features_a, inst.a.name(va), kind, latent, spec, spec.feature_noise,
                    feat.uniform() >= spec.p_missing_modality, feat);
      latent_b[static_cast<int>(kind)][to_b(va).index] = latent;
    }
    const std::size_t own = kind == Kind::Gene ? ng : nm;
    const std::size_t extra = kind == Kind::Gene ? dangling_genes : dangling_mets;
    for (std::size_t j = 0; j < extra; ++j) {
      latent_b[static_cast<int>(kind)][rename[static_cast<int>(kind)][own + j]] =
          gaussian(latent_dim(kind), 0.0, feat);
    }
  }
  for (const Kind kind : kKinds) {
    for (const VertexId& vb : inst.b.vertices(kind)) {
      emit_features(inst.features_b, inst.b.name(vb), kind, latent_b[static_cast<int>(kind)][vb.index], spec,
                    spec.feature_noise, feat.uniform() >= spec.p_missing_modality, feat);
    }
  }
  return inst;
}

SynthPaths SynthPaths::in(const std::filesystem::path& dir) {
  return {dir / "graph_a.tsv", dir / "graph_b.tsv", dir / "features_a.bin", dir / "features_b.bin",
          dir / "seeds.tsv",   dir / "heldout_links.tsv", dir / "truth.json"};
}

SynthPaths write_instance(const SynthInstance& instance, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const SynthPaths p = SynthPaths::in(dir);
  save_graph(instance.a, p.graph_a);
  save_graph(instance.b, p.graph_b);
  write_feature_file(p.features_a, instance.features_a);
  write_feature_file(p.features_b, instance.features_b);
  save_links(instance.seeds, instance.a, instance.b, p.seeds);
  save_links(instance.heldout, instance.a, instance.b, p.heldout);
  std::ofstream out(p.truth);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + p.truth.string());
  out << truth_to_json(instance.truth);
  return p;
}

std::string truth_to_json(const GroundTruth& truth) {
  nlohmann::json j;
  j["true_inter"] = nlohmann::json::array();
  for (const auto& l : truth.true_inter) j["true_inter"].push_back(link_json(l));
  j["seeds"] = nlohmann::json::array();
  for (const auto& l : truth.seeds) j["seeds"].push_back(link_json(l));
  j["planted_danglings"] = nlohmann::json::array();
  for (const auto& [kind, name] : truth.planted_danglings) j["planted_danglings"].push_back({std::string(to_string(kind)), name});
  j["hidden_triples"] = nlohmann::json::array();
  for (const auto& t : truth.hidden_triples) {
    j["hidden_triples"].push_back({t.metabolite, std::string(to_string(t.direction)), t.gene});
  }
  return j.dump(1) + "\n";
}

GroundTruth load_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  GroundTruth t;
  try {
    const auto j = nlohmann::json::parse(in);
    for (const auto& l : j.at("true_inter")) t.true_inter.push_back(link_from_json(l));
    for (const auto& l : j.at("seeds")) t.seeds.push_back(link_from_json(l));
    for (const auto& d : j.at("planted_danglings")) {
      const auto kind = d.at(0).get<std::string>();
      t.planted_danglings.emplace_back(kind == "gene" ? Kind::Gene : Kind::Metabolite, d.at(1).get<std::string>());
    }
    for (const auto& h : j.at("hidden_triples")) {
      const auto dir = parse_direction(h.at(1).get<std::string>());
      if (!dir) throw Error(ErrorCode::TruthMismatch, "bad direction in truth file");
      t.hidden_triples.push_back({h.at(0).get<std::string>(), *dir, h.at(2).get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::TruthMismatch, std::string("malformed truth file: ") + e.what());
  }
  return t;
}

std::string RecoveryReport::to_json() const {
  nlohmann::json j = {{"inter_precision", inter_precision},
                      {"inter_recall", inter_recall},
                      {"inferred", inferred},
                      {"dangling_precision", dangling_precision},
                      {"dangling_recall", dangling_recall},
                      {"eliminated", eliminated},
                      {"hidden_recall", hidden_recall},
                      {"hidden", hidden}};
  return j.dump(2) + "\n";
}

RecoveryReport score_recovery(std::span<const InterLink> inferred, const std::set<VertexId>& eliminated,
                              std::span<const TransferredTriple> transferred, const GroundTruth& truth,
                              const MetabolicGraph& a, const MetabolicGraph& b) {
  const auto resolve = [](const MetabolicGraph& g, Kind kind, const std::string& name) {
    const auto v = g.find(kind, name);
    if (!v) throw Error(ErrorCode::TruthMismatch, "truth names unknown " + std::string(to_string(kind)) + " " + name);
    return *v;
  };
  std::set<std::pair<VertexId, VertexId>> true_pairs;
  for (const auto& l : truth.true_inter) true_pairs.emplace(resolve(a, l.kind, l.left), resolve(b, l.kind, l.right));
  std::set<std::pair<VertexId, VertexId>> seed_pairs;
  for (const auto& l : truth.seeds) seed_pairs.emplace(resolve(a, l.kind, l.left), resolve(b, l.kind, l.right));
  std::set<VertexId> planted;
  for (const auto& [kind, name] : truth.planted_danglings) planted.insert(resolve(b, kind, name));
  std::set<std::uint64_t> hidden;
  for (const auto& h : truth.hidden_triples) {
    hidden.insert(Triple{resolve(b, Kind::Metabolite, h.metabolite), h.direction, resolve(b, Kind::Gene, h.gene)}.key());
  }

  RecoveryReport r;
  r.inferred = inferred.size();
  std::size_t correct = 0;
  for (const auto& l : inferred) correct += true_pairs.contains({l.left, l.right}) ? 1 : 0;
  std::size_t discoverable = 0;
  for (const auto& p : true_pairs) discoverable += seed_pairs.contains(p) ? 0 : 1;
  r.inter_precision = precision_of(correct, inferred.size(), discoverable);
  r.inter_recall = ratio(correct, discoverable);

  r.eliminated = eliminated.size();
  std::size_t found = 0;
  for (const auto& v : eliminated) found += planted.contains(v) ? 1 : 0;
  r.dangling_precision = precision_of(found, eliminated.size(), planted.size());
  r.dangling_recall = ratio(found, planted.size());

  r.hidden = hidden.size();
  std::set<std::uint64_t> recovered;
  for (const auto& t : transferred) {
    if (hidden.contains(t.triple.key())) recovered.insert(t.triple.key());
  }
  r.hidden_recall = ratio(recovered.size(), hidden.size());
  return r;
}

}  // namespace mgkt
