#include "mgkt/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>

#include "mgkt/error.hpp"

namespace mgkt {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) throw Error(ErrorCode::ConfigInvalid, key + ": not a number: '" + v + "'");
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw Error(ErrorCode::ConfigInvalid, key + ": not a non-negative integer: '" + v + "'");
  }
  return out;
}

double probability(const std::string& key, const std::string& v) {
  const double p = to_double(key, v);
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::ConfigInvalid, key + " must lie in [0, 1]");
  return p;
}

double positive(const std::string& key, const std::string& v) {
  const double p = to_double(key, v);
  if (!(p > 0.0)) throw Error(ErrorCode::ConfigInvalid, key + " must be positive");
  return p;
}

std::size_t at_least_one(const std::string& key, const std::string& v) {
  const auto n = to_uint(key, v);
  if (n < 1) throw Error(ErrorCode::ConfigInvalid, key + " must be >= 1");
  return n;
}

std::string on_off(bool b) { return b ? "on" : "off"; }

template <typename Member>
ConfigKey path_key(std::string name, std::string help, Member member) {
  return {std::move(name), std::move(help),
          [member](RunConfig& c, const std::string& v) { c.*member = v; },
          [member](const RunConfig& c) { return (c.*member).string(); }, true};
}

template <typename Member>
ConfigKey flag_key(std::string name, std::string help, Member member) {
  return {std::move(name), std::move(help), [member](RunConfig& c, const std::string& v) { c.*member = parse_bool(v); },
          [member](const RunConfig& c) { return on_off(c.*member); }};
}

template <typename Member>
ConfigKey count_key(std::string name, std::string help, Member member) {
  const std::string key = name;
  return {std::move(name), std::move(help),
          [member, key](RunConfig& c, const std::string& v) { c.*member = at_least_one(key, v); },
          [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

template <typename Member>
ConfigKey positive_key(std::string name, std::string help, Member member) {
  const std::string key = name;
  return {std::move(name), std::move(help),
          [member, key](RunConfig& c, const std::string& v) { c.*member = positive(key, v); },
          [member](const RunConfig& c) { return format_double(c.*member); }};
}

std::vector<ConfigKey> make_keys() {
  std::vector<ConfigKey> k;
  k.push_back(path_key("graph_a", "triple TSV of graph A", &RunConfig::graph_a));
  k.push_back(path_key("graph_b", "triple TSV of graph B", &RunConfig::graph_b));
  k.push_back(path_key("features_a", "feature file of graph A (needed when mm is on)", &RunConfig::features_a));
  k.push_back(path_key("features_b", "feature file of graph B (needed when mm is on)", &RunConfig::features_b));
  k.push_back(path_key("seeds", "seed inter-link TSV (seed_mode = file)", &RunConfig::seeds));
  k.push_back(path_key("heldout_links", "held-out inter-links for alignment hits@1 (optional)", &RunConfig::heldout_links));
  k.push_back(path_key("truth", "synthetic ground truth JSON for recovery scores (optional)", &RunConfig::truth));
  k.push_back(flag_key("kt", "knowledge transfer: alignment, link inference and triple transfer", &RunConfig::kt));
  k.push_back(flag_key("mm", "fused multi-modal features as alignment input (off: random init)", &RunConfig::mm));
  k.push_back(flag_key("de", "dangling-vertex elimination during alignment", &RunConfig::de));
  k.push_back({"seed_mode", "alignment supervision: file | bootstrap (mutual NN of initial embeddings under gamma_d)",
               [](RunConfig& c, const std::string& v) {
                 if (v == "file") c.seed_mode = SeedMode::File;
                 else if (v == "bootstrap") c.seed_mode = SeedMode::Bootstrap;
                 else throw Error(ErrorCode::ConfigInvalid, "seed_mode must be file or bootstrap");
               },
               [](const RunConfig& c) { return std::string(c.seed_mode == SeedMode::File ? "file" : "bootstrap"); }});
  k.push_back({"seed", "master RNG seed", [](RunConfig& c, const std::string& v) { c.seed = to_uint("seed", v); },
               [](const RunConfig& c) { return std::to_string(c.seed); }});
  k.push_back({"split", "train,test,valid ratios",
               [](RunConfig& c, const std::string& v) {
                 std::array<double, 3> r{};
                 std::size_t start = 0;
                 for (int i = 0; i < 3; ++i) {
                   const auto comma = v.find(',', start);
                   if ((i < 2) == (comma == std::string::npos)) throw Error(ErrorCode::ConfigInvalid, "split needs three comma-separated ratios");
                   r[static_cast<std::size_t>(i)] = to_double("split", trim(v.substr(start, comma - start)));
                   start = comma + 1;
                 }
                 c.split = r;
               },
               [](const RunConfig& c) {
                 return format_double(c.split[0]) + "," + format_double(c.split[1]) + "," + format_double(c.split[2]);
               }});
  k.push_back(count_key("dim", "alignment embedding dimension", &RunConfig::dim));
  k.push_back({"layers", "GCN layers (1, 2 or 3)",
               [](RunConfig& c, const std::string& v) {
                 const auto n = to_uint("layers", v);
                 if (n < 1 || n > 3) throw Error(ErrorCode::ConfigInvalid, "layers must be 1, 2 or 3");
                 c.layers = n;
               },
               [](const RunConfig& c) { return std::to_string(c.layers); }});
  k.push_back(count_key("modality_dim", "projected SMILES/sequence dimension", &RunConfig::modality_dim));
  k.push_back(positive_key("align_lr", "alignment learning rate", &RunConfig::align_lr));
  k.push_back(positive_key("margin", "alignment margin gamma", &RunConfig::margin));
  k.push_back(count_key("align_negatives", "negative inter-links per positive", &RunConfig::align_negatives));
  k.push_back(count_key("outer_iterations", "interactive loop iterations", &RunConfig::outer_iterations));
  k.push_back(count_key("transfer_cadence", "alignment epochs between link inference + transfer", &RunConfig::transfer_cadence));
  k.push_back({"alpha_mode", "dangling distance threshold: fixed | computed (max seed distance on initial embeddings)",
               [](RunConfig& c, const std::string& v) {
                 if (v == "fixed") c.alpha_mode = AlphaMode::Fixed;
                 else if (v == "computed") c.alpha_mode = AlphaMode::Computed;
                 else throw Error(ErrorCode::ConfigInvalid, "alpha_mode must be fixed or computed");
               },
               [](const RunConfig& c) { return std::string(c.alpha_mode == AlphaMode::Fixed ? "fixed" : "computed"); }});
  k.push_back({"alpha", "fixed dangling distance threshold",
               [](RunConfig& c, const std::string& v) { c.alpha = to_double("alpha", v); },
               [](const RunConfig& c) { return format_double(c.alpha); }});
  k.push_back({"theta", "dangling rank quantile in (0, 1)",
               [](RunConfig& c, const std::string& v) {
                 const double t = to_double("theta", v);
                 if (!(t > 0.0 && t < 1.0)) throw Error(ErrorCode::ConfigInvalid, "theta must lie in (0, 1)");
                 c.theta = t;
               },
               [](const RunConfig& c) { return format_double(c.theta); }});
  k.push_back({"tenure_limit", "epochs as candidate before elimination",
               [](RunConfig& c, const std::string& v) { c.tenure_limit = static_cast<int>(at_least_one("tenure_limit", v)); },
               [](const RunConfig& c) { return std::to_string(c.tenure_limit); }});
  k.push_back({"gamma_d", "link inference distance threshold",
               [](RunConfig& c, const std::string& v) {
                 const double g = to_double("gamma_d", v);
                 if (g < 0.0) throw Error(ErrorCode::ConfigInvalid, "gamma_d must be >= 0");
                 c.gamma_d = g;
               },
               [](const RunConfig& c) { return format_double(c.gamma_d); }});
  k.push_back({"variant", "link prediction head: transe | rotate | distmult",
               [](RunConfig& c, const std::string& v) {
                 const auto p = parse_variant(v);
                 if (!p) throw Error(ErrorCode::ConfigInvalid, "variant must be transe, rotate or distmult");
                 c.variant = *p;
               },
               [](const RunConfig& c) { return std::string(to_string(c.variant)); }});
  k.push_back(count_key("lp_dim", "link prediction embedding dimension", &RunConfig::lp_dim));
  k.push_back(positive_key("lp_lr", "link prediction learning rate", &RunConfig::lp_lr));
  k.push_back(positive_key("beta", "link prediction margin", &RunConfig::beta));
  k.push_back(count_key("neg_rate", "training negatives per triple", &RunConfig::neg_rate));
  k.push_back(count_key("lp_epochs", "link prediction epochs", &RunConfig::lp_epochs));
  k.push_back(count_key("lp_batch", "link prediction mini-batch size", &RunConfig::lp_batch));
  k.push_back(count_key("lp_eval_every", "epochs between validation checks", &RunConfig::lp_eval_every));
  k.push_back(flag_key("lp_warm_start", "initialise link prediction vertices from alignment embeddings", &RunConfig::lp_warm_start));
  k.push_back(positive_key("lp_init", "half-width of the uniform link prediction init", &RunConfig::lp_init));
  k.push_back(count_key("eval_neg_rate", "corruptions per test triple", &RunConfig::eval_neg_rate));
  return k;
}

void read_key_values(const std::filesystem::path& path,
                     const std::function<void(const std::string&, const std::string&, std::size_t)>& apply) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ConfigInvalid, path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no);
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ec == std::errc{} ? ptr : buf);
}

bool parse_bool(const std::string& value) {
  if (value == "on" || value == "true" || value == "1" || value == "yes") return true;
  if (value == "off" || value == "false" || value == "0" || value == "no") return false;
  throw Error(ErrorCode::ConfigInvalid, "expected on/off, got '" + value + "'");
}

const std::vector<ConfigKey>& run_config_keys() {
  static const std::vector<ConfigKey> keys = make_keys();
  return keys;
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  for (const auto& k : run_config_keys()) {
    if (k.name == key) {
      k.set(config, value);
      config.explicit_keys.insert(key);
      return;
    }
  }
  throw Error(ErrorCode::ConfigInvalid, "unknown config key '" + key + "'");
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  read_key_values(path, [&](const std::string& key, const std::string& value, std::size_t line_no) {
    try {
      set_config_value(base, key, value);
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(line_no) + ": " + e.message());
    }
  });
  resolve_paths(base, path.parent_path());
  return base;
}

void resolve_paths(RunConfig& config, const std::filesystem::path& base_dir) {
  for (auto* p : {&config.graph_a, &config.graph_b, &config.features_a, &config.features_b, &config.seeds,
                  &config.heldout_links, &config.truth}) {
    if (!p->empty() && p->is_relative()) *p = base_dir / *p;
  }
}

void apply_env_overrides(RunConfig& config) {
  const std::pair<const char*, std::filesystem::path RunConfig::*> vars[] = {
      {"MGKT_GRAPH_A", &RunConfig::graph_a},       {"MGKT_GRAPH_B", &RunConfig::graph_b},
      {"MGKT_FEATURES_A", &RunConfig::features_a}, {"MGKT_FEATURES_B", &RunConfig::features_b},
      {"MGKT_SEEDS", &RunConfig::seeds},           {"MGKT_HELDOUT_LINKS", &RunConfig::heldout_links},
      {"MGKT_TRUTH", &RunConfig::truth}};
  for (const auto& [name, member] : vars) {
    if (const char* v = std::getenv(name); v && *v) config.*member = v;
  }
}

void check_dependencies(RunConfig& config) {
  if (config.kt) return;
  for (const auto& [key, flag] : {std::pair{"mm", config.mm}, std::pair{"de", config.de}}) {
    if (flag && config.explicit_keys.contains(key)) {
      throw Error(ErrorCode::ConfigDependency, std::string(key) + " = on requires kt = on");
    }
  }
  config.mm = false;
  config.de = false;
}

std::string config_to_string(const RunConfig& config) {
  std::string out;
  for (const auto& k : run_config_keys()) out += k.name + " = " + k.get(config) + "\n";
  return out;
}

const std::vector<std::pair<std::string, std::string>>& synth_spec_keys() {
  static const std::vector<std::pair<std::string, std::string>> keys = {
      {"n_genes", "genes in graph A"},
      {"n_metabolites", "metabolites in graph A"},
      {"edge_density", "triples / (genes * metabolites)"},
      {"p_hide_intra", "fraction of A's triples hidden from B"},
      {"p_hide_inter", "fraction of aligned pairs withheld from the seed file"},
      {"p_dangling", "dangling vertices added to B, as a fraction of |V_A|"},
      {"feature_noise", "Gaussian feature noise sigma"},
      {"n_modules", "planted modules"},
      {"p_in_module", "probability a triple stays inside a module"},
      {"shared_offset", "offset added to every latent coordinate of aligned vertices (danglings lack it)"},
      {"p_missing_modality", "probability a vertex lacks its SMILES/sequence vector"},
      {"surface_dim", "surface-form feature dim"},
      {"description_dim", "description feature dim"},
      {"smiles_dim", "SMILES feature dim"},
      {"sequence_dim", "sequence feature dim"},
      {"seed", "generator seed"}};
  return keys;
}

void set_synth_value(SynthSpec& s, const std::string& key, const std::string& v) {
  if (key == "n_genes") s.n_genes = to_uint(key, v);
  else if (key == "n_metabolites") s.n_metabolites = to_uint(key, v);
  else if (key == "edge_density") s.edge_density = to_double(key, v);
  else if (key == "p_hide_intra") s.p_hide_intra = probability(key, v);
  else if (key == "p_hide_inter") s.p_hide_inter = probability(key, v);
  else if (key == "p_dangling") s.p_dangling = probability(key, v);
  else if (key == "feature_noise") s.feature_noise = to_double(key, v);
  else if (key == "n_modules") s.n_modules = to_uint(key, v);
  else if (key == "p_in_module") s.p_in_module = probability(key, v);
  else if (key == "shared_offset") s.shared_offset = to_double(key, v);
  else if (key == "p_missing_modality") s.p_missing_modality = probability(key, v);
  else if (key == "surface_dim") s.surface_dim = to_uint(key, v);
  else if (key == "description_dim") s.description_dim = to_uint(key, v);
  else if (key == "smiles_dim") s.smiles_dim = to_uint(key, v);
  else if (key == "sequence_dim") s.sequence_dim = to_uint(key, v);
  else if (key == "seed") s.seed = to_uint(key, v);
  else throw Error(ErrorCode::ConfigInvalid, "unknown synth key '" + key + "'");
}

std::string synth_value(const SynthSpec& s, const std::string& key) {
  if (key == "n_genes") return std::to_string(s.n_genes);
  if (key == "n_metabolites") return std::to_string(s.n_metabolites);
  if (key == "edge_density") return format_double(s.edge_density);
  if (key == "p_hide_intra") return format_double(s.p_hide_intra);
  if (key == "p_hide_inter") return format_double(s.p_hide_inter);
  if (key == "p_dangling") return format_double(s.p_dangling);
  if (key == "feature_noise") return format_double(s.feature_noise);
  if (key == "n_modules") return std::to_string(s.n_modules);
  if (key == "p_in_module") return format_double(s.p_in_module);
  if (key == "shared_offset") return format_double(s.shared_offset);
  if (key == "p_missing_modality") return format_double(s.p_missing_modality);
  if (key == "surface_dim") return std::to_string(s.surface_dim);
  if (key == "description_dim") return std::to_string(s.description_dim);
  if (key == "smiles_dim") return std::to_string(s.smiles_dim);
  if (key == "sequence_dim") return std::to_string(s.sequence_dim);
  if (key == "seed") return std::to_string(s.seed);
  throw Error(ErrorCode::ConfigInvalid, "unknown synth key '" + key + "'");
}

SynthSpec load_synth_spec(const std::filesystem::path& path, SynthSpec base) {
  read_key_values(path, [&](const std::string& key, const std::string& value, std::size_t line_no) {
    try {
      set_synth_value(base, key, value);
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(line_no) + ": " + e.message());
    }
  });
  return base;
}

}  // namespace mgkt
