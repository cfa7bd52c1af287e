#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "mgkt/dangling.hpp"
#include "mgkt/linkpred.hpp"
#include "mgkt/synth.hpp"

namespace mgkt {

enum class SeedMode { File, Bootstrap };

/// Every tunable of a run. Defaults follow the reference experiments.
struct RunConfig {
  // inputs
  std::filesystem::path graph_a;
  std::filesystem::path graph_b;
  std::filesystem::path features_a;
  std::filesystem::path features_b;
  std::filesystem::path seeds;
  std::filesystem::path heldout_links;
  std::filesystem::path truth;

  // components
  bool kt = true;  // knowledge transfer (alignment + link inference + triple transfer)
  bool mm = true;  // multi-modal feature fusion as encoder input
  bool de = true;  // dangling elimination
  SeedMode seed_mode = SeedMode::File;
  std::uint64_t seed = 1;

  std::array<double, 3> split{0.6, 0.3, 0.1};

  // alignment
  std::size_t dim = 512;
  std::size_t layers = 2;
  std::size_t modality_dim = 128;
  double align_lr = 4e-4;
  double margin = 5.0;
  std::size_t align_negatives = 10;
  std::size_t outer_iterations = 5;
  std::size_t transfer_cadence = 10;  // alignment epochs per outer iteration

  // dangling
  AlphaMode alpha_mode = AlphaMode::Fixed;
  double alpha = 0.7;
  double theta = 0.8;
  int tenure_limit = 5;

  // transfer
  double gamma_d = 0.4;

  // link prediction
  LpVariant variant = LpVariant::TransE;
  std::size_t lp_dim = 512;
  double lp_lr = 5e-4;
  double beta = 1.0;
  std::size_t neg_rate = 10;
  std::size_t lp_epochs = 100;
  std::size_t lp_batch = 256;
  std::size_t lp_eval_every = 5;
  bool lp_warm_start = false;
  double lp_init = 1e-3;

  // evaluation
  std::size_t eval_neg_rate = 10;

  /// Keys assigned explicitly (config file or flags), used by dependency checks.
  std::set<std::string> explicit_keys;
};

struct ConfigKey {
  std::string name;
  std::string help;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
  bool is_path = false;
};

const std::vector<ConfigKey>& run_config_keys();

std::string format_double(double v);
bool parse_bool(const std::string& value);

/// Assigns one key; throws ConfigInvalid for unknown keys or bad values.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

/// Reads `key = value` lines ('#' starts a comment) on top of `base`.
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});
/// Relative paths in a config file resolve against the file's directory.
void resolve_paths(RunConfig& config, const std::filesystem::path& base_dir);

/// MGKT_GRAPH_A, MGKT_GRAPH_B, MGKT_FEATURES_A, MGKT_FEATURES_B, MGKT_SEEDS,
/// MGKT_HELDOUT_LINKS and MGKT_TRUTH replace the matching paths when set.
void apply_env_overrides(RunConfig& config);

/// Enforces the component lattice: with kt off, mm and de are forced off, and
/// explicitly enabling either is rejected with ConfigDependency.
void check_dependencies(RunConfig& config);

/// Resolved configuration, one `key = value` line per key in registry order.
std::string config_to_string(const RunConfig& config);

/// Same file format for the synthetic generator.
const std::vector<std::pair<std::string, std::string>>& synth_spec_keys();  // (name, help)
void set_synth_value(SynthSpec& spec, const std::string& key, const std::string& value);
std::string synth_value(const SynthSpec& spec, const std::string& key);
SynthSpec load_synth_spec(const std::filesystem::path& path, SynthSpec base = {});

}  // namespace mgkt
