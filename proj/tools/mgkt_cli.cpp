// Command-line front end: one subcommand per stage plus the full pipeline.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "mgkt/config.hpp"
#include "mgkt/error.hpp"
#include "mgkt/kernels.hpp"
#include "mgkt/log.hpp"
#include "mgkt/pipeline.hpp"
#include "mgkt/synth.hpp"

namespace {

using namespace mgkt;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitMissingCheckpoint = 2;
constexpr int kExitViolations = 3;
constexpr int kExitConfig = 4;
constexpr int kExitUsage = 64;

std::string dashed(std::string s) {
  for (char& c : s) c = c == '_' ? '-' : c;
  return s;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
}

fs::path default_run_dir(std::uint64_t seed) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%d-%H%M%S", &tm);
  return fs::path("runs") / (std::string(stamp) + "-" + std::to_string(seed));
}

/// Options shared by every command that consumes a RunConfig.
struct RunOptions {
  std::string config_file;
  std::string out;
  std::map<std::string, std::string> values;  // key -> flag value, filled by CLI11

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_file, "key = value config file (flags override it)")->check(CLI::ExistingFile);
    cmd->add_option("--out", out, "run directory (default runs/<timestamp>-<seed>)");
    const RunConfig defaults;
    for (const auto& k : run_config_keys()) {
      auto* opt = cmd->add_option("--" + dashed(k.name), values[k.name], k.help);
      opt->default_str(k.get(defaults));
    }
  }

  RunConfig resolve(CLI::App* cmd) const {
    RunConfig c;
    if (!config_file.empty()) c = load_config(config_file);
    apply_env_overrides(c);
    for (const auto& k : run_config_keys()) {
      if (cmd->count("--" + dashed(k.name)) > 0) set_config_value(c, k.name, values.at(k.name));
    }
    check_dependencies(c);
    return c;
  }

  fs::path run_dir(const RunConfig& c) const {
    const fs::path dir = out.empty() ? default_run_dir(c.seed) : fs::path(out);
    fs::create_directories(dir);
    return dir;
  }
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingCheckpoint: return kExitMissingCheckpoint;
    case ErrorCode::ConfigDependency:
    case ErrorCode::ConfigInvalid: return kExitConfig;
    default: return kExitFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mgkt: graph alignment and gene-metabolite association prediction across metabolic graph pairs"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");
  std::string log_level = "warn";
  std::string simd;
  app.add_option("--log-level", log_level, "quiet | warn | info")
      ->check(CLI::IsMember({"quiet", "warn", "info"}))
      ->capture_default_str();
  app.add_option("--simd", simd, "force a kernel variant (scalar | avx2); default picks from CPUID");

  // validate
  auto* validate = app.add_subcommand("validate", "check a triple file; violations printed as JSON lines");
  std::string validate_graph;
  std::string validate_kinds;
  validate->add_option("graph", validate_graph, "triple TSV")->required()->check(CLI::ExistingFile);
  validate->add_option("--kinds", validate_kinds, "id<TAB>gene|metabolite declarations to check endpoints against")
      ->check(CLI::ExistingFile);

  // split
  auto* split = app.add_subcommand("split", "split a triple file into train/test/valid");
  std::string split_graph, split_out, split_ratios = "0.6,0.3,0.1";
  std::uint64_t split_seed = 1;
  split->add_option("graph", split_graph, "triple TSV")->required()->check(CLI::ExistingFile);
  split->add_option("--ratios", split_ratios, "train,test,valid ratios")->capture_default_str();
  split->add_option("--seed", split_seed, "split seed")->capture_default_str();
  split->add_option("--out", split_out, "output directory")->required();

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic graph pair with ground truth");
  std::string synth_spec, synth_out;
  std::map<std::string, std::string> synth_values;
  synth->add_option("--spec", synth_spec, "key = value generator spec")->check(CLI::ExistingFile);
  synth->add_option("--out", synth_out, "output directory")->required();
  {
    const SynthSpec defaults;
    for (const auto& [name, help] : synth_spec_keys()) {
      synth->add_option("--" + dashed(name), synth_values[name], help)->default_str(synth_value(defaults, name));
    }
  }

  // run-config commands
  RunOptions align_opts, transfer_opts, train_opts, eval_opts, pipeline_opts, sweep_opts;
  auto* align = app.add_subcommand("align", "train the alignment encoder with dangling elimination and link inference");
  align_opts.attach(align);
  auto* transfer = app.add_subcommand("transfer", "apply both transfer rules and write the enriched training pool");
  transfer_opts.attach(transfer);
  std::string transfer_links;
  transfer->add_option("--links", transfer_links, "extra inter-links (e.g. links.tsv written by align)")
      ->check(CLI::ExistingFile);
  auto* train = app.add_subcommand("train-lp", "train the link prediction head and select thresholds");
  train_opts.attach(train);
  std::string train_pool;
  train->add_option("--pool", train_pool, "training pool (default: raw training split)")->check(CLI::ExistingFile);
  auto* eval = app.add_subcommand("eval", "evaluate a link prediction checkpoint on the test split");
  eval_opts.attach(eval);
  std::string eval_model;
  eval->add_option("--model", eval_model, "checkpoint written by train-lp or pipeline");
  auto* pipeline = app.add_subcommand("pipeline", "full run: alignment, transfer, link prediction, evaluation");
  pipeline_opts.attach(pipeline);
  auto* sweep_cmd = app.add_subcommand("sweep", "grid of pipeline runs (default: layers x align_lr)");
  sweep_opts.attach(sweep_cmd);
  std::vector<std::string> grid_specs;
  sweep_cmd->add_option("--grid", grid_specs, "key=v1,v2,... (repeatable)")
      ->default_str("layers=1,2,3 align_lr=1e-4,4e-4,1e-1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    log::set_level(log_level == "quiet" ? log::Level::Quiet : (log_level == "info" ? log::Level::Info : log::Level::Warn));
    if (!simd.empty() && !kernels::select(simd)) throw Error(ErrorCode::InvalidArgument, "kernel variant unavailable: " + simd);

    if (*validate) {
      try {
        const auto g = load_graph(validate_graph, "A", 0);
        auto violations = validate_bipartite(g);
        if (!validate_kinds.empty()) {
          const auto declared = validate_declared_kinds(g, load_kinds(validate_kinds));
          violations.insert(violations.end(), declared.begin(), declared.end());
        }
        std::cout << violations_to_json_lines(violations);
        return violations.empty() ? kExitOk : kExitViolations;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::InvalidGraph) throw;
        std::cerr << "error: " << e.what() << '\n';
        return kExitViolations;
      }
    }

    if (*split) {
      RunConfig tmp;
      set_config_value(tmp, "split", split_ratios);
      const auto g = load_graph(split_graph, "A", 0);
      const auto s = split_triples(g, tmp.split, split_seed);
      fs::create_directories(split_out);
      save_triples(g, s.train, fs::path(split_out) / "train.tsv");
      save_triples(g, s.test, fs::path(split_out) / "test.tsv");
      save_triples(g, s.valid, fs::path(split_out) / "valid.tsv");
      std::cout << "train " << s.train.size() << " test " << s.test.size() << " valid " << s.valid.size() << '\n';
      return kExitOk;
    }

    if (*synth) {
      SynthSpec spec;
      if (!synth_spec.empty()) spec = load_synth_spec(synth_spec);
      for (const auto& [name, help] : synth_spec_keys()) {
        if (synth->count("--" + dashed(name)) > 0) set_synth_value(spec, name, synth_values.at(name));
      }
      const auto inst = generate(spec);
      write_instance(inst, synth_out);
      std::string spec_text;
      for (const auto& [name, help] : synth_spec_keys()) spec_text += name + " = " + synth_value(spec, name) + "\n";
      write_file(fs::path(synth_out) / "spec.cfg", spec_text);
      write_file(fs::path(synth_out) / "inputs.cfg",
                 "graph_a = graph_a.tsv\ngraph_b = graph_b.tsv\nfeatures_a = features_a.bin\n"
                 "features_b = features_b.bin\nseeds = seeds.tsv\nheldout_links = heldout_links.tsv\n"
                 "truth = truth.json\n");
      std::cout << "A: " << inst.a.num_genes() << " genes, " << inst.a.num_metabolites() << " metabolites, "
                << inst.a.num_triples() << " triples\n"
                << "B: " << inst.b.num_genes() << " genes, " << inst.b.num_metabolites() << " metabolites, "
                << inst.b.num_triples() << " triples\n"
                << "seeds " << inst.seeds.size() << ", held-out links " << inst.heldout.size() << ", danglings "
                << inst.truth.planted_danglings.size() << ", hidden triples " << inst.truth.hidden_triples.size()
                << '\n';
      return kExitOk;
    }

    if (*align) {
      RunConfig c = align_opts.resolve(align);
      if (!c.kt) throw Error(ErrorCode::ConfigDependency, "align requires kt = on");
      const fs::path dir = align_opts.run_dir(c);
      write_manifest(dir / "manifest.json", c);
      auto ws = load_workspace(c);
      const auto res = run_alignment(*ws, dir);
      nlohmann::json j = {{"seed_links", res.seeds.size()},
                          {"inferred_links", res.inferred.size()},
                          {"eliminated", res.dangling.eliminated.size()},
                          {"transferred", res.transferred.size()},
                          {"alpha", res.alpha}};
      if (!ws->heldout_links.empty()) j["hits_at_1"] = eval_alignment(res.embeddings, *ws->index, ws->b, ws->heldout_links);
      write_file(dir / "align_report.json", j.dump(2) + "\n");
      std::cout << dir.string() << '\n';
      return kExitOk;
    }

    if (*transfer) {
      RunConfig c = transfer_opts.resolve(transfer);
      const fs::path dir = transfer_opts.run_dir(c);
      write_manifest(dir / "manifest.json", c);
      auto ws = load_workspace(c);
      std::vector<InterLink> links = ws->seed_links;
      if (!transfer_links.empty()) {
        for (const auto& l : load_links(transfer_links, ws->a, ws->b)) {
          if (std::find(links.begin(), links.end(), l) == links.end()) links.push_back(l);
        }
      }
      auto transferred = transfer_triples(*ws, links);
      const auto pool = build_train_pool(*ws, transferred);
      save_pool(dir / "train_pool.tsv", pool.pool, ws->a, ws->b);
      fs::remove(dir / "transfer_audit.jsonl");
      append_transfer_audit(dir / "transfer_audit.jsonl", transferred, ws->a, ws->b);
      const nlohmann::json j = {{"links", links.size()},
                                {"transferred", transferred.size()},
                                {"added", pool.enrich.added.size()},
                                {"leakage", pool.enrich.leaked.size()},
                                {"train_pool", pool.pool.size()}};
      write_file(dir / "transfer_report.json", j.dump(2) + "\n");
      std::cout << dir.string() << '\n';
      return kExitOk;
    }

    if (*train) {
      RunConfig c = train_opts.resolve(train);
      const fs::path dir = train_opts.run_dir(c);
      write_manifest(dir / "manifest.json", c);
      auto ws = load_workspace(c);
      std::vector<Triple> pool;
      if (train_pool.empty()) {
        pool = build_train_pool(*ws, {}).pool;
      } else {
        pool = load_pool(train_pool, ws->a, ws->b);
      }
      const auto res = run_linkpred(*ws, pool, nullptr, dir);
      const nlohmann::json j = {{"train_pool", pool.size()},
                                {"best_epoch", res.train.best_epoch},
                                {"valid_f1", res.train.valid_f1},
                                {"tau", {{"left", res.train.tau.tau[0]}, {"right", res.train.tau.tau[1]}}}};
      write_file(dir / "train_report.json", j.dump(2) + "\n");
      std::cout << dir.string() << '\n';
      return kExitOk;
    }

    if (*eval) {
      RunConfig c = eval_opts.resolve(eval);
      if (eval_model.empty() || !fs::exists(eval_model)) {
        throw Error(ErrorCode::MissingCheckpoint, eval_model.empty() ? "--model is required" : "no checkpoint at " + eval_model);
      }
      const auto [model, tau] = load_lp_checkpoint(eval_model);
      const fs::path dir = eval_opts.run_dir(c);
      auto ws = load_workspace(c);
      const auto test = labeled_split(*ws, true);
      const auto report = evaluate(model, tau, test, *ws->index);
      write_file(dir / "eval_report.json", report.to_json());
      write_predictions(dir / "predictions.csv", model, tau, test, *ws->index, ws->a, ws->b);
      std::cout << report.to_json();
      return kExitOk;
    }

    if (*pipeline) {
      RunConfig c = pipeline_opts.resolve(pipeline);
      const fs::path dir = pipeline_opts.run_dir(c);
      const auto report = run(c, dir);
      std::cout << dir.string() << '\n' << "f1 " << report.f1() << '\n';
      return kExitOk;
    }

    if (*sweep_cmd) {
      RunConfig c = sweep_opts.resolve(sweep_cmd);
      SweepGrid grid;
      if (grid_specs.empty()) grid_specs = {"layers=1,2,3", "align_lr=1e-4,4e-4,1e-1"};
      for (const auto& spec : grid_specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::ConfigInvalid, "grid entry must be key=v1,v2: " + spec);
        std::vector<std::string> values;
        std::string rest = spec.substr(eq + 1);
        for (std::size_t start = 0;;) {
          const auto comma = rest.find(',', start);
          values.push_back(rest.substr(start, comma - start));
          if (comma == std::string::npos) break;
          start = comma + 1;
        }
        grid.emplace_back(spec.substr(0, eq), values);
      }
      const fs::path dir = sweep_opts.run_dir(c);
      const auto rows = sweep(c, grid, dir);
      const std::string csv = sweep_to_csv(rows);
      write_file(dir / "sweep.csv", csv);
      std::cout << csv;
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
