#include "mgkt/pipeline.hpp"

#include <fstream>
#include <map>

#include <json.hpp>

#include "mgkt/error.hpp"
#include "mgkt/hash.hpp"
#include "mgkt/log.hpp"
#include "mgkt/nearest.hpp"

namespace mgkt {
namespace {

template <typename F>
auto stage(const char* name, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.code(), std::string("stage ") + name + ": " + e.message());
  }
}

void copy_vertices(const MetabolicGraph& from, MetabolicGraph& to) {
  for (const Kind kind : kKinds) {
    for (const VertexId& v : from.vertices(kind)) to.add_vertex(kind, from.name(v));
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
}

nlohmann::json confusion_summary(const Confusion& c) {
  return {{"precision", c.precision()}, {"recall", c.recall()}, {"f1", c.f1()}};
}

}  // namespace

std::unique_ptr<Workspace> load_workspace(RunConfig config) {
  check_dependencies(config);
  if (config.graph_a.empty() || config.graph_b.empty()) {
    throw Error(ErrorCode::InvalidArgument, "graph_a and graph_b must be set");
  }
  auto ws = std::make_unique<Workspace>();
  ws->config = config;
  ws->a = load_graph(config.graph_a, "A", 0);
  ws->b = load_graph(config.graph_b, "B", 1);
  ws->index = std::make_unique<JointIndex>(ws->a, ws->b);
  ws->split_a = split_triples(ws->a, config.split, derive_seed(config.seed, "split.A"));
  ws->split_b = split_triples(ws->b, config.split, derive_seed(config.seed, "split.B"));
  copy_vertices(ws->a, ws->train_a);
  copy_vertices(ws->b, ws->train_b);
  for (const auto& t : ws->split_a.train) ws->train_a.add_triple(t);
  for (const auto& t : ws->split_b.train) ws->train_b.add_triple(t);
  for (const MetabolicGraph* g : {&ws->a, &ws->b}) {
    for (const auto& t : g->triples()) ws->true_keys.insert(t.key());
  }
  for (const DataSplit* s : {&ws->split_a, &ws->split_b}) {
    for (const auto& t : s->test) ws->held_out_keys.insert(t.key());
    for (const auto& t : s->valid) ws->held_out_keys.insert(t.key());
  }
  if (config.kt && config.mm) {
    if (config.features_a.empty() || config.features_b.empty()) {
      throw Error(ErrorCode::MissingFeatures, "features_a and features_b must be set when mm is on");
    }
    ws->features_a = load_features(config.features_a, ws->a);
    ws->features_b = load_features(config.features_b, ws->b);
  }
  if (config.kt && config.seed_mode == SeedMode::File) {
    if (config.seeds.empty()) throw Error(ErrorCode::InvalidArgument, "seeds must be set when seed_mode = file");
    ws->seed_links = load_links(config.seeds, ws->a, ws->b, Provenance::Seed);
  }
  if (!config.heldout_links.empty()) ws->heldout_links = load_links(config.heldout_links, ws->a, ws->b);
  if (!config.truth.empty()) ws->truth = load_truth(config.truth);
  return ws;
}

std::vector<TransferredTriple> transfer_triples(const Workspace& ws, std::span<const InterLink> links) {
  auto out = transfer_cross(links, ws.train_a.triples(), ws.train_b.triples());
  auto within = transfer_within(links, ws.train_a.triples(), ws.train_b.triples());
  out.insert(out.end(), std::make_move_iterator(within.begin()), std::make_move_iterator(within.end()));
  return out;
}

AlignConfig align_config(const RunConfig& c) {
  AlignConfig ac;
  ac.dim = c.dim;
  ac.layers = c.layers;
  ac.modality_dim = c.modality_dim;
  ac.learning_rate = c.align_lr;
  ac.margin = c.margin;
  ac.negatives = c.align_negatives;
  ac.use_features = c.mm;
  ac.seed = derive_seed(c.seed, "align");
  return ac;
}

AlignmentOutcome run_alignment(Workspace& ws, const std::optional<std::filesystem::path>& out) {
  const RunConfig& c = ws.config;
  const JointIndex& index = *ws.index;
  const AlignConfig ac = align_config(c);
  AlignmentModel model(ac, index, ws.features_a ? &*ws.features_a : nullptr, ws.features_b ? &*ws.features_b : nullptr);

  AlignmentOutcome res;
  const Matrix initial = model.initial_embeddings();
  if (c.seed_mode == SeedMode::File) {
    res.seeds = ws.seed_links;
  } else {
    res.seeds = mutual_nearest(initial, index, ws.a, ws.b, nullptr, c.gamma_d);
    for (auto& l : res.seeds) l.provenance = Provenance::Seed;
  }
  if (res.seeds.empty()) log::warn("no seed links: alignment receives no supervision until links are inferred");
  res.dangling.theta = c.theta;
  res.dangling.tenure_limit = c.tenure_limit;
  if (c.de) res.dangling.alpha = compute_alpha(initial, res.seeds, index, c.alpha_mode, c.alpha);
  res.alpha = res.dangling.alpha;

  WeightedAdjacency adj = build_adjacency(ws.train_a, ws.train_b, index);
  if (c.de) {
    // Initial candidates come from the fused input vectors, before any training.
    res.dangling = update_candidates(std::move(res.dangling), initial, index);
    adj = apply_downweights(res.dangling, ws.train_a, ws.train_b, index);
    const auto rows = dangling_report_rows(res.dangling, 0);
    res.dangling_rows.insert(res.dangling_rows.end(), rows.begin(), rows.end());
  }
  std::vector<InterLink> positives = res.seeds;
  std::set<std::uint64_t> transferred_keys;
  int epoch = 0;
  for (std::size_t it = 1; it <= c.outer_iterations; ++it) {
    for (std::size_t e = 0; e < c.transfer_cadence; ++e) {
      ++epoch;
      double loss = NAN;
      if (!positives.empty()) loss = model.train_epoch(positives, adj);
      res.embeddings = model.embed(adj);
      if (c.de) {
        res.dangling = finalize(update_candidates(std::move(res.dangling), res.embeddings, index));
        adj = apply_downweights(res.dangling, ws.train_a, ws.train_b, index);
        const auto rows = dangling_report_rows(res.dangling, epoch);
        res.dangling_rows.insert(res.dangling_rows.end(), rows.begin(), rows.end());
      }
      res.trace.push_back({epoch, loss, mean_link_distance(res.seeds, res.embeddings, index)});
    }
    res.embeddings = model.embed(adj);
    const auto fresh = infer_inter_links(res.embeddings, index, ws.a, ws.b, c.de ? &res.dangling : nullptr, c.gamma_d,
                                         positives);
    positives.insert(positives.end(), fresh.begin(), fresh.end());
    res.inferred.insert(res.inferred.end(), fresh.begin(), fresh.end());
    for (auto& t : transfer_triples(ws, positives)) {
      if (!transferred_keys.insert(t.triple.key()).second) continue;
      t.iteration = static_cast<int>(it);
      res.transferred.push_back(std::move(t));
    }
    log::info("iteration " + std::to_string(it) + ": " + std::to_string(positives.size()) + " links, " +
              std::to_string(res.dangling.eliminated.size()) + " eliminated, " +
              std::to_string(res.transferred.size()) + " transferred");
  }
  if (out) {
    model.save(*out / "align_checkpoint.bin");
    write_loss_trace(*out / "loss_trace.csv", res.trace);
    write_dangling_report(*out / "dangling_report.csv", res.dangling_rows, ws.a, ws.b);
    std::vector<InterLink> all = res.seeds;
    all.insert(all.end(), res.inferred.begin(), res.inferred.end());
    save_links(all, ws.a, ws.b, *out / "links.tsv", true);
    std::filesystem::remove(*out / "transfer_audit.jsonl");
    append_transfer_audit(*out / "transfer_audit.jsonl", res.transferred, ws.a, ws.b);
  }
  return res;
}

PoolOutcome build_train_pool(const Workspace& ws, std::span<const TransferredTriple> transferred) {
  PoolOutcome p;
  p.pool = ws.split_a.train;
  p.pool.insert(p.pool.end(), ws.split_b.train.begin(), ws.split_b.train.end());
  p.enrich = enrich(p.pool, transferred, ws.held_out_keys);
  return p;
}

void save_pool(const std::filesystem::path& path, std::span<const Triple> pool, const MetabolicGraph& a,
               const MetabolicGraph& b) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  const auto label = [&](const VertexId& v) {
    const MetabolicGraph& g = v.graph == 0 ? a : b;
    return g.tag() + ":" + g.name(v);
  };
  for (const auto& t : pool) out << label(t.metabolite) << '\t' << to_string(t.direction) << '\t' << label(t.gene) << '\n';
}

std::vector<Triple> load_pool(const std::filesystem::path& path, const MetabolicGraph& a, const MetabolicGraph& b) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  const auto resolve = [&](const std::string& field, Kind kind, std::size_t line_no) {
    const auto colon = field.find(':');
    const std::string tag = colon == std::string::npos ? "" : field.substr(0, colon);
    const MetabolicGraph* g = tag == a.tag() ? &a : (tag == b.tag() ? &b : nullptr);
    const auto v = g ? g->find(kind, field.substr(colon + 1)) : std::nullopt;
    if (!v) {
      throw Error(ErrorCode::MissingVertex,
                  path.string() + ":" + std::to_string(line_no) + ": unknown " + std::string(to_string(kind)) + " " + field);
    }
    return *v;
  };
  std::vector<Triple> pool;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) throw Error(ErrorCode::MalformedLine, path.string() + ":" + std::to_string(line_no));
    const auto d = parse_direction(line.substr(t1 + 1, t2 - t1 - 1));
    if (!d) throw Error(ErrorCode::BadDirection, path.string() + ":" + std::to_string(line_no));
    pool.push_back({resolve(line.substr(0, t1), Kind::Metabolite, line_no), *d,
                    resolve(line.substr(t2 + 1), Kind::Gene, line_no)});
  }
  return pool;
}

std::vector<LabeledTriple> labeled_split(const Workspace& ws, bool test) {
  std::vector<Triple> triples = test ? ws.split_a.test : ws.split_a.valid;
  const auto& more = test ? ws.split_b.test : ws.split_b.valid;
  triples.insert(triples.end(), more.begin(), more.end());
  const NegativeSampler sampler({&ws.a, &ws.b}, ws.true_keys);
  return build_eval_set(triples, sampler, ws.config.eval_neg_rate,
                        derive_seed(ws.config.seed, test ? "eval.test" : "eval.valid"));
}

LinkPredOutcome run_linkpred(const Workspace& ws, std::span<const Triple> pool, const Matrix* warm_start,
                             const std::optional<std::filesystem::path>& out) {
  const RunConfig& c = ws.config;
  LpConfig lc;
  lc.variant = c.variant;
  lc.dim = c.lp_dim;
  lc.learning_rate = c.lp_lr;
  lc.margin = c.beta;
  lc.negatives = c.neg_rate;
  lc.epochs = c.lp_epochs;
  lc.batch_size = c.lp_batch;
  lc.eval_every = c.lp_eval_every;
  lc.init_scale = c.lp_init;
  lc.seed = derive_seed(c.seed, "lp");
  const auto valid = labeled_split(ws, false);
  const auto test = labeled_split(ws, true);
  LinkPredOutcome res{train_lp(ws.a, ws.b, *ws.index, pool, valid, lc, warm_start), {}};
  res.test = evaluate(res.train.model, res.train.tau, test, *ws.index);
  if (out) {
    save_lp_checkpoint(*out / "lp_checkpoint.bin", res.train.model, res.train.tau);
    write_predictions(*out / "predictions.csv", res.train.model, res.train.tau, test, *ws.index, ws.a, ws.b);
    write_text(*out / "eval_report.json", res.test.to_json());
    std::ofstream trace(*out / "lp_trace.csv");
    trace.precision(10);
    trace << "epoch,loss,valid_f1\n";
    for (const auto& e : res.train.trace) {
      trace << e.epoch << ',' << e.loss << ',';
      if (!std::isnan(e.valid_f1)) trace << e.valid_f1;
      trace << '\n';
    }
  }
  return res;
}

std::string RunReport::to_json() const {
  nlohmann::json j;
  j["config"] = {{"kt", config.kt},
                 {"mm", config.mm},
                 {"de", config.de},
                 {"variant", std::string(to_string(config.variant))},
                 {"seed", config.seed},
                 {"seed_mode", config.seed_mode == SeedMode::File ? "file" : "bootstrap"},
                 {"gamma_d", config.gamma_d}};
  if (config.kt) {
    nlohmann::json align = {{"seed_links", seed_links},
                            {"inferred_links", inferred_links},
                            {"eliminated", eliminated},
                            {"alpha", alpha}};
    if (final_align_loss) align["final_loss"] = *final_align_loss;
    if (test.hits_at_1) align["hits_at_1"] = *test.hits_at_1;
    j["alignment"] = align;
    j["transfer"] = {{"transferred", transferred}, {"cross", cross},     {"within", within},
                     {"added", added},             {"leakage", leakage}};
  }
  j["linkpred"] = {{"train_pool", train_pool},
                   {"best_epoch", best_epoch},
                   {"valid_f1", valid_f1},
                   {"tau", {{"left", tau.tau[0]}, {"right", tau.tau[1]}}}};
  j["test"] = nlohmann::json::parse(test.to_json());
  j["test"]["per_relation_summary"] = {{"left", confusion_summary(test.per_relation[0])},
                                       {"right", confusion_summary(test.per_relation[1])}};
  if (recovery) j["recovery"] = nlohmann::json::parse(recovery->to_json());
  return j.dump(2) + "\n";
}

void write_manifest(const std::filesystem::path& path, const RunConfig& config) {
  nlohmann::json j;
  nlohmann::json cfg = nlohmann::json::object();
  nlohmann::json inputs = nlohmann::json::object();
  for (const auto& k : run_config_keys()) {
    const std::string value = k.get(config);
    cfg[k.name] = value;
    if (k.is_path && !value.empty() && std::filesystem::exists(value)) {
      inputs[k.name] = {{"path", value}, {"sha1", git_blob_hash_file(value)}};
    }
  }
  j["config"] = cfg;
  j["inputs"] = inputs;
  write_text(path, j.dump(2) + "\n");
}

RunReport run(const RunConfig& config, const std::optional<std::filesystem::path>& out) {
  auto ws = stage("load", [&] { return load_workspace(config); });
  if (out) {
    std::filesystem::create_directories(*out);
    write_manifest(*out / "manifest.json", ws->config);
    write_text(*out / "config.cfg", config_to_string(ws->config));
  }
  RunReport report;
  report.config = ws->config;
  std::vector<TransferredTriple> transferred;
  std::optional<AlignmentOutcome> align;
  if (ws->config.kt) {
    align = stage("align", [&] { return run_alignment(*ws, out); });
    transferred = align->transferred;
    report.seed_links = align->seeds.size();
    report.inferred_links = align->inferred.size();
    report.eliminated = align->dangling.eliminated.size();
    report.alpha = align->alpha;
    if (!align->trace.empty() && !std::isnan(align->trace.back().loss)) report.final_align_loss = align->trace.back().loss;
  }
  const auto pool = stage("transfer", [&] { return build_train_pool(*ws, transferred); });
  report.transferred = transferred.size();
  for (const auto& t : transferred) (t.rule == TransferRule::Cross ? report.cross : report.within) += 1;
  report.added = pool.enrich.added.size();
  report.leakage = pool.enrich.leaked.size();
  report.train_pool = pool.pool.size();
  if (report.leakage > 0) log::info("leakage guard withheld " + std::to_string(report.leakage) + " transferred triples");

  Matrix warm;
  if (align && ws->config.lp_warm_start) warm = align->embeddings;
  const auto lp = stage("linkpred", [&] { return run_linkpred(*ws, pool.pool, warm.empty() ? nullptr : &warm, out); });
  report.best_epoch = lp.train.best_epoch;
  report.valid_f1 = lp.train.valid_f1;
  report.tau = lp.train.tau;
  report.test = lp.test;
  if (align && !ws->heldout_links.empty()) {
    report.test.hits_at_1 = eval_alignment(align->embeddings, *ws->index, ws->b, ws->heldout_links);
  }
  if (align && ws->truth) {
    report.recovery = stage("recovery", [&] {
      if (ws->config.seed_mode == SeedMode::File) {
        return score_recovery(align->inferred, align->dangling.eliminated, align->transferred, *ws->truth, ws->a, ws->b);
      }
      // Bootstrapped seeds were inferred too, so every true pair counts as discoverable.
      GroundTruth truth = *ws->truth;
      truth.seeds.clear();
      std::vector<InterLink> found = align->seeds;
      found.insert(found.end(), align->inferred.begin(), align->inferred.end());
      return score_recovery(found, align->dangling.eliminated, align->transferred, truth, ws->a, ws->b);
    });
  }
  if (out) write_text(*out / "run_report.json", report.to_json());
  return report;
}

std::vector<SweepRow> sweep(const RunConfig& base, const SweepGrid& grid, const std::optional<std::filesystem::path>& out) {
  std::vector<SweepRow> rows;
  std::vector<std::size_t> pos(grid.size(), 0);
  for (const auto& [key, values] : grid) {
    if (values.empty()) throw Error(ErrorCode::ConfigInvalid, "sweep key " + key + " has no values");
  }
  std::size_t point = 0;
  while (true) {
    RunConfig cfg = base;
    SweepRow row;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      set_config_value(cfg, grid[i].first, grid[i].second[pos[i]]);
      row.assignment.emplace_back(grid[i].first, grid[i].second[pos[i]]);
    }
    std::optional<std::filesystem::path> sub;
    if (out) sub = *out / ("point_" + std::to_string(point));
    row.report = run(cfg, sub);
    rows.push_back(std::move(row));
    ++point;
    std::size_t i = 0;
    for (; i < grid.size(); ++i) {
      if (++pos[i] < grid[i].second.size()) break;
      pos[i] = 0;
    }
    if (i == grid.size()) break;
  }
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out;
  if (rows.empty()) return out;
  for (const auto& [k, v] : rows.front().assignment) out += k + ",";
  out += "precision,recall,f1,valid_f1,inferred_links,added\n";
  for (const auto& r : rows) {
    for (const auto& [k, v] : r.assignment) out += v + ",";
    const auto& c = r.report.test.overall;
    out += format_double(c.precision()) + "," + format_double(c.recall()) + "," + format_double(c.f1()) + "," +
           format_double(r.report.valid_f1) + "," + std::to_string(r.report.inferred_links) + "," +
           std::to_string(r.report.added) + "\n";
  }
  return out;
}

}  // namespace mgkt
