#include "mgkt/linkpred.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "mgkt/adam.hpp"
#include "mgkt/checkpoint.hpp"
#include "mgkt/error.hpp"
#include "mgkt/kernels.hpp"

namespace mgkt {
namespace {

constexpr char kLpMagic[] = "MGKTLP01";

struct Rows {
  std::size_t m, g;
};

Rows rows_of(const LinkPredModel& model, const Triple& t, const JointIndex& index) {
  const std::size_t n = model.vertex.value.rows();
  if (n != index.size()) throw Error(ErrorCode::MissingEmbedding, "model rows do not cover the vertex index");
  const std::size_t m = index.row(t.metabolite);
  const std::size_t g = index.row(t.gene);
  if (m >= n || g >= n || t.metabolite.index >= index.count(t.metabolite.graph, t.metabolite.kind) ||
      t.gene.index >= index.count(t.gene.graph, t.gene.kind)) {
    throw Error(ErrorCode::MissingEmbedding, "triple endpoint has no embedding");
  }
  return {m, g};
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

std::string_view to_string(LpVariant v) noexcept {
  switch (v) {
    case LpVariant::TransE: return "transe";
    case LpVariant::RotatE: return "rotate";
    case LpVariant::DistMult: return "distmult";
  }
  return "unknown";
}

std::optional<LpVariant> parse_variant(std::string_view name) noexcept {
  if (name == "transe") return LpVariant::TransE;
  if (name == "rotate") return LpVariant::RotatE;
  if (name == "distmult") return LpVariant::DistMult;
  return std::nullopt;
}

LinkPredModel LinkPredModel::init(LpVariant variant, std::size_t rows, std::size_t dim, double margin,
                                  std::uint64_t seed, double init_scale) {
  if (dim < 1) throw Error(ErrorCode::ConfigInvalid, "link prediction dim must be >= 1");
  if (variant == LpVariant::RotatE && dim % 2 != 0) throw Error(ErrorCode::ConfigInvalid, "RotatE needs an even dim");
  if (margin <= 0.0) throw Error(ErrorCode::ConfigInvalid, "margin must be positive");
  Rng rng(seed);
  if (!(init_scale > 0.0)) throw Error(ErrorCode::ConfigInvalid, "link prediction init scale must be positive");
  const double bound = init_scale;
  LinkPredModel m;
  m.variant = variant;
  m.margin = margin;
  m.vertex = Param("lp.vertex", Matrix::uniform(rows, dim, bound, rng));
  if (variant == LpVariant::RotatE) {
    m.relation = Param("lp.relation", Matrix::uniform(2, dim / 2, std::numbers::pi, rng));
  } else {
    m.relation = Param("lp.relation", Matrix::uniform(2, dim, bound, rng));
  }
  return m;
}

double score(const LinkPredModel& model, const Triple& t, const JointIndex& index) {
  const auto [mi, gi] = rows_of(model, t, index);
  const auto m = model.vertex.value.row(mi);
  const auto g = model.vertex.value.row(gi);
  const auto r = model.relation.value.row(static_cast<std::size_t>(t.direction));
  const std::size_t d = m.size();
  double s = 0.0;
  switch (model.variant) {
    case LpVariant::TransE:
      for (std::size_t i = 0; i < d; ++i) s += std::abs(m[i] + r[i] - g[i]);
      return s;
    case LpVariant::RotatE:
      for (std::size_t k = 0; k < d / 2; ++k) {
        const double c = std::cos(r[k]);
        const double sn = std::sin(r[k]);
        const double x = m[2 * k] * c - m[2 * k + 1] * sn - g[2 * k];
        const double y = m[2 * k] * sn + m[2 * k + 1] * c - g[2 * k + 1];
        s += std::hypot(x, y);
      }
      return s;
    case LpVariant::DistMult:
      for (std::size_t i = 0; i < d; ++i) s -= m[i] * r[i] * g[i];
      return s;
  }
  return s;
}

void score_backward(LinkPredModel& model, const Triple& t, const JointIndex& index, double w) {
  const auto [mi, gi] = rows_of(model, t, index);
  const auto m = model.vertex.value.row(mi);
  const auto g = model.vertex.value.row(gi);
  const std::size_t rel = static_cast<std::size_t>(t.direction);
  const auto r = model.relation.value.row(rel);
  auto dm = model.vertex.grad.row(mi);
  auto dg = model.vertex.grad.row(gi);
  auto dr = model.relation.grad.row(rel);
  const std::size_t d = m.size();
  switch (model.variant) {
    case LpVariant::TransE:
      for (std::size_t i = 0; i < d; ++i) {
        const double s = w * sign(m[i] + r[i] - g[i]);
        dm[i] += s;
        dr[i] += s;
        dg[i] -= s;
      }
      break;
    case LpVariant::RotatE:
      for (std::size_t k = 0; k < d / 2; ++k) {
        const double a = m[2 * k];
        const double b = m[2 * k + 1];
        const double c = std::cos(r[k]);
        const double sn = std::sin(r[k]);
        const double x = a * c - b * sn - g[2 * k];
        const double y = a * sn + b * c - g[2 * k + 1];
        const double mod = std::hypot(x, y);
        if (mod == 0.0) continue;
        const double ux = w * x / mod;
        const double uy = w * y / mod;
        dm[2 * k] += ux * c + uy * sn;
        dm[2 * k + 1] += -ux * sn + uy * c;
        dg[2 * k] -= ux;
        dg[2 * k + 1] -= uy;
        dr[k] += ux * (-a * sn - b * c) + uy * (a * c - b * sn);
      }
      break;
    case LpVariant::DistMult:
      for (std::size_t i = 0; i < d; ++i) {
        dm[i] -= w * r[i] * g[i];
        dr[i] -= w * m[i] * g[i];
        dg[i] -= w * m[i] * r[i];
      }
      break;
  }
}

LossResult lp_loss(LinkPredModel& model, const LpBatch& batch, const JointIndex& index, bool with_gradients) {
  if (batch.positives.empty()) throw Error(ErrorCode::EmptyInput, "link prediction loss over an empty batch");
  if (batch.negatives.size() != batch.positives.size() * batch.per_positive) {
    throw Error(ErrorCode::InvalidArgument, "negatives must come in equal groups per positive");
  }
  LossResult result;
  for (std::size_t i = 0; i < batch.positives.size(); ++i) {
    const Triple& p = batch.positives[i];
    const double fp = score(model, p, index);
    for (std::size_t j = 0; j < batch.per_positive; ++j) {
      const Triple& n = batch.negatives[i * batch.per_positive + j];
      const double term = fp - score(model, n, index) + model.margin;
      if (term <= 0.0) continue;
      result.loss += term;
      ++result.active_terms;
      if (with_gradients) {
        score_backward(model, p, index, 1.0);
        score_backward(model, n, index, -1.0);
      }
    }
  }
  return result;
}

bool classify(const LinkPredModel& model, const Thresholds& tau, const Triple& t, const JointIndex& index) {
  return score(model, t, index) <= tau.tau[static_cast<std::size_t>(t.direction)];
}

double best_threshold(std::span<const std::pair<double, bool>> scored) {
  if (scored.empty()) return 0.0;
  std::vector<std::pair<double, bool>> items(scored.begin(), scored.end());
  std::sort(items.begin(), items.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  std::size_t positives = 0;
  for (const auto& it : items) positives += it.second ? 1 : 0;
  double best_f1 = -1.0;
  double best_tau = items.front().first;
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    (items[i].second ? tp : fp) += 1;
    if (i + 1 < items.size() && items[i + 1].first == items[i].first) continue;
    const double denom = static_cast<double>(2 * tp + fp + (positives - tp));
    const double f1 = denom > 0.0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
    if (f1 > best_f1) {
      best_f1 = f1;
      best_tau = items[i].first;
    }
  }
  return best_tau;
}

Thresholds select_thresholds(const LinkPredModel& model, std::span<const LabeledTriple> items, const JointIndex& index) {
  std::array<std::vector<std::pair<double, bool>>, 2> per;
  std::vector<std::pair<double, bool>> pooled;
  for (const auto& it : items) {
    const double s = score(model, it.triple, index);
    per[static_cast<std::size_t>(it.triple.direction)].emplace_back(s, it.valid);
    pooled.emplace_back(s, it.valid);
  }
  const double fallback = best_threshold(pooled);
  Thresholds tau;
  for (std::size_t r = 0; r < 2; ++r) {
    const bool has_positive = std::any_of(per[r].begin(), per[r].end(), [](const auto& x) { return x.second; });
    tau.tau[r] = has_positive ? best_threshold(per[r]) : fallback;
  }
  return tau;
}

double Confusion::precision() const noexcept { return tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0; }
double Confusion::recall() const noexcept { return tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0; }
double Confusion::f1() const noexcept {
  const double p = precision();
  const double r = recall();
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}
void Confusion::add(bool predicted, bool actual) noexcept {
  if (predicted) {
    (actual ? tp : fp) += 1;
  } else {
    (actual ? fn : tn) += 1;
  }
}

Confusion confusion(const LinkPredModel& model, const Thresholds& tau, std::span<const LabeledTriple> items,
                    const JointIndex& index) {
  Confusion c;
  for (const auto& it : items) c.add(classify(model, tau, it.triple, index), it.valid);
  return c;
}

LpTrainResult train_lp(const MetabolicGraph& a, const MetabolicGraph& b, const JointIndex& index,
                       std::span<const Triple> train_pool, std::span<const LabeledTriple> valid, const LpConfig& config,
                       const Matrix* warm_start) {
  if (train_pool.empty()) throw Error(ErrorCode::EmptyInput, "empty link prediction training pool");
  if (config.batch_size == 0 || config.negatives == 0) throw Error(ErrorCode::ConfigInvalid, "batch size and negative rate must be >= 1");
  LpTrainResult result{LinkPredModel::init(config.variant, index.size(), config.dim, config.margin,
                                           derive_seed(config.seed, "lp.init"), config.init_scale),
                       {}, -1.0, 0, {}};
  LinkPredModel& model = result.model;
  if (warm_start) {
    if (warm_start->rows() != index.size() || warm_start->cols() != config.dim) {
      throw Error(ErrorCode::DimMismatch, "warm-start table shape differs from the link prediction model");
    }
    // Unit-L1 rows are rescaled to the mean row norm of the uniform init.
    const double scale = 0.5 * config.init_scale * static_cast<double>(config.dim);
    for (std::size_t i = 0; i < warm_start->size(); ++i) model.vertex.value.flat()[i] = warm_start->flat()[i] * scale;
  }
  std::unordered_set<std::uint64_t> forbidden;
  for (const auto& t : train_pool) forbidden.insert(t.key());
  const NegativeSampler sampler({&a, &b}, forbidden);
  Rng rng(derive_seed(config.seed, "lp.train"));
  Adam adam(AdamConfig{.learning_rate = config.learning_rate});
  const auto params = model.parameters();
  std::vector<Triple> order(train_pool.begin(), train_pool.end());
  LinkPredModel best = model;
  const auto evaluate_now = [&](int epoch) {
    if (valid.empty()) return std::numeric_limits<double>::quiet_NaN();
    const Thresholds tau = select_thresholds(model, valid, index);
    const double f1 = confusion(model, tau, valid, index).f1();
    if (f1 > result.valid_f1) {
      result.valid_f1 = f1;
      result.best_epoch = epoch;
      result.tau = tau;
      best = model;
    }
    return f1;
  };
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      LpBatch batch;
      batch.per_positive = config.negatives;
      batch.positives.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(end));
      batch.negatives.reserve(batch.positives.size() * config.negatives);
      for (const auto& p : batch.positives) {
        auto negs = sampler.sample(p, config.negatives, rng);
        batch.negatives.insert(batch.negatives.end(), negs.begin(), negs.end());
      }
      for (Param* p : params) p->zero_grad();
      const LossResult loss = lp_loss(model, batch, index, true);
      if (!std::isfinite(loss.loss)) {
        throw Error(ErrorCode::Divergence, "link prediction loss is not finite at epoch " + std::to_string(epoch));
      }
      epoch_loss += loss.loss;
      adam.step(params);
    }
    double f1 = NAN;
    if (epoch % config.eval_every == 0 || epoch == config.epochs) f1 = evaluate_now(static_cast<int>(epoch));
    result.trace.push_back({static_cast<int>(epoch), epoch_loss, f1});
  }
  if (valid.empty()) {
    result.valid_f1 = NAN;
    result.best_epoch = static_cast<int>(config.epochs);
    best = model;
  }
  result.model = std::move(best);
  return result;
}

void save_lp_checkpoint(const std::filesystem::path& path, const LinkPredModel& model, const Thresholds& tau) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(kLpMagic, 8);
  write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(model.variant));
  write_pod<double>(out, model.margin);
  write_pod<double>(out, tau.tau[0]);
  write_pod<double>(out, tau.tau[1]);
  write_matrix(out, model.vertex.value);
  write_matrix(out, model.relation.value);
}

std::pair<LinkPredModel, Thresholds> load_lp_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingCheckpoint, "cannot open model checkpoint " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::string(magic, 8) != kLpMagic) throw Error(ErrorCode::BadCheckpoint, path.string() + " is not a link prediction checkpoint");
  LinkPredModel model;
  const auto variant = read_pod<std::uint8_t>(in);
  if (variant > 2) throw Error(ErrorCode::BadCheckpoint, "unknown model variant");
  model.variant = static_cast<LpVariant>(variant);
  model.margin = read_pod<double>(in);
  Thresholds tau;
  tau.tau[0] = read_pod<double>(in);
  tau.tau[1] = read_pod<double>(in);
  model.vertex = Param("lp.vertex", read_matrix(in));
  model.relation = Param("lp.relation", read_matrix(in));
  return {std::move(model), tau};
}

void write_predictions(const std::filesystem::path& path, const LinkPredModel& model, const Thresholds& tau,
                       std::span<const LabeledTriple> items, const JointIndex& index, const MetabolicGraph& a,
                       const MetabolicGraph& b) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.precision(10);
  const auto label = [&](const VertexId& v) {
    const MetabolicGraph& g = v.graph == 0 ? a : b;
    return g.tag() + ":" + g.name(v);
  };
  out << "metabolite,direction,gene,score,label,truth\n";
  for (const auto& it : items) {
    const double s = score(model, it.triple, index);
    out << label(it.triple.metabolite) << ',' << to_string(it.triple.direction) << ',' << label(it.triple.gene) << ','
        << s << ',' << (s <= tau.tau[static_cast<std::size_t>(it.triple.direction)] ? "valid" : "invalid") << ','
        << (it.valid ? "valid" : "invalid") << '\n';
  }
}

}  // namespace mgkt
