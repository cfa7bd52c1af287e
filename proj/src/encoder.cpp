#include "mgkt/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "mgkt/checkpoint.hpp"
#include "mgkt/error.hpp"
#include "mgkt/kernels.hpp"
#include "mgkt/nearest.hpp"

namespace mgkt {
namespace {

constexpr char kAlignMagic[] = "MGKTALN1";

double bound_for(std::size_t fan_in) { return 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1))); }

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(ErrorCode::DimMismatch, what);
}

double leaky(double x, double slope) { return x > 0.0 ? x : slope * x; }
double leaky_grad(double x, double slope) { return x > 0.0 ? 1.0 : slope; }

std::vector<double> degree_scale(const WeightedAdjacency& adj) {
  std::vector<double> s(adj.rows());
  for (std::size_t u = 0; u < adj.rows(); ++u) {
    double deg = 1.0;
    for (std::size_t e = adj.offsets[u]; e < adj.offsets[u + 1]; ++e) deg += adj.weights[e];
    s[u] = 1.0 / std::sqrt(deg);
  }
  return s;
}

struct AttentionPass {
  Matrix pooled;
  std::vector<double> logits;
  std::vector<double> coefficients;
};

AttentionPass attend(const Matrix& z, const WeightedAdjacency& adj, const Matrix& attn_src, const Matrix& attn_dst,
                     double slope) {
  const std::size_t n = z.rows();
  const std::size_t d = z.cols();
  std::vector<double> src(n), dst(n);
  for (std::size_t u = 0; u < n; ++u) {
    src[u] = kernels::dot(z.row(u), attn_src.row(0));
    dst[u] = kernels::dot(z.row(u), attn_dst.row(0));
  }
  AttentionPass out{Matrix(n, d), std::vector<double>(adj.nnz()), std::vector<double>(adj.nnz(), 0.0)};
  for (std::size_t u = 0; u < n; ++u) {
    const std::size_t lo = adj.offsets[u];
    const std::size_t hi = adj.offsets[u + 1];
    double top = -INFINITY;
    for (std::size_t e = lo; e < hi; ++e) {
      out.logits[e] = src[u] + dst[adj.cols[e]];
      if (adj.weights[e] > 0.0) top = std::max(top, leaky(out.logits[e], slope));
    }
    if (top == -INFINITY) continue;
    double total = 0.0;
    for (std::size_t e = lo; e < hi; ++e) {
      if (adj.weights[e] <= 0.0) continue;
      out.coefficients[e] = adj.weights[e] * std::exp(leaky(out.logits[e], slope) - top);
      total += out.coefficients[e];
    }
    auto row = out.pooled.row(u);
    for (std::size_t e = lo; e < hi; ++e) {
      if (out.coefficients[e] == 0.0) continue;
      out.coefficients[e] /= total;
      kernels::axpy(out.coefficients[e], z.row(adj.cols[e]), row);
    }
  }
  return out;
}

Matrix concat_columns(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols() + b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto dst = out.row(r);
    std::copy(a.row(r).begin(), a.row(r).end(), dst.begin());
    std::copy(b.row(r).begin(), b.row(r).end(), dst.begin() + static_cast<std::ptrdiff_t>(a.cols()));
  }
  return out;
}

void write_params(std::ostream& out, const std::vector<Param*>& params) {
  write_pod<std::uint64_t>(out, params.size());
  for (const Param* p : params) {
    write_string(out, p->name);
    write_matrix(out, p->value);
  }
}

void read_params(std::istream& in, const std::vector<Param*>& params) {
  const auto n = read_pod<std::uint64_t>(in);
  if (n != params.size()) throw Error(ErrorCode::BadCheckpoint, "parameter count mismatch");
  for (Param* p : params) {
    const std::string name = read_string(in);
    Matrix value = read_matrix(in);
    if (name != p->name || value.rows() != p->value.rows() || value.cols() != p->value.cols()) {
      throw Error(ErrorCode::BadCheckpoint, "parameter '" + name + "' does not match model '" + p->name + "'");
    }
    p->value = std::move(value);
  }
}

}  // namespace

WeightedAdjacency WeightedAdjacency::from_edges(std::size_t n,
                                                std::span<const std::tuple<std::size_t, std::size_t, double>> edges) {
  std::vector<std::map<std::uint32_t, double>> lists(n);
  const auto put = [&](std::size_t u, std::size_t v, double w) {
    auto [it, fresh] = lists[u].emplace(static_cast<std::uint32_t>(v), w);
    if (!fresh) it->second = std::min(it->second, w);
  };
  for (const auto& [u, v, w] : edges) {
    if (u >= n || v >= n) throw Error(ErrorCode::InvalidArgument, "adjacency edge out of range");
    if (u == v) continue;
    put(u, v, w);
    put(v, u, w);
  }
  WeightedAdjacency adj;
  adj.offsets.assign(1, 0);
  for (const auto& l : lists) {
    for (const auto& [v, w] : l) {
      adj.cols.push_back(v);
      adj.weights.push_back(w);
    }
    adj.offsets.push_back(adj.cols.size());
  }
  return adj;
}

WeightedAdjacency build_adjacency(const MetabolicGraph& a, const MetabolicGraph& b, const JointIndex& index,
                                  std::span<const double> vertex_weights) {
  if (!vertex_weights.empty() && vertex_weights.size() != index.size()) {
    throw Error(ErrorCode::DimMismatch, "vertex weight count differs from vertex count");
  }
  std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
  edges.reserve(a.num_triples() + b.num_triples());
  for (const MetabolicGraph* g : {&a, &b}) {
    for (const Triple& t : g->triples()) {
      const std::size_t u = index.row(t.metabolite);
      const std::size_t v = index.row(t.gene);
      const double w = vertex_weights.empty() ? 1.0 : std::min(vertex_weights[u], vertex_weights[v]);
      edges.emplace_back(u, v, w);
    }
  }
  return WeightedAdjacency::from_edges(index.size(), edges);
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double silu(double x) noexcept { return x * sigmoid(x); }

double silu_grad(double x) noexcept {
  const double s = sigmoid(x);
  return s * (1.0 + x * (1.0 - s));
}

Matrix propagate(const WeightedAdjacency& adj, const Matrix& h) {
  if (adj.rows() != h.rows()) throw Error(ErrorCode::DimMismatch, "adjacency and embedding row counts differ");
  const auto scale = degree_scale(adj);
  Matrix out(h.rows(), h.cols());
  for (std::size_t u = 0; u < h.rows(); ++u) {
    auto row = out.row(u);
    kernels::axpy(scale[u] * scale[u], h.row(u), row);
    for (std::size_t e = adj.offsets[u]; e < adj.offsets[u + 1]; ++e) {
      const std::size_t v = adj.cols[e];
      if (adj.weights[e] == 0.0) continue;
      kernels::axpy(adj.weights[e] * scale[u] * scale[v], h.row(v), row);
    }
  }
  return out;
}

Matrix gcn_forward(const Matrix& h, const WeightedAdjacency& adj, const Matrix& weight) {
  Matrix z;
  matmul(propagate(adj, h), weight, z);
  for (double& x : z.flat()) x = silu(x);
  return z;
}

Matrix highway_forward(const Matrix& v_in, const Matrix& v_agg, const Matrix& gate_weight, const Matrix& gate_bias) {
  require_same_shape(v_in, v_agg, "highway inputs differ in shape");
  if (gate_bias.rows() != 1 || gate_bias.cols() != v_in.cols()) throw Error(ErrorCode::DimMismatch, "gate bias shape");
  Matrix gate;
  matmul(v_in, gate_weight, gate);
  Matrix out(v_in.rows(), v_in.cols());
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < out.cols(); ++c) {
      const double g = sigmoid(gate(r, c) + gate_bias(0, c));
      out(r, c) = g * v_agg(r, c) + (1.0 - g) * v_in(r, c);
    }
  }
  return out;
}

AttentionReadout gat_readout(const Matrix& h, const WeightedAdjacency& adj, const Matrix& proj, const Matrix& attn_src,
                             const Matrix& attn_dst, double leaky_slope) {
  if (adj.rows() != h.rows()) throw Error(ErrorCode::DimMismatch, "adjacency and embedding row counts differ");
  Matrix z;
  matmul(h, proj, z);
  if (attn_src.cols() != z.cols() || attn_dst.cols() != z.cols()) throw Error(ErrorCode::DimMismatch, "attention vector");
  auto pass = attend(z, adj, attn_src, attn_dst, leaky_slope);
  return {concat_columns(h, pass.pooled), std::move(pass.coefficients)};
}

EncoderParams EncoderParams::init(std::size_t dim, std::size_t layers, Rng& rng) {
  if (layers < 1 || layers > 3) throw Error(ErrorCode::ConfigInvalid, "encoder layer count must be 1, 2 or 3");
  if (dim < 1) throw Error(ErrorCode::ConfigInvalid, "encoder dim must be >= 1");
  EncoderParams p;
  const double b = bound_for(dim);
  for (std::size_t l = 0; l < layers; ++l) {
    const std::string tag = "encoder.layer" + std::to_string(l);
    p.layer_weight.emplace_back(tag + ".weight", Matrix::uniform(dim, dim, b, rng));
    p.gate_weight.emplace_back(tag + ".gate", Matrix::uniform(dim, dim, b, rng));
    p.gate_bias.emplace_back(tag + ".gate_bias", Matrix(1, dim));
  }
  p.attn_proj = Param("encoder.attn.proj", Matrix::uniform(dim, dim, b, rng));
  p.attn_src = Param("encoder.attn.src", Matrix::uniform(1, dim, b, rng));
  p.attn_dst = Param("encoder.attn.dst", Matrix::uniform(1, dim, b, rng));
  p.out_proj = Param("encoder.out", Matrix::uniform(2 * dim, dim, bound_for(2 * dim), rng));
  return p;
}

std::vector<Param*> EncoderParams::all() {
  std::vector<Param*> out;
  for (std::size_t l = 0; l < layers(); ++l) {
    out.push_back(&layer_weight[l]);
    out.push_back(&gate_weight[l]);
    out.push_back(&gate_bias[l]);
  }
  out.insert(out.end(), {&attn_proj, &attn_src, &attn_dst, &out_proj});
  return out;
}

void EncoderParams::zero_grad() {
  for (Param* p : all()) p->zero_grad();
}

Matrix encode(const Matrix& x0, const WeightedAdjacency& adj, const EncoderParams& params, EncoderTrace* trace,
              double leaky_slope) {
  if (x0.cols() != params.dim()) {
    throw Error(ErrorCode::DimMismatch, "encoder input dim " + std::to_string(x0.cols()) + " != " +
                                            std::to_string(params.dim()));
  }
  EncoderTrace local;
  EncoderTrace& t = trace ? *trace : local;
  t = EncoderTrace{};
  Matrix h = x0;
  for (std::size_t l = 0; l < params.layers(); ++l) {
    Matrix s = propagate(adj, h);
    Matrix z;
    matmul(s, params.layer_weight[l].value, z);
    Matrix agg = z;
    for (double& x : agg.flat()) x = silu(x);
    Matrix g;
    matmul(h, params.gate_weight[l].value, g);
    const auto bias = params.gate_bias[l].value.row(0);
    Matrix next(h.rows(), h.cols());
    for (std::size_t r = 0; r < h.rows(); ++r) {
      for (std::size_t c = 0; c < h.cols(); ++c) {
        const double gv = sigmoid(g(r, c) + bias[c]);
        g(r, c) = gv;
        next(r, c) = gv * agg(r, c) + (1.0 - gv) * h(r, c);
      }
    }
    t.layer_in.push_back(std::move(h));
    t.propagated.push_back(std::move(s));
    t.pre_activation.push_back(std::move(z));
    t.aggregated.push_back(std::move(agg));
    t.gate.push_back(std::move(g));
    h = std::move(next);
  }
  t.top = std::move(h);
  matmul(t.top, params.attn_proj.value, t.projected);
  auto pass = attend(t.projected, adj, params.attn_src.value, params.attn_dst.value, leaky_slope);
  t.logits = std::move(pass.logits);
  t.coefficients = std::move(pass.coefficients);
  t.readout = concat_columns(t.top, pass.pooled);
  matmul(t.readout, params.out_proj.value, t.output);
  Matrix e = t.output;
  t.norms.assign(e.rows(), 0.0);
  for (std::size_t r = 0; r < e.rows(); ++r) {
    auto row = e.row(r);
    t.norms[r] = kernels::abs_sum(row);
    if (t.norms[r] > 0.0) {
      for (double& x : row) x /= t.norms[r];
    }
  }
  return e;
}

Matrix encode_backward(const Matrix& d_embeddings, const WeightedAdjacency& adj, EncoderParams& params,
                       const EncoderTrace& t, double leaky_slope) {
  const std::size_t n = t.output.rows();
  const std::size_t d = params.dim();
  require_same_shape(d_embeddings, t.output, "embedding gradient shape");

  // Row normalisation: e = y / |y|_1.
  Matrix d_out(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    const double norm = t.norms[r];
    if (norm <= 0.0) continue;
    const auto y = t.output.row(r);
    const auto de = d_embeddings.row(r);
    double inner = 0.0;
    for (std::size_t c = 0; c < d; ++c) inner += de[c] * y[c];
    inner /= norm;
    for (std::size_t c = 0; c < d; ++c) {
      const double sign = y[c] > 0.0 ? 1.0 : (y[c] < 0.0 ? -1.0 : 0.0);
      d_out(r, c) = (de[c] - sign * inner) / norm;
    }
  }

  matmul_at_b(t.readout, d_out, params.out_proj.grad, true);
  Matrix d_readout;
  matmul_a_bt(d_out, params.out_proj.value, d_readout);

  Matrix d_top(n, d);
  Matrix d_pooled(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    const auto src = d_readout.row(r);
    std::copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(d), d_top.row(r).begin());
    std::copy(src.begin() + static_cast<std::ptrdiff_t>(d), src.end(), d_pooled.row(r).begin());
  }

  // Attention readout.
  const Matrix& z = t.projected;
  Matrix d_z(n, d);
  std::vector<double> d_src(n, 0.0), d_dst(n, 0.0);
  std::vector<double> d_coef;
  for (std::size_t u = 0; u < n; ++u) {
    const std::size_t lo = adj.offsets[u];
    const std::size_t hi = adj.offsets[u + 1];
    d_coef.assign(hi - lo, 0.0);
    double weighted = 0.0;
    for (std::size_t e = lo; e < hi; ++e) {
      const double a = t.coefficients[e];
      if (a == 0.0) continue;
      const std::size_t v = adj.cols[e];
      d_coef[e - lo] = kernels::dot(d_pooled.row(u), z.row(v));
      weighted += a * d_coef[e - lo];
      kernels::axpy(a, d_pooled.row(u), d_z.row(v));
    }
    for (std::size_t e = lo; e < hi; ++e) {
      const double a = t.coefficients[e];
      if (a == 0.0) continue;
      const double d_logit = a * (d_coef[e - lo] - weighted) * leaky_grad(t.logits[e], leaky_slope);
      d_src[u] += d_logit;
      d_dst[adj.cols[e]] += d_logit;
    }
  }
  auto g_src = params.attn_src.grad.row(0);
  auto g_dst = params.attn_dst.grad.row(0);
  for (std::size_t u = 0; u < n; ++u) {
    if (d_src[u] != 0.0) {
      kernels::axpy(d_src[u], params.attn_src.value.row(0), d_z.row(u));
      kernels::axpy(d_src[u], z.row(u), g_src);
    }
    if (d_dst[u] != 0.0) {
      kernels::axpy(d_dst[u], params.attn_dst.value.row(0), d_z.row(u));
      kernels::axpy(d_dst[u], z.row(u), g_dst);
    }
  }
  matmul_at_b(t.top, d_z, params.attn_proj.grad, true);
  matmul_a_bt(d_z, params.attn_proj.value, d_top, true);

  // GCN + highway stack, last layer first.
  Matrix d_h = std::move(d_top);
  for (std::size_t li = params.layers(); li-- > 0;) {
    const Matrix& h = t.layer_in[li];
    const Matrix& g = t.gate[li];
    const Matrix& agg = t.aggregated[li];
    const Matrix& z_pre = t.pre_activation[li];
    Matrix d_in(n, d);
    Matrix d_gate_pre(n, d);
    Matrix d_z_pre(n, d);
    auto g_bias = params.gate_bias[li].grad.row(0);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < d; ++c) {
        const double up = d_h(r, c);
        const double gv = g(r, c);
        d_in(r, c) = up * (1.0 - gv);
        d_z_pre(r, c) = up * gv * silu_grad(z_pre(r, c));
        const double dg = up * (agg(r, c) - h(r, c)) * gv * (1.0 - gv);
        d_gate_pre(r, c) = dg;
        g_bias[c] += dg;
      }
    }
    matmul_at_b(h, d_gate_pre, params.gate_weight[li].grad, true);
    matmul_a_bt(d_gate_pre, params.gate_weight[li].value, d_in, true);
    matmul_at_b(t.propagated[li], d_z_pre, params.layer_weight[li].grad, true);
    Matrix d_s;
    matmul_a_bt(d_z_pre, params.layer_weight[li].value, d_s);
    const Matrix back = propagate(adj, d_s);  // the normalised adjacency is symmetric
    for (std::size_t i = 0; i < d_in.size(); ++i) d_in.flat()[i] += back.flat()[i];
    d_h = std::move(d_in);
  }
  return d_h;
}

AlignmentBatch sample_alignment_batch(std::span<const InterLink> positives, const JointIndex& index, std::size_t rate,
                                      double margin, Rng& rng) {
  if (positives.empty()) throw Error(ErrorCode::EmptyInput, "alignment batch needs at least one positive link");
  AlignmentBatch batch;
  batch.positives.assign(positives.begin(), positives.end());
  batch.per_positive = rate;
  batch.margin = margin;
  batch.negatives.reserve(positives.size() * rate);
  for (const InterLink& p : positives) {
    const Kind kind = p.left.kind;
    const std::size_t n_left = index.count(0, kind);
    const std::size_t n_right = index.count(1, kind);
    if (n_left < 2 && n_right < 2) throw Error(ErrorCode::Exhausted, "no alternative vertices to corrupt a link with");
    for (std::size_t j = 0; j < rate; ++j) {
      bool corrupt_left = rng.coin();
      if (corrupt_left && n_left < 2) corrupt_left = false;
      if (!corrupt_left && n_right < 2) corrupt_left = true;
      InterLink neg = p;
      VertexId& side = corrupt_left ? neg.left : neg.right;
      const std::size_t count = corrupt_left ? n_left : n_right;
      const auto offset = static_cast<std::uint32_t>(1 + rng.uniform_index(count - 1));
      side.index = static_cast<std::uint32_t>((side.index + offset) % count);
      neg.provenance = Provenance::Inferred;
      batch.negatives.push_back(neg);
    }
  }
  return batch;
}

LossResult alignment_loss(const AlignmentBatch& batch, const Matrix& embeddings, const JointIndex& index,
                          Matrix* d_embeddings) {
  if (batch.positives.empty()) throw Error(ErrorCode::EmptyInput, "alignment loss over an empty batch");
  if (batch.margin <= 0.0) throw Error(ErrorCode::InvalidArgument, "margin must be positive");
  if (batch.negatives.size() != batch.positives.size() * batch.per_positive) {
    throw Error(ErrorCode::InvalidArgument, "negatives must come in equal groups per positive");
  }
  if (d_embeddings && (d_embeddings->rows() != embeddings.rows() || d_embeddings->cols() != embeddings.cols())) {
    *d_embeddings = Matrix(embeddings.rows(), embeddings.cols());
  }
  const auto& ops = kernels::active();
  const std::size_t dim = embeddings.cols();
  LossResult result;
  for (std::size_t i = 0; i < batch.positives.size(); ++i) {
    const auto& p = batch.positives[i];
    const std::size_t pl = index.row(p.left);
    const std::size_t pr = index.row(p.right);
    const double d_pos = ops.l1_distance(embeddings.row(pl).data(), embeddings.row(pr).data(), dim);
    for (std::size_t j = 0; j < batch.per_positive; ++j) {
      const auto& n = batch.negatives[i * batch.per_positive + j];
      const std::size_t nl = index.row(n.left);
      const std::size_t nr = index.row(n.right);
      const double d_neg = ops.l1_distance(embeddings.row(nl).data(), embeddings.row(nr).data(), dim);
      const double term = d_pos - d_neg + batch.margin;
      if (term <= 0.0) continue;
      result.loss += term;
      ++result.active_terms;
      if (d_embeddings) {
        Matrix& g = *d_embeddings;
        ops.l1_distance_grad(1.0, embeddings.row(pl).data(), embeddings.row(pr).data(), g.row(pl).data(),
                             g.row(pr).data(), dim);
        ops.l1_distance_grad(-1.0, embeddings.row(nl).data(), embeddings.row(nr).data(), g.row(nl).data(),
                             g.row(nr).data(), dim);
      }
    }
  }
  return result;
}

double mean_link_distance(std::span<const InterLink> links, const Matrix& embeddings, const JointIndex& index) {
  if (links.empty()) return 0.0;
  double total = 0.0;
  for (const auto& l : links) total += manhattan(embeddings.row(index.row(l.left)), embeddings.row(index.row(l.right)));
  return total / static_cast<double>(links.size());
}

AlignmentModel::AlignmentModel(const AlignConfig& config, const JointIndex& index, const FeatureTable* features_a,
                               const FeatureTable* features_b)
    : config_(config),
      index_(&index),
      adam_(AdamConfig{.learning_rate = config.learning_rate}),
      rng_(derive_seed(config.seed, "align.sampling")) {
  Rng init(derive_seed(config.seed, "align.init"));
  if (config.use_features) {
    if (!features_a || !features_b) throw Error(ErrorCode::MissingFeatures, "feature tables required when fusion is on");
    fusion_batch_ = std::make_unique<FusionBatch>(*features_a, *features_b, index);
    fusion_ = FusionParams::init(fusion_batch_->dims(), config.modality_dim, config.dim, init);
  } else {
    free_inputs_ = Param("inputs", random_init(index.size(), config.dim, derive_seed(config.seed, "align.inputs")));
  }
  encoder_ = EncoderParams::init(config.dim, config.layers, init);
}

std::vector<Param*> AlignmentModel::parameters() {
  std::vector<Param*> out = encoder_.all();
  if (fusion_batch_) {
    for (Param* p : fusion_.all()) out.push_back(p);
  } else {
    out.push_back(&free_inputs_);
  }
  return out;
}

Matrix AlignmentModel::inputs() { return fusion_batch_ ? fusion_batch_->forward(fusion_) : free_inputs_.value; }

Matrix AlignmentModel::initial_embeddings() { return l1_normalized(inputs()); }

Matrix AlignmentModel::embed(const WeightedAdjacency& adj) { return encode(inputs(), adj, encoder_); }

double AlignmentModel::train_epoch(std::span<const InterLink> positives, const WeightedAdjacency& adj) {
  const auto params = parameters();
  for (Param* p : params) p->zero_grad();
  const Matrix x0 = inputs();
  EncoderTrace trace;
  const Matrix e = encode(x0, adj, encoder_, &trace);
  const auto batch = sample_alignment_batch(positives, *index_, config_.negatives, config_.margin, rng_);
  Matrix d_e(e.rows(), e.cols());
  const LossResult loss = alignment_loss(batch, e, *index_, &d_e);
  if (!std::isfinite(loss.loss)) {
    throw Error(ErrorCode::Divergence, "alignment loss is not finite at epoch " + std::to_string(epoch_ + 1));
  }
  const Matrix d_x0 = encode_backward(d_e, adj, encoder_, trace);
  if (fusion_batch_) {
    fusion_batch_->backward(d_x0, fusion_);
  } else {
    for (std::size_t i = 0; i < d_x0.size(); ++i) free_inputs_.grad.flat()[i] += d_x0.flat()[i];
  }
  adam_.step(params);
  ++epoch_;
  return loss.loss;
}

void AlignmentModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(kAlignMagic, 8);
  write_pod<std::int32_t>(out, epoch_);
  write_params(out, const_cast<AlignmentModel*>(this)->parameters());
  adam_.save(out);
  rng_.save(out);
}

void AlignmentModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingCheckpoint, "cannot open checkpoint " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::string(magic, 8) != kAlignMagic) throw Error(ErrorCode::BadCheckpoint, path.string() + " is not an alignment checkpoint");
  epoch_ = read_pod<std::int32_t>(in);
  read_params(in, parameters());
  adam_.load(in);
  rng_.load(in);
}

void write_loss_trace(const std::filesystem::path& path, std::span<const AlignmentEpoch> trace) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.precision(10);
  out << "epoch,loss,mean_seed_distance\n";
  for (const auto& e : trace) out << e.epoch << ',' << e.loss << ',' << e.mean_seed_distance << '\n';
}

}  // namespace mgkt
