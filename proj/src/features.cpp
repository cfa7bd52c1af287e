#include "mgkt/features.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mgkt/error.hpp"
#include "mgkt/log.hpp"

namespace mgkt {
namespace {

static_assert(std::endian::native == std::endian::little, "binary feature format assumes little-endian host");

bool is_text_format(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return ext == ".tsv" || ext == ".txt";
}

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool get(std::istream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return static_cast<bool>(in);
}

std::vector<double> widen(const std::vector<float>& v) { return {v.begin(), v.end()}; }

void check_dim(std::size_t& expected, std::size_t got, const FeatureRecord& r) {
  if (expected == 0) {
    expected = got;
  } else if (expected != got) {
    throw Error(ErrorCode::DimMismatch, "feature '" + std::string(to_string(r.field)) + "' of " + r.vertex_id +
                                            " has dim " + std::to_string(got) + ", expected " +
                                            std::to_string(expected));
  }
}

double fan_in_bound(std::size_t fan_in) { return 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1))); }

}  // namespace

std::string_view to_string(FeatureField field) noexcept {
  switch (field) {
    case FeatureField::Surface: return "surface";
    case FeatureField::Description: return "description";
    case FeatureField::Smiles: return "smiles";
    case FeatureField::Sequence: return "sequence";
  }
  return "unknown";
}

std::optional<FeatureField> parse_feature_field(std::string_view name) noexcept {
  if (name == "surface") return FeatureField::Surface;
  if (name == "description") return FeatureField::Description;
  if (name == "smiles") return FeatureField::Smiles;
  if (name == "sequence") return FeatureField::Sequence;
  return std::nullopt;
}

void write_feature_file(const std::filesystem::path& path, std::span<const FeatureRecord> records) {
  if (is_text_format(path)) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out.precision(9);
    for (const auto& r : records) {
      out << r.vertex_id << '\t' << to_string(r.field) << '\t';
      for (std::size_t i = 0; i < r.values.size(); ++i) out << (i ? " " : "") << r.values[i];
      out << '\n';
    }
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  for (const auto& r : records) {
    put(out, static_cast<std::uint32_t>(r.vertex_id.size()));
    out.write(r.vertex_id.data(), static_cast<std::streamsize>(r.vertex_id.size()));
    put(out, static_cast<std::uint8_t>(r.field));
    put(out, static_cast<std::uint32_t>(r.values.size()));
    out.write(reinterpret_cast<const char*>(r.values.data()),
              static_cast<std::streamsize>(r.values.size() * sizeof(float)));
  }
}

std::vector<FeatureRecord> read_feature_file(const std::filesystem::path& path) {
  std::vector<FeatureRecord> records;
  if (is_text_format(path)) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line.front() == '#') continue;
      const auto t1 = line.find('\t');
      const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
      if (t2 == std::string::npos) {
        throw Error(ErrorCode::MalformedLine, path.string() + ":" + std::to_string(line_no) + ": expected 3 fields");
      }
      FeatureRecord r;
      r.vertex_id = line.substr(0, t1);
      const auto field = parse_feature_field(std::string_view(line).substr(t1 + 1, t2 - t1 - 1));
      if (!field) throw Error(ErrorCode::MalformedLine, path.string() + ":" + std::to_string(line_no) + ": unknown field");
      r.field = *field;
      std::istringstream values(line.substr(t2 + 1));
      float v = 0.0F;
      while (values >> v) r.values.push_back(v);
      records.push_back(std::move(r));
    }
    return records;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  while (true) {
    std::uint32_t id_len = 0;
    if (!get(in, id_len)) break;
    FeatureRecord r;
    r.vertex_id.resize(id_len);
    in.read(r.vertex_id.data(), id_len);
    std::uint8_t tag = 0;
    std::uint32_t dim = 0;
    if (!in || !get(in, tag) || !get(in, dim) || tag < 1 || tag > 4) {
      throw Error(ErrorCode::MalformedLine, path.string() + ": corrupt feature block #" + std::to_string(records.size()));
    }
    r.field = static_cast<FeatureField>(tag);
    r.values.resize(dim);
    in.read(reinterpret_cast<char*>(r.values.data()), static_cast<std::streamsize>(dim * sizeof(float)));
    if (!in) throw Error(ErrorCode::MalformedLine, path.string() + ": truncated feature block");
    records.push_back(std::move(r));
  }
  return records;
}

FeatureTable::FeatureTable(FeatureDims dims, std::size_t genes, std::size_t metabolites) : dims_(dims) {
  bundles_[static_cast<int>(Kind::Gene)].resize(genes);
  bundles_[static_cast<int>(Kind::Metabolite)].resize(metabolites);
}

FeatureTable build_feature_table(std::span<const FeatureRecord> records, const MetabolicGraph& graph) {
  FeatureDims dims;
  FeatureTable table(dims, graph.num_genes(), graph.num_metabolites());
  std::size_t unknown = 0;
  for (const auto& r : records) {
    bool used = false;
    for (const Kind kind : kKinds) {
      if (r.field == FeatureField::Smiles && kind != Kind::Metabolite) continue;
      if (r.field == FeatureField::Sequence && kind != Kind::Gene) continue;
      const auto v = graph.find(kind, r.vertex_id);
      if (!v) continue;
      used = true;
      FeatureBundle& b = table.at(*v);
      switch (r.field) {
        case FeatureField::Surface:
          check_dim(dims.surface, r.values.size(), r);
          b.surface = widen(r.values);
          break;
        case FeatureField::Description:
          check_dim(dims.description, r.values.size(), r);
          b.description = widen(r.values);
          break;
        case FeatureField::Smiles:
          check_dim(dims.smiles, r.values.size(), r);
          b.modality = widen(r.values);
          break;
        case FeatureField::Sequence:
          check_dim(dims.sequence, r.values.size(), r);
          b.modality = widen(r.values);
          break;
      }
    }
    if (!used) ++unknown;
  }
  if (unknown > 0) log::warn("skipped " + std::to_string(unknown) + " feature record(s) with unknown vertex ids");
  FeatureTable out(dims, graph.num_genes(), graph.num_metabolites());
  for (const Kind kind : kKinds) {
    for (const VertexId v : graph.vertices(kind)) {
      FeatureBundle& b = table.at(v);
      if (b.surface.empty() || b.description.empty()) {
        throw Error(ErrorCode::MissingFeatures,
                    std::string(to_string(kind)) + " " + graph.name(v) + " lacks surface/description vectors");
      }
      out.at(v) = std::move(b);
    }
  }
  return out;
}

FeatureTable load_features(const std::filesystem::path& path, const MetabolicGraph& graph) {
  const auto records = read_feature_file(path);
  return build_feature_table(records, graph);
}

FusionParams FusionParams::init(const FeatureDims& dims, std::size_t projected_dim, std::size_t out_dim, Rng& rng) {
  FusionParams p;
  p.text_dim = dims.text();
  p.smiles_proj = Param("fusion.smiles", Matrix::uniform(dims.smiles, projected_dim, fan_in_bound(dims.smiles), rng));
  p.sequence_proj =
      Param("fusion.sequence", Matrix::uniform(dims.sequence, projected_dim, fan_in_bound(dims.sequence), rng));
  const std::size_t in = dims.text() + projected_dim;
  p.shared_proj = Param("fusion.shared", Matrix::uniform(in, out_dim, fan_in_bound(in), rng));
  return p;
}

void FusionParams::zero_grad() {
  smiles_proj.zero_grad();
  sequence_proj.zero_grad();
  shared_proj.zero_grad();
}

std::vector<double> fuse(const FeatureBundle& bundle, Kind kind, const FusionParams& params) {
  const std::size_t text = params.text_dim;
  const std::size_t p = params.projected_dim();
  if (bundle.surface.size() + bundle.description.size() != text) {
    throw Error(ErrorCode::DimMismatch, "text features do not match the shared projection");
  }
  std::vector<double> concat(text + p, 0.0);
  std::copy(bundle.surface.begin(), bundle.surface.end(), concat.begin());
  std::copy(bundle.description.begin(), bundle.description.end(),
            concat.begin() + static_cast<std::ptrdiff_t>(bundle.surface.size()));
  if (bundle.modality) {
    const Matrix& proj = kind == Kind::Metabolite ? params.smiles_proj.value : params.sequence_proj.value;
    if (bundle.modality->size() != proj.rows()) {
      throw Error(ErrorCode::DimMismatch, "modality vector does not match its projection");
    }
    for (std::size_t r = 0; r < proj.rows(); ++r) {
      const double x = (*bundle.modality)[r];
      for (std::size_t c = 0; c < p; ++c) concat[text + c] += x * proj(r, c);
    }
  }
  const Matrix& shared = params.shared_proj.value;
  std::vector<double> out(shared.cols(), 0.0);
  for (std::size_t r = 0; r < shared.rows(); ++r) {
    const double x = concat[r];
    if (x == 0.0) continue;
    for (std::size_t c = 0; c < shared.cols(); ++c) out[c] += x * shared(r, c);
  }
  return out;
}

Matrix random_init(std::size_t rows, std::size_t dim, std::uint64_t seed) {
  if (dim < 1) throw Error(ErrorCode::InvalidArgument, "embedding dim must be >= 1");
  Rng rng(seed);
  return Matrix::uniform(rows, dim, 1.0 / std::sqrt(static_cast<double>(dim)), rng);
}

Matrix random_init(const MetabolicGraph& graph, std::size_t dim, std::uint64_t seed) {
  return random_init(graph.num_vertices(), dim, seed);
}

FusionBatch::FusionBatch(const FeatureTable& a, const FeatureTable& b, const JointIndex& index) {
  if (!(a.dims() == b.dims())) {
    // Both graphs go through one set of projections, so their layouts must agree.
    const auto& x = a.dims();
    const auto& y = b.dims();
    if (x.surface != y.surface || x.description != y.description ||
        (x.smiles && y.smiles && x.smiles != y.smiles) || (x.sequence && y.sequence && x.sequence != y.sequence)) {
      throw Error(ErrorCode::DimMismatch, "feature tables of the two graphs disagree on dimensions");
    }
  }
  dims_ = a.dims();
  dims_.smiles = std::max(a.dims().smiles, b.dims().smiles);
  dims_.sequence = std::max(a.dims().sequence, b.dims().sequence);
  text_ = Matrix(index.size(), dims_.text());
  std::vector<const std::vector<double>*> smiles;
  std::vector<const std::vector<double>*> sequence;
  for (std::size_t row = 0; row < index.size(); ++row) {
    const VertexId v = index.vertex(row);
    const FeatureTable& table = v.graph == 0 ? a : b;
    const FeatureBundle& bundle = table.at(v);
    auto dst = text_.row(row);
    std::copy(bundle.surface.begin(), bundle.surface.end(), dst.begin());
    std::copy(bundle.description.begin(), bundle.description.end(),
              dst.begin() + static_cast<std::ptrdiff_t>(dims_.surface));
    if (bundle.modality) {
      if (v.kind == Kind::Metabolite) {
        smiles_rows_.push_back(row);
        smiles.push_back(&*bundle.modality);
      } else {
        sequence_rows_.push_back(row);
        sequence.push_back(&*bundle.modality);
      }
    }
  }
  smiles_ = Matrix(smiles.size(), dims_.smiles);
  for (std::size_t i = 0; i < smiles.size(); ++i) std::copy(smiles[i]->begin(), smiles[i]->end(), smiles_.row(i).begin());
  sequence_ = Matrix(sequence.size(), dims_.sequence);
  for (std::size_t i = 0; i < sequence.size(); ++i)
    std::copy(sequence[i]->begin(), sequence[i]->end(), sequence_.row(i).begin());
}

Matrix FusionBatch::forward(const FusionParams& params) {
  const std::size_t text = dims_.text();
  const std::size_t p = params.projected_dim();
  if (params.text_dim != text) throw Error(ErrorCode::DimMismatch, "fusion params text dim");
  concat_ = Matrix(text_.rows(), text + p);
  for (std::size_t r = 0; r < text_.rows(); ++r) std::copy(text_.row(r).begin(), text_.row(r).end(), concat_.row(r).begin());
  const auto project = [&](const Matrix& inputs, const std::vector<std::size_t>& rows, const Param& proj) {
    if (rows.empty()) return;
    Matrix projected;
    matmul(inputs, proj.value, projected);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::copy(projected.row(i).begin(), projected.row(i).end(), concat_.row(rows[i]).begin() + static_cast<std::ptrdiff_t>(text));
    }
  };
  project(smiles_, smiles_rows_, params.smiles_proj);
  project(sequence_, sequence_rows_, params.sequence_proj);
  Matrix out;
  matmul(concat_, params.shared_proj.value, out);
  return out;
}

void FusionBatch::backward(const Matrix& d_out, FusionParams& params) const {
  const std::size_t text = dims_.text();
  const std::size_t p = params.projected_dim();
  matmul_at_b(concat_, d_out, params.shared_proj.grad, true);
  Matrix d_concat;
  matmul_a_bt(d_out, params.shared_proj.value, d_concat);
  const auto back = [&](const Matrix& inputs, const std::vector<std::size_t>& rows, Param& proj) {
    if (rows.empty()) return;
    Matrix d_proj(rows.size(), p);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto src = d_concat.row(rows[i]).subspan(text, p);
      std::copy(src.begin(), src.end(), d_proj.row(i).begin());
    }
    matmul_at_b(inputs, d_proj, proj.grad, true);
  };
  back(smiles_, smiles_rows_, params.smiles_proj);
  back(sequence_, sequence_rows_, params.sequence_proj);
}

}  // namespace mgkt
