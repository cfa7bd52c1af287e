#include "mgkt/adam.hpp"

#include <cmath>

#include "mgkt/checkpoint.hpp"
#include "mgkt/error.hpp"

namespace mgkt {

void Adam::step(std::span<Param* const> params) {
  if (m_.empty()) {
    for (const Param* p : params) {
      m_.emplace_back(p->value.rows(), p->value.cols());
      v_.emplace_back(p->value.rows(), p->value.cols());
    }
  }
  if (m_.size() != params.size()) throw Error(ErrorCode::InvalidArgument, "Adam parameter list changed");
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  const double lr = config_.learning_rate;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto value = params[i]->value.flat();
    auto grad = params[i]->grad.flat();
    auto m = m_[i].flat();
    auto v = v_[i].flat();
    for (std::size_t j = 0; j < value.size(); ++j) {
      const double g = grad[j];
      m[j] = config_.beta1 * m[j] + (1.0 - config_.beta1) * g;
      v[j] = config_.beta2 * v[j] + (1.0 - config_.beta2) * g * g;
      value[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + config_.epsilon);
    }
  }
}

void Adam::save(std::ostream& out) const {
  write_pod(out, static_cast<std::int64_t>(t_));
  write_pod(out, static_cast<std::uint64_t>(m_.size()));
  for (std::size_t i = 0; i < m_.size(); ++i) {
    write_matrix(out, m_[i]);
    write_matrix(out, v_[i]);
  }
}

void Adam::load(std::istream& in) {
  t_ = static_cast<long>(read_pod<std::int64_t>(in));
  const auto n = read_pod<std::uint64_t>(in);
  m_.clear();
  v_.clear();
  for (std::uint64_t i = 0; i < n; ++i) {
    m_.push_back(read_matrix(in));
    v_.push_back(read_matrix(in));
  }
}

}  // namespace mgkt
