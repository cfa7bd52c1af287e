#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "mgkt/matrix.hpp"

namespace mgkt {

struct AdamConfig {
  double learning_rate = 4e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adaptive-moment gradient descent. Moment buffers are bound to parameters
/// by position, so step() must always receive the same parameter list.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  void step(std::span<Param* const> params);

  const AdamConfig& config() const noexcept { return config_; }
  long steps() const noexcept { return t_; }

  void save(std::ostream& out) const;
  void load(std::istream& in);

 private:
  AdamConfig config_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  long t_ = 0;
};

}  // namespace mgkt
