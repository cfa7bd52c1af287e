#include <atomic>
#include <cstdlib>
#include <string>

#include "mgkt/kernels.hpp"

namespace mgkt::kernels {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(MGKT_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Ops* pick_default() noexcept {
  const Ops* best = avx2_ops();
  if (const char* env = std::getenv("MGKT_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return &scalar_ops();
    if (want == "avx2" && best != nullptr) return best;
  }
  return best != nullptr ? best : &scalar_ops();
}

std::atomic<const Ops*>& current() noexcept {
  static std::atomic<const Ops*> ops{pick_default()};
  return ops;
}

}  // namespace

const Ops* avx2_ops() noexcept {
#if defined(MGKT_HAVE_AVX2)
  static const bool ok = cpu_has_avx2();
  return ok ? detail::avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const Ops& active() noexcept { return *current().load(std::memory_order_relaxed); }

bool select(std::string_view name) noexcept {
  if (name == "scalar") {
    current().store(&scalar_ops());
    return true;
  }
  if (name == "avx2") {
    if (const Ops* ops = avx2_ops()) {
      current().store(ops);
      return true;
    }
  }
  return false;
}

std::vector<std::string_view> available() {
  std::vector<std::string_view> names{"scalar"};
  if (avx2_ops() != nullptr) names.emplace_back("avx2");
  return names;
}

}  // namespace mgkt::kernels
