#include "mgkt/log.hpp"

#include <atomic>
#include <iostream>

namespace mgkt::log {
namespace {
std::atomic<Level> g_level{Level::Warn};
}

void set_level(Level level) noexcept { g_level.store(level); }
Level level() noexcept { return g_level.load(); }

void warn(std::string_view message) {
  if (level() >= Level::Warn) std::clog << "warning: " << message << '\n';
}

void info(std::string_view message) {
  if (level() >= Level::Info) std::clog << message << '\n';
}

}  // namespace mgkt::log
