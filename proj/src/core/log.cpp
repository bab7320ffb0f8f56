#include "plc/core/log.hpp"

#include <atomic>
#include <iostream>

namespace plc::log {
namespace {
std::atomic<bool> g_quiet{false};
}

void warn(std::string_view message) {
  if (!g_quiet) std::cerr << "warning: " << message << '\n';
}

void info(std::string_view message) {
  if (!g_quiet) std::cerr << message << '\n';
}

void set_quiet(bool quiet) { g_quiet = quiet; }

}  // namespace plc::log
