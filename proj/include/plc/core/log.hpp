#pragma once

#include <string_view>

namespace plc::log {

// Warnings go to stderr; quiet mode suppresses them (used by tests).
void warn(std::string_view message);
void info(std::string_view message);
void set_quiet(bool quiet);

}  // namespace plc::log
