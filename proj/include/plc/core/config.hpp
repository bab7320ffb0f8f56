#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace plc {

class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::invalid_argument(what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

// Flat "key = value" lines; blank lines and '#' comments are ignored.
// Duplicate keys are an error.
KeyValues parse_key_values(const std::string& text);

double parse_double(const std::string& key, const std::string& value);
std::int64_t parse_int(const std::string& key, const std::string& value);
std::uint64_t parse_uint(const std::string& key, const std::string& value);

// Shortest text that parses back to the same double.
std::string format_double(double value);

}  // namespace plc
