#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "plc/core/types.hpp"

namespace plc {

// Raised for unreadable or malformed inputs; carries the offending path.
class DataError : public std::runtime_error {
 public:
  DataError(const std::filesystem::path& path, const std::string& what)
      : std::runtime_error(path.string() + ": " + what), path_(path) {}
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary and renames it over `path`, so readers never
// observe a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);

// Binary PPM (P6) for RGB images and PGM (P5) for 0/1 label maps.
void write_ppm(const std::filesystem::path& path, int height, int width,
               const std::vector<std::uint8_t>& rgb);
void read_ppm(const std::filesystem::path& path, int& height, int& width, std::vector<std::uint8_t>& rgb);
void write_pgm(const std::filesystem::path& path, const BinaryMap& map);
BinaryMap read_pgm(const std::filesystem::path& path);

}  // namespace plc
