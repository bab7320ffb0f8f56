#include "plc/core/fileio.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

namespace plc {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path, "cannot open for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const fs::path& path, const std::string& bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(path, "cannot open for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw DataError(path, "write failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw DataError(path, "rename failed: " + ec.message());
  }
}

namespace {

std::string pnm_header(const char* magic, int height, int width) {
  return std::string(magic) + "\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
}

// Parses "Px\n<w> <h>\n<maxval>\n" (comments allowed) and returns the payload offset.
std::size_t parse_pnm_header(const fs::path& path, const std::string& bytes, const char* magic,
                             int& height, int& width) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> int {
    skip_space();
    std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (start == pos) throw DataError(path, "malformed image header");
    return std::stoi(bytes.substr(start, pos - start));
  };
  if (bytes.compare(0, 2, magic) != 0) throw DataError(path, std::string("expected ") + magic + " image");
  pos = 2;
  width = read_int();
  height = read_int();
  const int maxval = read_int();
  if (maxval != 255) throw DataError(path, "only 8-bit images are supported");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw DataError(path, "malformed image header");
  }
  ++pos;
  if (height <= 0 || width <= 0) throw DataError(path, "empty image");
  return pos;
}

}  // namespace

void write_ppm(const fs::path& path, int height, int width, const std::vector<std::uint8_t>& rgb) {
  if (rgb.size() != static_cast<std::size_t>(height) * width * 3) {
    throw std::invalid_argument("write_ppm: buffer size does not match image size");
  }
  std::string bytes = pnm_header("P6", height, width);
  bytes.append(rgb.begin(), rgb.end());
  write_file_atomic(path, bytes);
}

void read_ppm(const fs::path& path, int& height, int& width, std::vector<std::uint8_t>& rgb) {
  const std::string bytes = read_file(path);
  const std::size_t pos = parse_pnm_header(path, bytes, "P6", height, width);
  const std::size_t n = static_cast<std::size_t>(height) * width * 3;
  if (bytes.size() - pos != n) throw DataError(path, "truncated or oversized pixel data");
  rgb.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
}

void write_pgm(const fs::path& path, const BinaryMap& map) {
  std::string bytes = pnm_header("P5", map.height, map.width);
  bytes.append(map.cells.begin(), map.cells.end());
  write_file_atomic(path, bytes);
}

BinaryMap read_pgm(const fs::path& path) {
  const std::string bytes = read_file(path);
  int height = 0, width = 0;
  const std::size_t pos = parse_pnm_header(path, bytes, "P5", height, width);
  BinaryMap map(height, width);
  if (bytes.size() - pos != map.cells.size()) throw DataError(path, "truncated or oversized pixel data");
  for (std::size_t i = 0; i < map.cells.size(); ++i) {
    const auto v = static_cast<std::uint8_t>(bytes[pos + i]);
    if (v > 1) throw DataError(path, "label values must be 0 or 1");
    map.cells[i] = v;
  }
  return map;
}

}  // namespace plc
