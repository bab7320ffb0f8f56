#pragma once

#include <filesystem>
#include <string>

#include "plc/train/train.hpp"

namespace plc::train {

inline constexpr const char* kCheckpointMagic = "PLCNET1";

// "PLCNET1\n", a text header (model version, epoch, config, loss history and
// one "name rank dims... count" line per parameter, closed by "end"), then the
// parameters as little-endian float32 in header order.
std::string serialize_checkpoint(const Checkpoint& checkpoint);

// Throws std::invalid_argument on a bad magic, header or parameter shape.
Checkpoint deserialize_checkpoint(const std::string& bytes);

// Atomic: written to a temporary file and renamed.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

// Throws DataError naming the path.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace plc::train
