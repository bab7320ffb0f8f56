#include "plc/train/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <sstream>
#include <stdexcept>

#include "plc/core/config.hpp"
#include "plc/core/fileio.hpp"

namespace plc::train {

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  ckpt.params.validate();
  std::ostringstream head;
  head << kCheckpointMagic << "\n";
  head << "version " << ckpt.params.version << "\n";
  head << "epoch " << ckpt.epoch << "\n";
  head << "widths";
  for (int w : ckpt.params.widths) head << " " << w;
  head << "\n";
  const std::string config = to_config_text(ckpt.config);
  int config_lines = 0;
  for (char c : config) config_lines += c == '\n';
  head << "config " << config_lines << "\n" << config;
  head << "history " << ckpt.history.size() << "\n";
  for (const auto& r : ckpt.history) {
    head << r.epoch << " " << format_double(r.seg_loss) << " " << format_double(r.offset_loss) << " "
         << format_double(r.lr) << "\n";
  }
  const auto named = ckpt.params.named_parameters();
  head << "params " << named.size() << "\n";
  for (const auto& p : named) {
    head << p.name << " " << p.tensor.rank();
    for (int d : p.tensor.shape()) head << " " << d;
    head << " " << p.tensor.numel() << "\n";
  }
  head << "end\n";
  std::string out = head.str();
  for (const auto& p : named) {
    const auto values = p.tensor.data();
    const std::size_t at = out.size();
    out.resize(at + values.size() * sizeof(float));
    std::memcpy(out.data() + at, values.data(), values.size() * sizeof(float));
  }
  return out;
}

namespace {

std::string next_line(std::istringstream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument(std::string("checkpoint: truncated header at ") + what);
  return line;
}

std::istringstream fields(std::istringstream& in, const char* keyword) {
  std::istringstream line(next_line(in, keyword));
  std::string key;
  line >> key;
  if (key != keyword) throw std::invalid_argument(std::string("checkpoint: expected '") + keyword + "', got '" + key + "'");
  return line;
}

}  // namespace

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  std::istringstream in(bytes);
  if (next_line(in, "magic") != kCheckpointMagic) throw std::invalid_argument("checkpoint: bad magic");

  Checkpoint ckpt;
  std::string version;
  fields(in, "version") >> version;
  if (version != model::kModelVersion) {
    throw std::invalid_argument("checkpoint: model version '" + version + "' is not " + model::kModelVersion);
  }
  if (!(fields(in, "epoch") >> ckpt.epoch)) throw std::invalid_argument("checkpoint: bad epoch");
  model::StageWidths widths{};
  {
    auto line = fields(in, "widths");
    for (int& w : widths)
      if (!(line >> w) || w <= 0) throw std::invalid_argument("checkpoint: bad stage widths");
  }
  int config_lines = 0;
  if (!(fields(in, "config") >> config_lines) || config_lines < 0) throw std::invalid_argument("checkpoint: bad config count");
  std::string config;
  for (int i = 0; i < config_lines; ++i) config += next_line(in, "config") + "\n";
  ckpt.config = parse_train_config(config);

  std::size_t history = 0;
  if (!(fields(in, "history") >> history)) throw std::invalid_argument("checkpoint: bad history count");
  for (std::size_t i = 0; i < history; ++i) {
    std::istringstream line(next_line(in, "history"));
    EpochRecord r;
    std::string seg, off, lr;
    if (!(line >> r.epoch >> seg >> off >> lr)) throw std::invalid_argument("checkpoint: bad history row");
    r.seg_loss = parse_double("seg_loss", seg);
    r.offset_loss = parse_double("offset_loss", off);
    r.lr = parse_double("lr", lr);
    ckpt.history.push_back(r);
  }

  ckpt.params = model::zero_params<float>(ckpt.config.P, widths);
  const auto named = ckpt.params.named_parameters();
  std::size_t count = 0;
  if (!(fields(in, "params") >> count) || count != named.size()) {
    throw std::invalid_argument("checkpoint: expected " + std::to_string(named.size()) + " parameter entries");
  }
  for (const auto& p : named) {
    std::istringstream line(next_line(in, "params"));
    std::string name;
    int rank = 0;
    line >> name >> rank;
    ad::Shape shape(rank > 0 && rank < 8 ? rank : 0);
    for (int& d : shape) line >> d;
    std::size_t numel = 0;
    line >> numel;
    if (!line || name != p.name || shape != p.tensor.shape() || numel != p.tensor.numel()) {
      throw std::invalid_argument("checkpoint: parameter '" + name + "' " + ad::shape_str(shape) + " does not match '" +
                                  p.name + "' " + ad::shape_str(p.tensor.shape()));
    }
  }
  if (next_line(in, "end") != "end") throw std::invalid_argument("checkpoint: missing 'end'");

  std::size_t offset = static_cast<std::size_t>(in.tellg());
  for (const auto& p : named) {
    const std::size_t n = p.tensor.numel() * sizeof(float);
    if (offset + n > bytes.size()) throw std::invalid_argument("checkpoint: truncated data for '" + p.name + "'");
    auto tensor = p.tensor;
    std::memcpy(tensor.mutable_data().data(), bytes.data() + offset, n);
    offset += n;
  }
  if (offset != bytes.size()) throw std::invalid_argument("checkpoint: trailing bytes after parameter data");
  ckpt.params.set_requires_grad(true);
  ckpt.params.validate();
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  write_file_atomic(path, serialize_checkpoint(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  try {
    return deserialize_checkpoint(bytes);
  } catch (const std::invalid_argument& e) {
    throw DataError(path, e.what());
  }
}

}  // namespace plc::train
