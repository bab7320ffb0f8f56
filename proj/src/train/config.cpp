#include "plc/core/config.hpp"

#include <string>

#include "plc/train/train.hpp"

namespace plc::train {

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* key, const std::string& what) {
    if (!ok) throw ConfigError(key, std::string("key '") + key + "': " + what);
  };
  require(epochs >= 1, "epochs", "must be >= 1");
  require(lr > 0, "lr", "must be > 0");
  require(lr_drop_epoch >= 0, "lr_drop_epoch", "must be >= 0");
  require(lr_after_drop > 0, "lr_after_drop", "must be > 0");
  require(batch_size >= 1, "batch_size", "must be >= 1");
  require(net_height > 0 && net_height % model::kDownsampleFactor == 0, "net_height",
          "must be a positive multiple of 16, got " + std::to_string(net_height));
  require(net_width > 0 && net_width % model::kDownsampleFactor == 0, "net_width",
          "must be a positive multiple of 16, got " + std::to_string(net_width));
  require(M >= 2, "M", "must be >= 2");
  require(P >= 2, "P", "must be >= 2");
  require(seg_loss_weight >= 0, "seg_loss_weight", "must be >= 0");
  require(offset_loss_weight >= 0, "offset_loss_weight", "must be >= 0");
}

TrainConfig parse_train_config(const std::string& text) {
  TrainConfig c;
  for (const auto& [key, value] : parse_key_values(text)) {
    if (key == "epochs") c.epochs = static_cast<int>(parse_int(key, value));
    else if (key == "lr") c.lr = parse_double(key, value);
    else if (key == "lr_drop_epoch") c.lr_drop_epoch = static_cast<int>(parse_int(key, value));
    else if (key == "lr_after_drop") c.lr_after_drop = parse_double(key, value);
    else if (key == "batch_size") c.batch_size = static_cast<int>(parse_int(key, value));
    else if (key == "net_height") c.net_height = static_cast<int>(parse_int(key, value));
    else if (key == "net_width") c.net_width = static_cast<int>(parse_int(key, value));
    else if (key == "M") c.M = static_cast<int>(parse_int(key, value));
    else if (key == "P") c.P = static_cast<int>(parse_int(key, value));
    else if (key == "seg_loss_weight") c.seg_loss_weight = parse_double(key, value);
    else if (key == "offset_loss_weight") c.offset_loss_weight = parse_double(key, value);
    else if (key == "seed") c.seed = parse_uint(key, value);
    else throw ConfigError(key, "unknown config key '" + key + "'");
  }
  c.validate();
  return c;
}

std::string to_config_text(const TrainConfig& c) {
  std::string out;
  auto put = [&](const char* key, const std::string& value) { out += std::string(key) + " = " + value + "\n"; };
  put("epochs", std::to_string(c.epochs));
  put("lr", format_double(c.lr));
  put("lr_drop_epoch", std::to_string(c.lr_drop_epoch));
  put("lr_after_drop", format_double(c.lr_after_drop));
  put("batch_size", std::to_string(c.batch_size));
  put("net_height", std::to_string(c.net_height));
  put("net_width", std::to_string(c.net_width));
  put("M", std::to_string(c.M));
  put("P", std::to_string(c.P));
  put("seg_loss_weight", format_double(c.seg_loss_weight));
  put("offset_loss_weight", format_double(c.offset_loss_weight));
  put("seed", std::to_string(c.seed));
  return out;
}

}  // namespace plc::train
