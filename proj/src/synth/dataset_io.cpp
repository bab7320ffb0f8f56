#include "plc/synth/dataset_io.hpp"

#include <algorithm>

#include <json.hpp>

#include "plc/core/fileio.hpp"

namespace plc::synth {

namespace fs = std::filesystem;
using nlohmann::json;

std::string annotation_to_json(const Annotation& a) {
  json doc;
  doc["image_id"] = a.image_id;
  doc["region_index"] = a.anchor.region_index;
  doc["height"] = a.anchor.height;
  doc["width"] = a.anchor.width;
  doc["left_bottom"] = {a.anchor.x_lb, a.anchor.y_lb};
  doc["resolution"] = a.anchor.resolution;
  json lanes = json::array();
  for (const auto& lane : a.lanes) {
    json pts = json::array();
    for (const auto& p : lane.points) pts.push_back({p.x, p.y});
    lanes.push_back({{"track_id", lane.track_id}, {"role", std::string(to_string(lane.role))}, {"points", std::move(pts)}});
  }
  doc["lanes"] = std::move(lanes);
  return doc.dump(1) + "\n";
}

Annotation annotation_from_json(const std::string& text) {
  const json doc = json::parse(text);
  Annotation a;
  a.image_id = doc.at("image_id").get<std::string>();
  a.anchor.region_index = doc.at("region_index").get<int>();
  a.anchor.height = doc.at("height").get<int>();
  a.anchor.width = doc.at("width").get<int>();
  a.anchor.x_lb = doc.at("left_bottom").at(0).get<double>();
  a.anchor.y_lb = doc.at("left_bottom").at(1).get<double>();
  a.anchor.resolution = doc.at("resolution").get<double>();
  if (a.anchor.height <= 0 || a.anchor.width <= 0 || !(a.anchor.resolution > 0)) {
    throw std::invalid_argument("annotation: height, width and resolution must be positive");
  }
  for (const auto& item : doc.at("lanes")) {
    LaneInstance lane;
    lane.track_id = item.at("track_id").get<int>();
    lane.role = lane_role_from_string(item.at("role").get<std::string>());
    for (const auto& p : item.at("points")) lane.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    a.lanes.push_back(std::move(lane));
  }
  return a;
}

void write_annotation(const fs::path& path, const Annotation& annotation) {
  write_file_atomic(path, annotation_to_json(annotation));
}

Annotation read_annotation(const fs::path& path) {
  try {
    return annotation_from_json(read_file(path));
  } catch (const json::exception& e) {
    throw DataError(path, e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(path, e.what());
  }
}

void write_sample(const fs::path& dir, const Sample& sample) {
  write_ppm(dir / (sample.image_id + ".ppm"), sample.image.height, sample.image.width, sample.image.rgb);
  write_pgm(dir / (sample.image_id + "_label.pgm"), sample.label);
  Annotation a{sample.image_id, sample.image.anchor, {}};
  a.lanes = sample.initial_lanes;
  a.lanes.insert(a.lanes.end(), sample.gt_lanes.begin(), sample.gt_lanes.end());
  write_annotation(dir / (sample.image_id + ".json"), a);
}

Sample read_sample(const fs::path& dir, const std::string& image_id) {
  const fs::path json_path = dir / (image_id + ".json");
  const fs::path image_path = dir / (image_id + ".ppm");
  const fs::path label_path = dir / (image_id + "_label.pgm");
  const Annotation a = read_annotation(json_path);
  Sample s;
  s.image_id = a.image_id;
  read_ppm(image_path, s.image.height, s.image.width, s.image.rgb);
  if (s.image.height != a.anchor.height || s.image.width != a.anchor.width) {
    throw DataError(image_path, "image size does not match its annotation");
  }
  s.image.anchor = a.anchor;
  for (const auto& lane : a.lanes) {
    if (lane.role == LaneRole::kInitial) s.initial_lanes.push_back(lane);
    else if (lane.role == LaneRole::kGroundTruth) s.gt_lanes.push_back(lane);
  }
  if (fs::exists(label_path)) {
    s.label = read_pgm(label_path);
    if (s.label.height != s.image.height || s.label.width != s.image.width) {
      throw DataError(label_path, "label size does not match the image");
    }
  }
  return s;
}

std::vector<std::string> list_samples(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError(dir, "not a directory");
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") ids.push_back(entry.path().stem().string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<Sample> read_split(const fs::path& dir) {
  std::vector<Sample> out;
  for (const auto& id : list_samples(dir)) out.push_back(read_sample(dir, id));
  return out;
}

void write_dataset(const fs::path& out_dir, const Dataset& data, const SynthParams& params) {
  fs::create_directories(out_dir / "train");
  fs::create_directories(out_dir / "test");
  json manifest;
  manifest["seed"] = params.seed;
  manifest["n_train"] = data.train.size();
  manifest["n_test"] = data.test.size();
  json train = json::array(), test = json::array();
  for (const auto& s : data.train) {
    write_sample(out_dir / "train", s);
    train.push_back(s.image_id);
  }
  for (const auto& s : data.test) {
    write_sample(out_dir / "test", s);
    test.push_back(s.image_id);
  }
  manifest["train"] = std::move(train);
  manifest["test"] = std::move(test);
  manifest["config"] = to_config_text(params);
  // Written last so a manifest implies a complete tree.
  write_file_atomic(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

Manifest read_manifest(const fs::path& data_dir) {
  const fs::path path = data_dir / "manifest.json";
  try {
    const json doc = json::parse(read_file(path));
    Manifest m;
    m.seed = doc.at("seed").get<std::uint64_t>();
    m.train = doc.at("train").get<std::vector<std::string>>();
    m.test = doc.at("test").get<std::vector<std::string>>();
    return m;
  } catch (const json::exception& e) {
    throw DataError(path, e.what());
  }
}

}  // namespace plc::synth
