#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "plc/core/types.hpp"
#include "plc/synth/synth.hpp"

namespace plc::synth {

// Sidecar annotation of one image:
//   {"image_id": "...", "region_index": i, "height": H, "width": W,
//    "left_bottom": [X, Y], "resolution": R,
//    "lanes": [{"track_id": t, "role": "initial|ground-truth|corrected",
//               "points": [[x, y], ...]}, ...]}
struct Annotation {
  std::string image_id;
  RegionAnchor anchor;
  std::vector<LaneInstance> lanes;
};

std::string annotation_to_json(const Annotation& annotation);
Annotation annotation_from_json(const std::string& text);

void write_annotation(const std::filesystem::path& path, const Annotation& annotation);
Annotation read_annotation(const std::filesystem::path& path);

// A sample on disk: <id>.ppm (RGB), <id>.json (annotation with initial and
// ground-truth lanes), <id>_label.pgm (0/1 label map).
void write_sample(const std::filesystem::path& dir, const Sample& sample);
Sample read_sample(const std::filesystem::path& dir, const std::string& image_id);

// Sample ids in a split directory, sorted.
std::vector<std::string> list_samples(const std::filesystem::path& dir);
std::vector<Sample> read_split(const std::filesystem::path& dir);

// <out>/train, <out>/test and <out>/manifest.json.
void write_dataset(const std::filesystem::path& out_dir, const Dataset& data, const SynthParams& params);

struct Manifest {
  std::uint64_t seed = 0;
  std::vector<std::string> train;
  std::vector<std::string> test;
};
Manifest read_manifest(const std::filesystem::path& data_dir);

}  // namespace plc::synth
