#include <cmath>
#include <cstdlib>
#include <map>
#include <set>

#include "plc/cli/commands.hpp"
#include "plc/core/fileio.hpp"
#include "plc/core/raster.hpp"
#include "plc/synth/dataset_io.hpp"
#include "plc/train/train.hpp"

namespace plc::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::array<std::uint8_t, 3>, 8> kPalette{{
    {230, 25, 75},
    {255, 225, 25},
    {255, 255, 255},
    {245, 130, 48},
    {145, 30, 180},
    {70, 240, 240},
    {240, 50, 230},
    {170, 110, 40},
}};

enum class Marker { kDiamond, kSquare, kCircle };

bool covers(Marker shape, int dx, int dy) {
  const int r = kMarkerRadius;
  switch (shape) {
    case Marker::kDiamond: return std::abs(dx) + std::abs(dy) <= r;
    case Marker::kSquare: return std::abs(dx) <= r && std::abs(dy) <= r;
    case Marker::kCircle: return dx * dx + dy * dy <= r * r;
  }
  return false;
}

void stamp(PointCloudImage& image, Point2 p, Marker shape, const std::array<std::uint8_t, 3>& color) {
  const int cx = containing_cell(p.x), cy = containing_cell(p.y);
  for (int dy = -kMarkerRadius; dy <= kMarkerRadius; ++dy) {
    for (int dx = -kMarkerRadius; dx <= kMarkerRadius; ++dx) {
      const int x = cx + dx, y = cy + dy;
      if (x < 0 || y < 0 || x >= image.width || y >= image.height || !covers(shape, dx, dy)) continue;
      for (int c = 0; c < 3; ++c) image.at(y, x, c) = color[c];
    }
  }
}

}  // namespace

std::array<std::uint8_t, 3> track_color(int track_id) {
  const int n = static_cast<int>(kPalette.size());
  return kPalette[static_cast<std::size_t>(((track_id - 1) % n + n) % n)];
}

Overlay render_overlay(const Sample& sample, const std::vector<LaneInstance>& corrected) {
  Overlay out{sample.image, 0};
  std::map<int, int> points_for_track;
  for (const auto& lane : corrected) points_for_track[lane.track_id] = static_cast<int>(lane.points.size());
  auto count_for = [&](int track_id) {
    const auto it = points_for_track.find(track_id);
    return it == points_for_track.end() ? kDefaultRenderPoints : it->second;
  };
  auto draw = [&](const std::vector<LaneInstance>& lanes, Marker shape, bool resample) {
    for (const auto& lane : lanes) {
      const Polyline points = resample ? train::resample_lane(lane.points, count_for(lane.track_id)) : lane.points;
      for (const Point2& p : points) stamp(out.image, p, shape, track_color(lane.track_id));
      out.markers += static_cast<int>(points.size());
    }
  };
  draw(sample.initial_lanes, Marker::kDiamond, true);
  draw(corrected, Marker::kSquare, false);
  draw(sample.gt_lanes, Marker::kCircle, true);
  return out;
}

RenderSummary cmd_render(const fs::path& data_dir, const std::optional<fs::path>& lanes_dir, const fs::path& out_dir,
                         const std::string& split) {
  const synth::Manifest manifest = synth::read_manifest(data_dir);
  const std::vector<std::string>& ids = split == "train" ? manifest.train : manifest.test;
  if (split != "train" && split != "test") throw UsageError("unknown split '" + split + "', expected train or test");
  const std::set<std::string> known(ids.begin(), ids.end());

  std::map<std::string, std::vector<LaneInstance>> corrected;
  if (lanes_dir) {
    for (const auto& id : synth::list_samples(*lanes_dir)) {
      const fs::path path = *lanes_dir / (id + ".json");
      const synth::Annotation a = synth::read_annotation(path);
      if (!known.count(a.image_id)) throw DataError(path, "refers to unknown sample '" + a.image_id + "'");
      auto& lanes = corrected[a.image_id];
      for (const auto& lane : a.lanes)
        if (lane.role == LaneRole::kCorrected) lanes.push_back(lane);
    }
  }

  fs::create_directories(out_dir);
  RenderSummary summary;
  for (const auto& id : ids) {
    const Sample sample = synth::read_sample(data_dir / split, id);
    const auto it = corrected.find(id);
    const Overlay overlay = render_overlay(sample, it == corrected.end() ? std::vector<LaneInstance>{} : it->second);
    write_ppm(out_dir / (id + "_overlay.ppm"), overlay.image.height, overlay.image.width, overlay.image.rgb);
    ++summary.images;
    summary.markers += overlay.markers;
  }
  return summary;
}

}  // namespace plc::cli
