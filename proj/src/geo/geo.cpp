#include "plc/geo/geo.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "plc/core/log.hpp"

namespace plc::geo {

Point2 image_to_geo(Point2 pixel, const RegionAnchor& anchor) {
  return {anchor.x_lb + pixel.x * anchor.resolution,
          anchor.y_lb + (anchor.height - pixel.y) * anchor.resolution};
}

Point2 geo_to_image(Point2 world, const RegionAnchor& anchor) {
  return {(world.x - anchor.x_lb) / anchor.resolution,
          anchor.height - (world.y - anchor.y_lb) / anchor.resolution};
}

Polyline image_to_geo(const Polyline& pixels, const RegionAnchor& anchor) {
  Polyline out;
  out.reserve(pixels.size());
  for (const Point2& p : pixels) out.push_back(image_to_geo(p, anchor));
  return out;
}

Polyline geo_to_image(const Polyline& world, const RegionAnchor& anchor) {
  Polyline out;
  out.reserve(world.size());
  for (const Point2& p : world) out.push_back(geo_to_image(p, anchor));
  return out;
}

Polyline resample_by_arclength(const Polyline& line, int count) {
  if (count < 2) throw std::invalid_argument("resample_by_arclength: need at least 2 output points");
  std::vector<double> cumulative(line.size(), 0.0);
  for (std::size_t i = 1; i < line.size(); ++i) {
    cumulative[i] = cumulative[i - 1] + distance(line[i - 1], line[i]);
  }
  const double total = line.empty() ? 0.0 : cumulative.back();
  if (!(total > 0.0)) throw std::invalid_argument("resample_by_arclength: zero-length polyline");

  Polyline out;
  out.reserve(count);
  std::size_t seg = 1;
  for (int k = 0; k < count; ++k) {
    const double s = total * k / (count - 1);
    while (seg + 1 < line.size() && cumulative[seg] < s) ++seg;
    const double len = cumulative[seg] - cumulative[seg - 1];
    const double t = len > 0.0 ? std::clamp((s - cumulative[seg - 1]) / len, 0.0, 1.0) : 0.0;
    out.push_back(line[seg - 1] + (line[seg] - line[seg - 1]) * t);
  }
  out.front() = line.front();
  out.back() = line.back();
  return out;
}

std::vector<GlobalLane> merge_global(const std::vector<LaneFragment>& fragments) {
  std::map<int, std::vector<const LaneFragment*>> groups;
  for (const auto& f : fragments) {
    if (f.lane.points.size() < 2) {
      throw std::invalid_argument("merge_global: lane " + std::to_string(f.lane.track_id) +
                                  " has fewer than 2 points");
    }
    groups[f.lane.track_id].push_back(&f);
  }

  std::vector<GlobalLane> merged;
  for (auto& [track_id, parts] : groups) {
    std::stable_sort(parts.begin(), parts.end(), [](const LaneFragment* a, const LaneFragment* b) {
      return a->anchor.region_index < b->anchor.region_index;
    });
    Polyline joined;
    for (const LaneFragment* part : parts) {
      const double min_gap = part->anchor.resolution / 2.0;
      for (const Point2& p : image_to_geo(part->lane.points, part->anchor)) {
        if (!joined.empty() && distance(joined.back(), p) < min_gap) continue;
        joined.push_back(p);
      }
    }
    if (joined.size() < 2 || !(polyline_length(joined) > 0.0)) {
      log::warn("merge_global: track " + std::to_string(track_id) + " has zero length, skipped");
      continue;
    }
    merged.push_back({track_id, resample_by_arclength(joined, kGlobalLanePoints)});
  }
  return merged;
}

std::vector<GlobalLane> smooth_reference(const std::vector<TrackPolyline>& lanes) {
  std::vector<GlobalLane> out;
  for (const auto& lane : lanes) {
    if (lane.points.size() < 2 || !(polyline_length(lane.points) > 0.0)) {
      log::warn("smooth_reference: track " + std::to_string(lane.track_id) +
                " has zero length, skipped");
      continue;
    }
    out.push_back({lane.track_id, resample_by_arclength(lane.points, kGlobalLanePoints)});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const GlobalLane& a, const GlobalLane& b) { return a.track_id < b.track_id; });
  return out;
}

}  // namespace plc::geo
