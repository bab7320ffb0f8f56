#pragma once

#include <utility>
#include <vector>

#include "plc/core/types.hpp"

namespace plc::geo {

// X = X_lb + x*R, Y = Y_lb + (H - y)*R. Extrapolation outside the image is allowed.
Point2 image_to_geo(Point2 pixel, const RegionAnchor& anchor);
Point2 geo_to_image(Point2 world, const RegionAnchor& anchor);

Polyline image_to_geo(const Polyline& pixels, const RegionAnchor& anchor);
Polyline geo_to_image(const Polyline& world, const RegionAnchor& anchor);

// Linear interpolation at `count` points evenly spaced in cumulative
// arclength, endpoints included. Throws std::invalid_argument for a
// zero-length polyline.
Polyline resample_by_arclength(const Polyline& line, int count);

struct LaneFragment {
  LaneInstance lane;  // image coordinates of its region
  RegionAnchor anchor;
};

// Converts fragments to geographic coordinates, groups them by track_id,
// concatenates each group in region_index order, drops consecutive points
// closer than R/2, and resamples to kGlobalLanePoints points. Output is sorted
// by track_id. Groups that collapse to zero length are skipped with a warning.
std::vector<GlobalLane> merge_global(const std::vector<LaneFragment>& fragments);

struct TrackPolyline {
  int track_id = 0;
  Polyline points;  // meters
};

// The same 100-point arclength smoothing applied to reference polylines.
std::vector<GlobalLane> smooth_reference(const std::vector<TrackPolyline>& lanes);

}  // namespace plc::geo
