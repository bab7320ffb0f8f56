#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace plc {

// Image coordinates are in pixels with x to the right and y downwards; pixel
// centres sit on integer coordinates. Geographic coordinates are planar meters
// with Y upwards.
struct Point2 {
  double x = 0;
  double y = 0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(Point2 a, double s) { return {a.x * s, a.y * s}; }
  friend bool operator==(Point2 a, Point2 b) = default;
};

double norm(Point2 p);
double distance(Point2 a, Point2 b);

using Polyline = std::vector<Point2>;

double polyline_length(const Polyline& line);

enum class LaneRole { kInitial, kGroundTruth, kCorrected };

std::string_view to_string(LaneRole role);
LaneRole lane_role_from_string(std::string_view text);

struct LaneInstance {
  int track_id = 0;
  LaneRole role = LaneRole::kInitial;
  Polyline points;
};

// Left-bottom geographic anchor of a local image.
struct RegionAnchor {
  double x_lb = 0;
  double y_lb = 0;
  int height = 0;
  int width = 0;
  double resolution = 0;  // meters per pixel
  int region_index = 0;
};

// H x W x 3 8-bit raster, row-major, RGB interleaved.
struct PointCloudImage {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> rgb;
  RegionAnchor anchor;

  std::uint8_t& at(int row, int col, int channel) {
    return rgb[(static_cast<std::size_t>(row) * width + col) * 3 + channel];
  }
  std::uint8_t at(int row, int col, int channel) const {
    return rgb[(static_cast<std::size_t>(row) * width + col) * 3 + channel];
  }
};

// H x W map of 0/1 values, row-major.
struct BinaryMap {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> cells;

  BinaryMap() = default;
  BinaryMap(int h, int w) : height(h), width(w), cells(static_cast<std::size_t>(h) * w, 0) {}
  std::uint8_t& at(int row, int col) { return cells[static_cast<std::size_t>(row) * width + col]; }
  std::uint8_t at(int row, int col) const { return cells[static_cast<std::size_t>(row) * width + col]; }
  std::size_t count() const;
};

struct Sample {
  std::string image_id;
  PointCloudImage image;
  std::vector<LaneInstance> initial_lanes;
  std::vector<LaneInstance> gt_lanes;
  BinaryMap label;
};

struct GlobalLane {
  int track_id = 0;
  Polyline points;  // exactly kGlobalLanePoints entries, meters
};

inline constexpr int kGlobalLanePoints = 100;

}  // namespace plc
