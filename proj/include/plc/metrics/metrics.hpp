#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plc/core/types.hpp"

namespace plc::metrics {

// Smooth-L1 of a 2D residual, branching on its L1 norm s:
// 0.5*s^2 when s < 1, s - 0.5 otherwise.
double smooth_l1(Point2 residual);

struct PointDistances {
  double smooth_l1 = 0;
  double l2 = 0;
};

// Index-aligned per-point means. Throws std::invalid_argument when the point
// counts differ or the lanes are empty.
PointDistances point_distances(const Polyline& corrected, const Polyline& gt);

inline constexpr std::array<int, 3> kIouExtensions{1, 2, 3};

// IoU of the two lanes' rasterised centrelines dilated by `extension` pixels
// on an H x W canvas. Two empty masks give 1.
double lane_iou(const Polyline& corrected, const Polyline& gt, int extension, int height, int width);

// Mean bidirectional Chamfer distance between two point sets.
double chamfer(const Polyline& corrected, const Polyline& gt);

enum class Unit { kPixel, kMeter };
std::string unit_tag(Unit unit);
Unit unit_from_tag(const std::string& tag);

struct LanePair {
  int track_id = 0;
  Polyline corrected;
  Polyline gt;
};

struct InstanceMetrics {
  int track_id = 0;
  double smooth_l1 = 0;
  double l2 = 0;
  double chamfer = 0;
  std::array<double, 3> lane_iou{};  // K = 1, 2, 3; pixel mode only
};

struct Canvas {
  int height = 0;
  int width = 0;
};

struct MetricsReport {
  std::string method;  // e.g. "initial" or "corrected"
  Unit unit = Unit::kPixel;
  std::optional<Canvas> canvas;  // present in pixel mode
  std::vector<InstanceMetrics> instances;
  double smooth_l1 = 0;
  double l2 = 0;
  double chamfer = 0;
  std::array<double, 3> lane_iou{};

  bool has_iou() const { return canvas.has_value(); }
};

// Per-instance metrics and their arithmetic means. Pixel mode requires a
// canvas and also computes lane-IoU; meter mode skips it.
MetricsReport evaluate(std::span<const LanePair> pairs, Unit unit,
                       std::optional<Canvas> canvas = std::nullopt, std::string method = {});

}  // namespace plc::metrics
