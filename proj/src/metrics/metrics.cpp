#include "plc/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "plc/core/raster.hpp"

namespace plc::metrics {

double smooth_l1(Point2 residual) {
  const double s = std::abs(residual.x) + std::abs(residual.y);
  return s < 1.0 ? 0.5 * s * s : s - 0.5;
}

PointDistances point_distances(const Polyline& corrected, const Polyline& gt) {
  if (corrected.size() != gt.size()) {
    throw std::invalid_argument("point_distances: point counts differ (" +
                                std::to_string(corrected.size()) + " vs " +
                                std::to_string(gt.size()) + ")");
  }
  if (corrected.empty()) throw std::invalid_argument("point_distances: empty lanes");
  PointDistances d;
  for (std::size_t k = 0; k < gt.size(); ++k) {
    const Point2 r = corrected[k] - gt[k];
    d.smooth_l1 += smooth_l1(r);
    d.l2 += norm(r);
  }
  d.smooth_l1 /= static_cast<double>(gt.size());
  d.l2 /= static_cast<double>(gt.size());
  return d;
}

double lane_iou(const Polyline& corrected, const Polyline& gt, int extension, int height, int width) {
  if (std::find(kIouExtensions.begin(), kIouExtensions.end(), extension) == kIouExtensions.end()) {
    throw std::invalid_argument("lane_iou: extension must be 1, 2 or 3, got " +
                                std::to_string(extension));
  }
  const BinaryMap a = dilate_chebyshev(rasterize_polyline(corrected, height, width), extension);
  const BinaryMap b = dilate_chebyshev(rasterize_polyline(gt, height, width), extension);
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    inter += a.cells[i] & b.cells[i];
    uni += a.cells[i] | b.cells[i];
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {
double directed_chamfer(const Polyline& from, const Polyline& to) {
  double total = 0;
  for (const Point2& p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const Point2& q : to) best = std::min(best, distance(p, q));
    total += best;
  }
  return total / static_cast<double>(from.size());
}
}  // namespace

double chamfer(const Polyline& corrected, const Polyline& gt) {
  if (corrected.empty() || gt.empty()) throw std::invalid_argument("chamfer: empty lane");
  return 0.5 * (directed_chamfer(corrected, gt) + directed_chamfer(gt, corrected));
}

std::string unit_tag(Unit unit) { return unit == Unit::kPixel ? "p" : "m"; }

Unit unit_from_tag(const std::string& tag) {
  if (tag == "p") return Unit::kPixel;
  if (tag == "m") return Unit::kMeter;
  throw std::invalid_argument("unknown unit tag '" + tag + "'");
}

MetricsReport evaluate(std::span<const LanePair> pairs, Unit unit, std::optional<Canvas> canvas,
                       std::string method) {
  if (pairs.empty()) throw std::invalid_argument("evaluate: no lane pairs");
  if (unit == Unit::kPixel && !canvas) throw std::invalid_argument("evaluate: pixel mode needs a canvas");
  if (unit == Unit::kMeter) canvas.reset();

  MetricsReport report;
  report.method = std::move(method);
  report.unit = unit;
  report.canvas = canvas;
  for (const LanePair& pair : pairs) {
    InstanceMetrics m;
    m.track_id = pair.track_id;
    const PointDistances d = point_distances(pair.corrected, pair.gt);
    m.smooth_l1 = d.smooth_l1;
    m.l2 = d.l2;
    m.chamfer = chamfer(pair.corrected, pair.gt);
    if (canvas) {
      for (std::size_t k = 0; k < kIouExtensions.size(); ++k) {
        m.lane_iou[k] = lane_iou(pair.corrected, pair.gt, kIouExtensions[k], canvas->height, canvas->width);
      }
    }
    report.instances.push_back(m);
  }

  const double n = static_cast<double>(report.instances.size());
  for (const auto& m : report.instances) {
    report.smooth_l1 += m.smooth_l1;
    report.l2 += m.l2;
    report.chamfer += m.chamfer;
    for (std::size_t k = 0; k < 3; ++k) report.lane_iou[k] += m.lane_iou[k];
  }
  report.smooth_l1 /= n;
  report.l2 /= n;
  report.chamfer /= n;
  for (auto& v : report.lane_iou) v /= n;
  return report;
}

}  // namespace plc::metrics
