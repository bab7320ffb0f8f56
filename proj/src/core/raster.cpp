#include "plc/core/raster.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace plc {
namespace {

void mark(BinaryMap& map, Point2 p) {
  const int col = containing_cell(p.x);
  const int row = containing_cell(p.y);
  if (row >= 0 && row < map.height && col >= 0 && col < map.width) map.at(row, col) = 1;
}

// Liang-Barsky clip of segment a->b against [lo_x,hi_x]x[lo_y,hi_y]; returns
// the parameter interval kept.
std::optional<std::pair<double, double>> clip(Point2 a, Point2 b, double lo_x, double hi_x,
                                              double lo_y, double hi_y) {
  double t0 = 0.0, t1 = 1.0;
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {a.x - lo_x, hi_x - a.x, a.y - lo_y, hi_y - a.y};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return std::nullopt;
      continue;
    }
    const double t = q[i] / p[i];
    if (p[i] < 0.0) {
      t0 = std::max(t0, t);
    } else {
      t1 = std::min(t1, t);
    }
    if (t0 > t1) return std::nullopt;
  }
  return std::make_pair(t0, t1);
}

void add_crossings(double from, double to, double t0, double t1, std::vector<double>& ts) {
  const double d = to - from;
  if (d == 0.0) return;
  const double a = from + d * t0;
  const double b = from + d * t1;
  const double lo = std::min(a, b), hi = std::max(a, b);
  for (double k = std::ceil(lo - 0.5); k + 0.5 <= hi; k += 1.0) {
    const double t = (k + 0.5 - from) / d;
    if (t > t0 && t < t1) ts.push_back(t);
  }
}

void rasterize_segment(BinaryMap& map, Point2 a, Point2 b) {
  const auto kept = clip(a, b, -1.0, map.width, -1.0, map.height);
  if (!kept) return;
  const auto [t0, t1] = *kept;
  std::vector<double> ts{t0, t1};
  add_crossings(a.x, b.x, t0, t1, ts);
  add_crossings(a.y, b.y, t0, t1, ts);
  std::sort(ts.begin(), ts.end());
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    if (ts[i + 1] <= ts[i]) continue;
    const double t = 0.5 * (ts[i] + ts[i + 1]);
    mark(map, {a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t});
  }
}

}  // namespace

int containing_cell(double v) { return static_cast<int>(std::floor(v + 0.5)); }

BinaryMap rasterize_polyline(const Polyline& line, int height, int width) {
  if (height <= 0 || width <= 0) throw std::invalid_argument("rasterize_polyline: empty canvas");
  BinaryMap map(height, width);
  for (const Point2& p : line) mark(map, p);
  for (std::size_t i = 1; i < line.size(); ++i) rasterize_segment(map, line[i - 1], line[i]);
  return map;
}

BinaryMap dilate_chebyshev(const BinaryMap& map, int radius) {
  if (radius < 0) throw std::invalid_argument("dilate_chebyshev: negative radius");
  // Separable: a square max-filter is a row pass followed by a column pass.
  BinaryMap rows(map.height, map.width);
  for (int r = 0; r < map.height; ++r) {
    for (int c = 0; c < map.width; ++c) {
      if (!map.at(r, c)) continue;
      const int lo = std::max(0, c - radius), hi = std::min(map.width - 1, c + radius);
      for (int k = lo; k <= hi; ++k) rows.at(r, k) = 1;
    }
  }
  BinaryMap out(map.height, map.width);
  for (int r = 0; r < map.height; ++r) {
    for (int c = 0; c < map.width; ++c) {
      if (!rows.at(r, c)) continue;
      const int lo = std::max(0, r - radius), hi = std::min(map.height - 1, r + radius);
      for (int k = lo; k <= hi; ++k) out.at(k, c) = 1;
    }
  }
  return out;
}

}  // namespace plc
