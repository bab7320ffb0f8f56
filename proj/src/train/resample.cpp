#include <algorithm>
#include <stdexcept>

#include "plc/train/train.hpp"

namespace plc::train {
namespace {

// Clamped uniform knot vector for `n` control points of degree `p`.
std::vector<double> clamped_knots(int n, int p) {
  std::vector<double> knots(static_cast<std::size_t>(n + p + 1));
  const int interior = n - p;
  for (int i = 0; i < static_cast<int>(knots.size()); ++i) {
    if (i <= p) knots[i] = 0.0;
    else if (i >= n) knots[i] = 1.0;
    else knots[i] = static_cast<double>(i - p) / interior;
  }
  return knots;
}

// de Boor evaluation at u in [0, 1].
Point2 de_boor(const Polyline& ctrl, const std::vector<double>& knots, int p, double u) {
  const int n = static_cast<int>(ctrl.size());
  int span = p;
  while (span < n - 1 && knots[span + 1] <= u) ++span;
  std::vector<Point2> d(ctrl.begin() + (span - p), ctrl.begin() + span + 1);
  for (int r = 1; r <= p; ++r) {
    for (int j = p; j >= r; --j) {
      const int i = span - p + j;
      const double denom = knots[i + p - r + 1] - knots[i];
      const double alpha = denom > 0 ? (u - knots[i]) / denom : 0.0;
      d[j] = d[j - 1] * (1.0 - alpha) + d[j] * alpha;
    }
  }
  return d[p];
}

}  // namespace

Polyline resample_lane(const Polyline& points, int count) {
  if (count < 2) throw std::invalid_argument("resample_lane: need at least 2 output points");
  if (points.size() < 2) throw std::invalid_argument("resample_lane: need at least 2 input points");
  const bool distinct = std::any_of(points.begin() + 1, points.end(), [&](const Point2& p) { return !(p == points.front()); });
  if (!distinct) throw std::invalid_argument("resample_lane: all input points coincide");

  const int n = static_cast<int>(points.size());
  const int degree = n >= 4 ? 3 : 1;
  const auto knots = clamped_knots(n, degree);
  Polyline out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) out.push_back(de_boor(points, knots, degree, static_cast<double>(k) / (count - 1)));
  out.front() = points.front();
  out.back() = points.back();
  return out;
}

}  // namespace plc::train
