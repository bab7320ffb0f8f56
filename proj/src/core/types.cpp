#include "plc/core/types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace plc {

double norm(Point2 p) { return std::hypot(p.x, p.y); }

double distance(Point2 a, Point2 b) { return norm(a - b); }

double polyline_length(const Polyline& line) {
  double total = 0;
  for (std::size_t i = 1; i < line.size(); ++i) total += distance(line[i - 1], line[i]);
  return total;
}

std::string_view to_string(LaneRole role) {
  switch (role) {
    case LaneRole::kInitial:
      return "initial";
    case LaneRole::kGroundTruth:
      return "ground-truth";
    case LaneRole::kCorrected:
      return "corrected";
  }
  return "initial";
}

LaneRole lane_role_from_string(std::string_view text) {
  if (text == "initial") return LaneRole::kInitial;
  if (text == "ground-truth") return LaneRole::kGroundTruth;
  if (text == "corrected") return LaneRole::kCorrected;
  throw std::invalid_argument("unknown lane role '" + std::string(text) + "'");
}

std::size_t BinaryMap::count() const {
  return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
}

}  // namespace plc
