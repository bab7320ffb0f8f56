#include "plc/synth/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "plc/core/config.hpp"
#include "plc/core/raster.hpp"

namespace plc::synth {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kCentrelineStep = 0.5;  // m between generated lane vertices

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Point2 point_at_arclength(const Polyline& line, const std::vector<double>& cumulative, double s) {
  const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), s);
  std::size_t hi = std::clamp<std::size_t>(it - cumulative.begin(), 1, line.size() - 1);
  const std::size_t lo = hi - 1;
  const double len = cumulative[hi] - cumulative[lo];
  const double t = len > 0 ? (s - cumulative[lo]) / len : 0.0;
  return line[lo] + (line[hi] - line[lo]) * t;
}

std::vector<double> cumulative_length(const Polyline& line) {
  std::vector<double> c(line.size(), 0.0);
  for (std::size_t i = 1; i < line.size(); ++i) c[i] = c[i - 1] + distance(line[i - 1], line[i]);
  return c;
}

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = ab.x * ab.x + ab.y * ab.y;
  double t = len2 > 0 ? ((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, a + ab * t);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key) {
  std::uint64_t state = seed ^ (key * 0xd1b54a32d192ed03ULL);
  splitmix64(state);
  return splitmix64(state);
}

Normal::Normal(std::uint64_t seed) : state_(seed) {}

double Normal::uniform() { return static_cast<double>(splitmix64(state_) >> 11) * 0x1.0p-53; }

double Normal::operator()() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(kTwoPi * u2);
  has_spare_ = true;
  return r * std::cos(kTwoPi * u2);
}

void SynthParams::validate() const {
  auto require = [](bool ok, const char* key, const char* what) {
    if (!ok) throw ConfigError(key, std::string("key '") + key + "': " + what);
  };
  require(n_regions >= 5, "n_regions", "must be >= 5");
  require(lanes_per_scene >= 1, "lanes_per_scene", "must be >= 1");
  require(curvature_min >= 0 && curvature_max >= curvature_min, "curvature_max",
          "need 0 <= curvature_min <= curvature_max");
  require(lane_spacing > 0, "lane_spacing", "must be > 0");
  require(drift_amplitude >= 0, "drift_amplitude", "must be >= 0");
  require(drift_wavelength > 0, "drift_wavelength", "must be > 0");
  require(noise_sigma >= 0, "noise_sigma", "must be >= 0");
  require(intensity_noise >= 0, "intensity_noise", "must be >= 0");
  require(ridge_width > 0, "ridge_width", "must be > 0");
  require(region_height > 0, "region_height", "must be > 0");
  require(region_width > 0, "region_width", "must be > 0");
  require(resolution > 0, "resolution", "must be > 0");
  require(sampling_interval > 0, "sampling_interval", "must be > 0");
}

SynthParams parse_synth_params(const std::string& text) {
  SynthParams p;
  for (const auto& [key, value] : parse_key_values(text)) {
    if (key == "n_regions") p.n_regions = static_cast<int>(parse_int(key, value));
    else if (key == "lanes_per_scene") p.lanes_per_scene = static_cast<int>(parse_int(key, value));
    else if (key == "curvature_min") p.curvature_min = parse_double(key, value);
    else if (key == "curvature_max") p.curvature_max = parse_double(key, value);
    else if (key == "lane_spacing") p.lane_spacing = parse_double(key, value);
    else if (key == "drift_amplitude") p.drift_amplitude = parse_double(key, value);
    else if (key == "drift_wavelength") p.drift_wavelength = parse_double(key, value);
    else if (key == "noise_sigma") p.noise_sigma = parse_double(key, value);
    else if (key == "intensity_noise") p.intensity_noise = parse_double(key, value);
    else if (key == "ridge_width") p.ridge_width = parse_double(key, value);
    else if (key == "region_height") p.region_height = static_cast<int>(parse_int(key, value));
    else if (key == "region_width") p.region_width = static_cast<int>(parse_int(key, value));
    else if (key == "resolution") p.resolution = parse_double(key, value);
    else if (key == "sampling_interval") p.sampling_interval = parse_double(key, value);
    else if (key == "seed") p.seed = parse_uint(key, value);
    else throw ConfigError(key, "unknown config key '" + key + "'");
  }
  p.validate();
  return p;
}

std::string to_config_text(const SynthParams& p) {
  std::string out;
  auto put = [&](const char* key, const std::string& value) { out += std::string(key) + " = " + value + "\n"; };
  put("n_regions", std::to_string(p.n_regions));
  put("lanes_per_scene", std::to_string(p.lanes_per_scene));
  put("curvature_min", format_double(p.curvature_min));
  put("curvature_max", format_double(p.curvature_max));
  put("lane_spacing", format_double(p.lane_spacing));
  put("drift_amplitude", format_double(p.drift_amplitude));
  put("drift_wavelength", format_double(p.drift_wavelength));
  put("noise_sigma", format_double(p.noise_sigma));
  put("intensity_noise", format_double(p.intensity_noise));
  put("ridge_width", format_double(p.ridge_width));
  put("region_height", std::to_string(p.region_height));
  put("region_width", std::to_string(p.region_width));
  put("resolution", format_double(p.resolution));
  put("sampling_interval", format_double(p.sampling_interval));
  put("seed", std::to_string(p.seed));
  return out;
}

double IntensityField::ridge_intensity(double d) const {
  return background + ridge_gain * std::exp(-0.5 * (d * d) / (ridge_sigma * ridge_sigma));
}

World make_world(const SynthParams& params) {
  params.validate();
  Normal rng(mix_seed(params.seed, 0x776f726c64ULL));
  const double amplitude = params.curvature_min + (params.curvature_max - params.curvature_min) * rng.uniform();
  const double wavelength = 150.0 + 100.0 * rng.uniform();
  const double phase = kTwoPi * rng.uniform();
  const double length = params.n_regions * params.sampling_interval;
  const double margin = std::hypot(params.region_height, params.region_width) * params.resolution;

  // Centreline sampled every kCentrelineStep meters over [-margin, length + margin].
  const int before = static_cast<int>(std::ceil(margin / kCentrelineStep));
  const int after = static_cast<int>(std::ceil((length + margin) / kCentrelineStep));
  const int first_traj = before;
  const int last_traj = before + static_cast<int>(std::round(length / kCentrelineStep));
  auto heading = [&](double s) { return std::numbers::pi / 2 + amplitude * std::sin(kTwoPi * s / wavelength + phase); };

  std::vector<Point2> centre(static_cast<std::size_t>(before + after + 1));
  std::vector<double> theta(centre.size());
  centre[before] = {500.0, 500.0};
  for (int i = before; i < before + after; ++i) {
    const double s = (i - before + 0.5) * kCentrelineStep;
    centre[i + 1] = centre[i] + Point2{std::cos(heading(s)), std::sin(heading(s))} * kCentrelineStep;
  }
  for (int i = before; i > 0; --i) {
    const double s = (i - before - 0.5) * kCentrelineStep;
    centre[i - 1] = centre[i] - Point2{std::cos(heading(s)), std::sin(heading(s))} * kCentrelineStep;
  }
  for (std::size_t i = 0; i < centre.size(); ++i) {
    theta[i] = heading((static_cast<int>(i) - before) * kCentrelineStep);
  }

  World world;
  world.seed = params.seed;
  world.field.ridge_sigma = params.ridge_width;
  world.field.noise_sigma = params.intensity_noise;
  world.trajectory.assign(centre.begin() + first_traj, centre.begin() + last_traj + 1);
  for (int lane = 0; lane < params.lanes_per_scene; ++lane) {
    const double offset = (lane - 0.5 * (params.lanes_per_scene - 1)) * params.lane_spacing;
    geo::TrackPolyline line{lane + 1, {}};
    line.points.reserve(centre.size());
    for (std::size_t i = 0; i < centre.size(); ++i) {
      const Point2 normal{-std::sin(theta[i]), std::cos(theta[i])};
      line.points.push_back(centre[i] + normal * offset);
    }
    world.global_lanes.push_back(std::move(line));
  }
  return world;
}

std::vector<RegionAnchor> sample_regions(const Polyline& trajectory, double interval, int height, int width,
                                         double resolution) {
  if (trajectory.size() < 2) throw std::invalid_argument("sample_regions: trajectory needs >= 2 points");
  if (!(interval > 0) || height <= 0 || width <= 0 || !(resolution > 0)) {
    throw std::invalid_argument("sample_regions: interval, size and resolution must be positive");
  }
  const auto cumulative = cumulative_length(trajectory);
  const double length = cumulative.back();
  if (!(length >= interval * (1.0 - 1e-9))) {
    throw std::invalid_argument("sample_regions: trajectory shorter than one sampling interval");
  }
  const int count = static_cast<int>(std::floor(length / interval + 1e-9));
  std::vector<RegionAnchor> regions;
  for (int k = 0; k < count; ++k) {
    const Point2 c = point_at_arclength(trajectory, cumulative, interval * (k + 0.5));
    regions.push_back({c.x - width * resolution / 2.0, c.y - height * resolution / 2.0, height, width, resolution, k});
  }
  return regions;
}

std::array<std::uint8_t, 3> intensity_to_rgb(double ratio) {
  return {0, static_cast<std::uint8_t>(std::floor(ratio * 255.0)),
          static_cast<std::uint8_t>(std::floor((1.0 - ratio) * 255.0))};
}

std::vector<std::uint8_t> colorize_intensities(const std::vector<double>& intensities) {
  const auto [lo_it, hi_it] = std::minmax_element(intensities.begin(), intensities.end());
  const double lo = intensities.empty() ? 0.0 : *lo_it;
  const double hi = intensities.empty() ? 0.0 : *hi_it;
  std::vector<std::uint8_t> rgb;
  rgb.reserve(intensities.size() * 3);
  for (double u : intensities) {
    const double r = hi > lo ? (u - lo) / (hi - lo) : 0.0;
    const auto px = intensity_to_rgb(r);
    rgb.insert(rgb.end(), px.begin(), px.end());
  }
  return rgb;
}

PointCloudImage render_image(const World& world, const RegionAnchor& region) {
  const int h = region.height;
  const int w = region.width;
  const double sigma_px = world.field.ridge_sigma / region.resolution;
  const double reach = 4.0 * sigma_px;

  // Nearest-lane distance within reach of any lane, in pixels.
  std::vector<double> dist(static_cast<std::size_t>(h) * w, std::numeric_limits<double>::infinity());
  for (const auto& lane : world.global_lanes) {
    const Polyline px = geo::geo_to_image(lane.points, region);
    for (std::size_t i = 1; i < px.size(); ++i) {
      const Point2 a = px[i - 1], b = px[i];
      const int c0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - reach)));
      const int c1 = std::min(w - 1, static_cast<int>(std::ceil(std::max(a.x, b.x) + reach)));
      const int r0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - reach)));
      const int r1 = std::min(h - 1, static_cast<int>(std::ceil(std::max(a.y, b.y) + reach)));
      for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
          double& d = dist[static_cast<std::size_t>(r) * w + c];
          d = std::min(d, point_segment_distance({static_cast<double>(c), static_cast<double>(r)}, a, b));
        }
      }
    }
  }

  Normal noise(mix_seed(world.seed, 0x1000000ULL + static_cast<std::uint64_t>(region.region_index)));
  std::vector<double> intensity(dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i) {
    intensity[i] = world.field.ridge_intensity(dist[i] * region.resolution) + world.field.noise_sigma * noise();
  }

  PointCloudImage image;
  image.height = h;
  image.width = w;
  image.anchor = region;
  image.rgb = colorize_intensities(intensity);
  return image;
}

std::vector<LaneInstance> perturb_lanes(const std::vector<LaneInstance>& gt_lanes, const SynthParams& params,
                                        std::uint64_t seed) {
  std::vector<LaneInstance> out;
  out.reserve(gt_lanes.size());
  for (const LaneInstance& gt : gt_lanes) {
    Normal rng(mix_seed(seed, static_cast<std::uint64_t>(gt.track_id)));
    const double phase = kTwoPi * rng.uniform();
    LaneInstance lane{gt.track_id, LaneRole::kInitial, {}};
    lane.points.reserve(gt.points.size());
    double s = 0;
    const std::size_t n = gt.points.size();
    for (std::size_t k = 0; k < n; ++k) {
      if (k > 0) s += distance(gt.points[k - 1], gt.points[k]);
      Point2 tangent = n > 1 ? gt.points[std::min(k + 1, n - 1)] - gt.points[k == 0 ? 0 : k - 1] : Point2{};
      const double len = norm(tangent);
      const Point2 normal = len > 0 ? Point2{-tangent.y / len, tangent.x / len} : Point2{};
      const double drift = params.drift_amplitude * std::sin(kTwoPi * s / params.drift_wavelength + phase);
      const double nx = rng(), ny = rng();
      lane.points.push_back(gt.points[k] + normal * drift + Point2{nx, ny} * params.noise_sigma);
    }
    out.push_back(std::move(lane));
  }
  return out;
}

BinaryMap rasterize_label(const std::vector<LaneInstance>& gt_lanes, int height, int width) {
  BinaryMap centre(height, width);
  for (const auto& lane : gt_lanes) {
    const BinaryMap one = rasterize_polyline(lane.points, height, width);
    for (std::size_t i = 0; i < centre.cells.size(); ++i) centre.cells[i] |= one.cells[i];
  }
  return dilate_chebyshev(centre, 1);
}

std::vector<LaneInstance> local_gt_lanes(const World& world, const RegionAnchor& region) {
  std::vector<LaneInstance> lanes;
  const double max_x = region.width - 1;
  const double max_y = region.height - 1;
  for (const auto& global : world.global_lanes) {
    const Polyline px = geo::geo_to_image(global.points, region);
    std::size_t best_start = 0, best_len = 0;
    for (std::size_t i = 0; i < px.size();) {
      auto inside = [&](const Point2& p) { return p.x >= 0 && p.x <= max_x && p.y >= 0 && p.y <= max_y; };
      if (!inside(px[i])) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < px.size() && inside(px[j])) ++j;
      if (j - i > best_len) {
        best_start = i;
        best_len = j - i;
      }
      i = j;
    }
    if (best_len < 4) continue;
    lanes.push_back({global.track_id, LaneRole::kGroundTruth,
                     Polyline(px.begin() + static_cast<std::ptrdiff_t>(best_start),
                              px.begin() + static_cast<std::ptrdiff_t>(best_start + best_len))});
  }
  return lanes;
}

Sample make_sample(const World& world, const RegionAnchor& region, const SynthParams& params) {
  Sample sample;
  char id[32];
  std::snprintf(id, sizeof id, "region_%04d", region.region_index);
  sample.image_id = id;
  sample.image = render_image(world, region);
  sample.gt_lanes = local_gt_lanes(world, region);
  sample.initial_lanes =
      perturb_lanes(sample.gt_lanes, params, mix_seed(params.seed, 0x2000000ULL + static_cast<std::uint64_t>(region.region_index)));
  sample.label = rasterize_label(sample.gt_lanes, region.height, region.width);
  return sample;
}

bool is_train_region(int region_index) { return region_index % 5 < 3; }

Dataset build_dataset(const SynthParams& params) {
  const World world = make_world(params);
  const auto regions = sample_regions(world.trajectory, params.sampling_interval, params.region_height,
                                      params.region_width, params.resolution);
  Dataset data;
  for (const auto& region : regions) {
    (is_train_region(region.region_index) ? data.train : data.test).push_back(make_sample(world, region, params));
  }
  return data;
}

}  // namespace plc::synth
