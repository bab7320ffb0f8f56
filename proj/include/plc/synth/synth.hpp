#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "plc/core/types.hpp"
#include "plc/geo/geo.hpp"

namespace plc::synth {

struct SynthParams {
  int n_regions = 10;
  int lanes_per_scene = 4;
  // Heading of the road oscillates around north with an amplitude (radians)
  // drawn from [curvature_min, curvature_max].
  double curvature_min = 0.0;
  double curvature_max = 0.05;
  double lane_spacing = 3.5;       // m
  double drift_amplitude = 4.5;    // px
  double drift_wavelength = 150.0; // px
  double noise_sigma = 0.5;        // px, per point
  double intensity_noise = 0.08;   // background intensity std-dev
  double ridge_width = 0.15;       // m, Gaussian sigma of the painted-lane ridge
  int region_height = 320;         // px
  int region_width = 160;          // px
  double resolution = 0.1;         // m/px
  double sampling_interval = 32.0; // m of trajectory arclength between regions
  std::uint64_t seed = 7;

  // Throws ConfigError on a violated constraint.
  void validate() const;
};

// Exactly the SynthParams field names; unknown keys are a ConfigError.
SynthParams parse_synth_params(const std::string& text);
std::string to_config_text(const SynthParams& params);

// Painted lanes as bright Gaussian ridges over a noisy dark background.
struct IntensityField {
  double background = 0.2;
  double ridge_gain = 0.8;
  double ridge_sigma = 0.15;  // m
  double noise_sigma = 0.08;

  // Noise-free intensity at distance `d` (m) from the nearest lane.
  double ridge_intensity(double d) const;
};

struct World {
  std::vector<geo::TrackPolyline> global_lanes;  // meters, unique track ids
  Polyline trajectory;                           // meters
  IntensityField field;
  std::uint64_t seed = 0;
};

World make_world(const SynthParams& params);

// Regions of H x W pixels centred on trajectory points at arclength
// S/2 + k*S, k = 0 .. floor(L/S) - 1, with left-bottom corner
// (cx - W*R/2, cy - H*R/2).
std::vector<RegionAnchor> sample_regions(const Polyline& trajectory, double interval, int height, int width,
                                         double resolution);

// Intensities normalised per image: r = (U - U_min)/(U_max - U_min),
// RGB = (0, floor(255 r), floor(255 (1 - r))). A flat image renders r = 0.
PointCloudImage render_image(const World& world, const RegionAnchor& region);

// Byte conversion for one normalised intensity ratio.
std::array<std::uint8_t, 3> intensity_to_rgb(double ratio);

// Per-image normalisation and colouring of raw intensities (row-major H x W).
std::vector<std::uint8_t> colorize_intensities(const std::vector<double>& intensities);

// initial = gt + a*sin(2*pi*s/lambda + phase) along the local normal
// + N(0, sigma^2) per axis, with s the arclength in pixels. The phase and
// noise stream depend on (seed, track_id) only.
std::vector<LaneInstance> perturb_lanes(const std::vector<LaneInstance>& gt_lanes, const SynthParams& params,
                                        std::uint64_t seed);

// Rasterised centrelines dilated by one pixel (Chebyshev).
BinaryMap rasterize_label(const std::vector<LaneInstance>& gt_lanes, int height, int width);

// The ground-truth lane pieces of every global lane visible in a region, in
// its image coordinates (longest in-canvas run, at least 4 points).
std::vector<LaneInstance> local_gt_lanes(const World& world, const RegionAnchor& region);

Sample make_sample(const World& world, const RegionAnchor& region, const SynthParams& params);

struct Dataset {
  std::vector<Sample> train;
  std::vector<Sample> test;
};

// Region i goes to train when i % 5 < 3, giving a 3:2 split.
bool is_train_region(int region_index);

Dataset build_dataset(const SynthParams& params);

// Deterministic stream seed for a (base seed, key) pair.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key);

// Standard normal draw that does not depend on the standard library's
// distribution implementation.
class Normal {
 public:
  explicit Normal(std::uint64_t seed);
  double operator()();
  double uniform();

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0;
};

}  // namespace plc::synth
