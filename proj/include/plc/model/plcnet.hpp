#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "plc/autodiff/adam.hpp"
#include "plc/autodiff/tensor.hpp"
#include "plc/core/types.hpp"

namespace plc::model {

inline constexpr const char* kModelVersion = "plcnet-v1";
inline constexpr int kFeatureChannels = 4;  // RGB + segmentation probability
inline constexpr int kMlpWidth = 64;
inline constexpr int kOffsetChannels = 2;
inline constexpr int kBackboneStages = 4;
inline constexpr int kDownsampleFactor = 16;

// Channel widths of the four down-sampling stages.
using StageWidths = std::array<int, kBackboneStages>;
inline constexpr StageWidths kDefaultStageWidths{16, 24, 40, 80};

template <typename T>
struct ConvLayer {
  ad::Tensor<T> weight;
  ad::Tensor<T> bias;
};

template <typename T>
struct ModelParams {
  int patch_size = 6;
  StageWidths widths = kDefaultStageWidths;
  std::string version = kModelVersion;

  // Stage j halves the resolution: [stride-2 3x3 conv, ReLU, 3x3 conv, ReLU].
  std::array<std::array<ConvLayer<T>, 2>, kBackboneStages> backbone;
  ConvLayer<T> seg_head;                // 1x1 conv, (w2+w3+w4) -> 1
  ConvLayer<T> attention;               // 1D k=3 conv, 2 -> 1
  std::array<ConvLayer<T>, 5> mlp;      // 1D 1x1 convs, K -> 64 -> 64 -> 64 -> 64 -> 2

  int patch_channels() const { return patch_size * patch_size * kFeatureChannels; }

  // Stable, ordered names such as "backbone.1.0.weight" or "mlp.4.bias".
  std::vector<ad::NamedParam<T>> named_parameters() const;

  // Expected shape of every named parameter for this patch size and widths.
  static std::vector<std::pair<std::string, ad::Shape>> expected_shapes(int patch_size,
                                                                        const StageWidths& widths);

  // Throws std::invalid_argument if any tensor deviates from expected_shapes.
  void validate() const;

  void zero_grad();
  void set_requires_grad(bool flag);

  template <typename U>
  ModelParams<U> cast() const;
};

// Conv weights uniform with variance 2/fan_in, zero biases, and a
// zero-initialised final MLP layer so an untrained model predicts no offset.
template <typename T>
ModelParams<T> init_params(int patch_size, std::uint64_t seed, const StageWidths& widths = kDefaultStageWidths);

// All-zero parameters with the expected shapes.
template <typename T>
ModelParams<T> zero_params(int patch_size, const StageWidths& widths = kDefaultStageWidths);

template <typename T>
struct MultiscaleFeatures {
  ad::Tensor<T> features;    // [4,H,W]: image channels then sigmoid(seg_logits)
  ad::Tensor<T> seg_logits;  // [1,H,W]
};

// Stage outputs at 2^1..2^4 down-sampling.
template <typename T>
std::array<ad::Tensor<T>, kBackboneStages> run_backbone(const ad::Tensor<T>& image, const ModelParams<T>& params);

// Segmentation head over stages 2..4 (indices 1..3 of `stages`): upsample to
// the image size, concatenate, 1x1 conv. Accepts stage maps from any backbone.
template <typename T>
MultiscaleFeatures<T> multiscale_head(const ad::Tensor<T>& image, std::span<const ad::Tensor<T>> stages,
                                      const ConvLayer<T>& seg_head);

// image [3,H,W] with H, W divisible by 16.
template <typename T>
MultiscaleFeatures<T> extract_multiscale_features(const ad::Tensor<T>& image, const ModelParams<T>& params);

// P x P samples, 1 px apart and centred on each lane point, clamped into the
// image and read bilinearly. Column m holds point m's samples flattened
// row-major over the grid with channels fastest:
//   k = (grid_row * P + grid_col) * C + channel.
template <typename T>
ad::Tensor<T> crop_patch_features(const ad::Tensor<T>& features, const Polyline& lane, int patch_size);

// Max and mean over positions -> [2,K] -> conv1d(k=3, pad 1) -> sigmoid ->
// per-row weights applied to patch_features.
template <typename T>
ad::Tensor<T> lane_attention(const ad::Tensor<T>& patch_features, const ModelParams<T>& params);

// [K,M] -> [2,M]; ReLU after the first four layers only.
template <typename T>
ad::Tensor<T> correction_mlp(const ad::Tensor<T>& attended, const ModelParams<T>& params);

struct OffsetField {
  std::vector<Point2> deltas;
};

template <typename T>
OffsetField to_offset_field(const ad::Tensor<T>& offsets);

template <typename T>
struct ForwardResult {
  std::vector<LaneInstance> corrected;
  ad::Tensor<T> seg_logits;
  std::vector<ad::Tensor<T>> offsets;  // one [2,M] per lane
};

// Lanes must already be in the image's coordinate frame.
template <typename T>
ForwardResult<T> forward(const ad::Tensor<T>& image, const std::vector<LaneInstance>& initial_lanes,
                         const ModelParams<T>& params);

}  // namespace plc::model
