#include "plc/model/plcnet.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "plc/autodiff/ops.hpp"

namespace plc::model {

using ad::Shape;
using ad::Tensor;

namespace {

template <typename T>
void for_each_layer(ModelParams<T>& p, const auto& fn) {
  for (int s = 0; s < kBackboneStages; ++s)
    for (int c = 0; c < 2; ++c)
      fn("backbone." + std::to_string(s + 1) + "." + std::to_string(c), p.backbone[s][c]);
  fn(std::string("seg_head"), p.seg_head);
  fn(std::string("attention"), p.attention);
  for (int i = 0; i < 5; ++i) fn("mlp." + std::to_string(i), p.mlp[i]);
}

template <typename T>
void for_each_layer(const ModelParams<T>& p, const auto& fn) {
  for_each_layer(const_cast<ModelParams<T>&>(p), [&](const std::string& name, ConvLayer<T>& layer) {
    fn(name, static_cast<const ConvLayer<T>&>(layer));
  });
}

// Uniform in [0, 1) from the top 53 bits, independent of the standard
// library's distribution implementations.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int fan_in(const Shape& weight_shape) {
  int n = 1;
  for (std::size_t i = 1; i < weight_shape.size(); ++i) n *= weight_shape[i];
  return n;
}

}  // namespace

template <typename T>
std::vector<std::pair<std::string, Shape>> ModelParams<T>::expected_shapes(int patch_size,
                                                                           const StageWidths& widths) {
  if (patch_size < 2) throw std::invalid_argument("patch size must be >= 2");
  std::vector<std::pair<std::string, Shape>> shapes;
  int in_channels = 3;
  for (int s = 0; s < kBackboneStages; ++s) {
    const int w = widths[s];
    const std::string stage = "backbone." + std::to_string(s + 1) + ".";
    shapes.push_back({stage + "0.weight", {w, in_channels, 3, 3}});
    shapes.push_back({stage + "0.bias", {w}});
    shapes.push_back({stage + "1.weight", {w, w, 3, 3}});
    shapes.push_back({stage + "1.bias", {w}});
    in_channels = w;
  }
  shapes.push_back({"seg_head.weight", {1, widths[1] + widths[2] + widths[3], 1, 1}});
  shapes.push_back({"seg_head.bias", {1}});
  shapes.push_back({"attention.weight", {1, 2, 3}});
  shapes.push_back({"attention.bias", {1}});
  const int k = patch_size * patch_size * kFeatureChannels;
  const int mlp_in[5] = {k, kMlpWidth, kMlpWidth, kMlpWidth, kMlpWidth};
  const int mlp_out[5] = {kMlpWidth, kMlpWidth, kMlpWidth, kMlpWidth, kOffsetChannels};
  for (int i = 0; i < 5; ++i) {
    shapes.push_back({"mlp." + std::to_string(i) + ".weight", {mlp_out[i], mlp_in[i], 1}});
    shapes.push_back({"mlp." + std::to_string(i) + ".bias", {mlp_out[i]}});
  }
  return shapes;
}

template <typename T>
std::vector<ad::NamedParam<T>> ModelParams<T>::named_parameters() const {
  std::vector<ad::NamedParam<T>> out;
  for_each_layer(*this, [&](const std::string& name, const ConvLayer<T>& layer) {
    out.push_back({name + ".weight", layer.weight});
    out.push_back({name + ".bias", layer.bias});
  });
  return out;
}

template <typename T>
void ModelParams<T>::validate() const {
  if (version != kModelVersion) throw std::invalid_argument("unsupported model version '" + version + "'");
  const auto expected = expected_shapes(patch_size, widths);
  const auto actual = named_parameters();
  if (expected.size() != actual.size()) throw std::invalid_argument("parameter count mismatch");
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (!actual[i].tensor.defined() || actual[i].tensor.shape() != expected[i].second) {
      throw std::invalid_argument("parameter '" + expected[i].first + "' should have shape " +
                                  ad::shape_str(expected[i].second));
    }
  }
}

template <typename T>
void ModelParams<T>::zero_grad() {
  for (auto& p : named_parameters()) p.tensor.zero_grad();
}

template <typename T>
void ModelParams<T>::set_requires_grad(bool flag) {
  for (auto& p : named_parameters()) p.tensor.set_requires_grad(flag);
}

template <typename T>
template <typename U>
ModelParams<U> ModelParams<T>::cast() const {
  ModelParams<U> out;
  out.patch_size = patch_size;
  out.widths = widths;
  out.version = version;
  auto convert = [&](const Tensor<T>& t) {
    std::vector<U> values(t.data().begin(), t.data().end());
    return Tensor<U>(t.shape(), std::move(values), t.requires_grad());
  };
  for (int s = 0; s < kBackboneStages; ++s)
    for (int c = 0; c < 2; ++c)
      out.backbone[s][c] = {convert(backbone[s][c].weight), convert(backbone[s][c].bias)};
  out.seg_head = {convert(seg_head.weight), convert(seg_head.bias)};
  out.attention = {convert(attention.weight), convert(attention.bias)};
  for (int i = 0; i < 5; ++i) out.mlp[i] = {convert(mlp[i].weight), convert(mlp[i].bias)};
  return out;
}

template <typename T>
ModelParams<T> zero_params(int patch_size, const StageWidths& widths) {
  ModelParams<T> p;
  p.patch_size = patch_size;
  p.widths = widths;
  const auto shapes = ModelParams<T>::expected_shapes(patch_size, widths);
  std::size_t next = 0;
  for_each_layer(p, [&](const std::string&, ConvLayer<T>& layer) {
    layer.weight = Tensor<T>::zeros(shapes[next++].second, true);
    layer.bias = Tensor<T>::zeros(shapes[next++].second, true);
  });
  return p;
}

template <typename T>
ModelParams<T> init_params(int patch_size, std::uint64_t seed, const StageWidths& widths) {
  ModelParams<T> p = zero_params<T>(patch_size, widths);
  std::mt19937_64 rng(seed);
  auto fill = [&](Tensor<T>& w) {
    const double bound = std::sqrt(6.0 / fan_in(w.shape()));
    for (T& v : w.mutable_data()) v = static_cast<T>((2.0 * unit_uniform(rng) - 1.0) * bound);
  };
  for (auto& stage : p.backbone)
    for (auto& layer : stage) fill(layer.weight);
  fill(p.seg_head.weight);
  fill(p.attention.weight);
  for (int i = 0; i < 4; ++i) fill(p.mlp[i].weight);
  return p;
}

template <typename T>
std::array<Tensor<T>, kBackboneStages> run_backbone(const Tensor<T>& image, const ModelParams<T>& params) {
  std::array<Tensor<T>, kBackboneStages> stages;
  Tensor<T> x = image;
  for (int s = 0; s < kBackboneStages; ++s) {
    const auto& [down, refine] = params.backbone[s];
    x = ad::relu(ad::conv2d(x, down.weight, down.bias, 2, 1));
    x = ad::relu(ad::conv2d(x, refine.weight, refine.bias, 1, 1));
    stages[s] = x;
  }
  return stages;
}

template <typename T>
MultiscaleFeatures<T> multiscale_head(const Tensor<T>& image, std::span<const Tensor<T>> stages,
                                      const ConvLayer<T>& seg_head) {
  if (stages.size() != kBackboneStages) throw ad::ShapeError("multiscale_head: expected 4 stage maps");
  const int height = image.dim(1);
  const int width = image.dim(2);
  // Stage 1 only feeds stage 2; the head sees stages 2..4.
  std::vector<Tensor<T>> upsampled;
  for (int s = 1; s < kBackboneStages; ++s) upsampled.push_back(ad::upsample_bilinear(stages[s], height, width));
  Tensor<T> stacked = ad::concat<T>(upsampled);
  Tensor<T> logits = ad::conv2d(stacked, seg_head.weight, seg_head.bias, 1, 0);
  const std::array<Tensor<T>, 2> parts{image, ad::sigmoid(logits)};
  return {ad::concat<T>(parts), logits};
}

template <typename T>
MultiscaleFeatures<T> extract_multiscale_features(const Tensor<T>& image, const ModelParams<T>& params) {
  if (image.rank() != 3 || image.dim(0) != 3) {
    throw ad::ShapeError("extract_multiscale_features: image must be [3,H,W], got " + ad::shape_str(image.shape()));
  }
  if (image.dim(1) % kDownsampleFactor != 0 || image.dim(2) % kDownsampleFactor != 0) {
    throw ad::ShapeError("extract_multiscale_features: H and W must be divisible by 16, got " +
                         ad::shape_str(image.shape()));
  }
  const auto stages = run_backbone(image, params);
  return multiscale_head<T>(image, stages, params.seg_head);
}

template <typename T>
Tensor<T> crop_patch_features(const Tensor<T>& features, const Polyline& lane, int patch_size) {
  if (lane.empty()) throw std::invalid_argument("crop_patch_features: lane has no points");
  if (patch_size < 2) throw std::invalid_argument("crop_patch_features: patch size must be >= 2");
  if (features.rank() != 3) throw ad::ShapeError("crop_patch_features: features must be [C,H,W]");
  const int channels = features.dim(0);
  const double max_x = features.dim(2) - 1;
  const double max_y = features.dim(1) - 1;
  const double half = 0.5 * (patch_size - 1);
  const int m = static_cast<int>(lane.size());

  std::vector<ad::SamplePoint> grid;
  grid.reserve(static_cast<std::size_t>(m) * patch_size * patch_size);
  for (const Point2& p : lane) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw std::invalid_argument("crop_patch_features: non-finite lane point");
    for (int gy = 0; gy < patch_size; ++gy) {
      for (int gx = 0; gx < patch_size; ++gx) {
        grid.push_back({std::clamp(p.x + gx - half, 0.0, max_x), std::clamp(p.y + gy - half, 0.0, max_y)});
      }
    }
  }
  Tensor<T> samples = ad::bilinear_sample_points<T>(features, grid);  // [M*P*P, C]
  const int k = patch_size * patch_size * channels;
  return ad::transpose2d(ad::reshape(samples, Shape{m, k}));
}

template <typename T>
Tensor<T> lane_attention(const Tensor<T>& patch_features, const ModelParams<T>& params) {
  if (patch_features.rank() != 2) throw ad::ShapeError("lane_attention: expected [K,M]");
  const int k = patch_features.dim(0);
  const std::array<Tensor<T>, 2> pooled{
      ad::reshape(ad::pool_over_positions(patch_features, ad::PoolMode::kMax), Shape{1, k}),
      ad::reshape(ad::pool_over_positions(patch_features, ad::PoolMode::kMean), Shape{1, k})};
  Tensor<T> descriptor = ad::concat<T>(pooled);  // [2,K]
  Tensor<T> weights = ad::sigmoid(ad::conv1d(descriptor, params.attention.weight, params.attention.bias, 1));
  return ad::scale_rows(patch_features, weights);
}

template <typename T>
Tensor<T> correction_mlp(const Tensor<T>& attended, const ModelParams<T>& params) {
  Tensor<T> x = attended;
  for (int i = 0; i < 5; ++i) {
    x = ad::conv1d(x, params.mlp[i].weight, params.mlp[i].bias, 0);
    if (i < 4) x = ad::relu(x);
  }
  return x;
}

template <typename T>
OffsetField to_offset_field(const Tensor<T>& offsets) {
  if (offsets.rank() != 2 || offsets.dim(0) != kOffsetChannels) {
    throw ad::ShapeError("to_offset_field: expected [2,M], got " + ad::shape_str(offsets.shape()));
  }
  const int m = offsets.dim(1);
  OffsetField field;
  field.deltas.reserve(m);
  for (int i = 0; i < m; ++i) {
    field.deltas.push_back({static_cast<double>(offsets.data()[i]), static_cast<double>(offsets.data()[m + i])});
  }
  return field;
}

template <typename T>
ForwardResult<T> forward(const Tensor<T>& image, const std::vector<LaneInstance>& initial_lanes,
                         const ModelParams<T>& params) {
  const auto extracted = extract_multiscale_features(image, params);
  ForwardResult<T> result;
  result.seg_logits = extracted.seg_logits;
  for (const LaneInstance& lane : initial_lanes) {
    Tensor<T> patches = crop_patch_features(extracted.features, lane.points, params.patch_size);
    Tensor<T> offsets = correction_mlp(lane_attention(patches, params), params);
    const OffsetField field = to_offset_field(offsets);
    LaneInstance corrected{lane.track_id, LaneRole::kCorrected, {}};
    corrected.points.reserve(lane.points.size());
    for (std::size_t k = 0; k < lane.points.size(); ++k) corrected.points.push_back(lane.points[k] + field.deltas[k]);
    result.corrected.push_back(std::move(corrected));
    result.offsets.push_back(std::move(offsets));
  }
  return result;
}

#define PLC_MODEL_INSTANTIATE(T)                                                                      \
  template struct ModelParams<T>;                                                                     \
  template ModelParams<float> ModelParams<T>::cast<float>() const;                                    \
  template ModelParams<double> ModelParams<T>::cast<double>() const;                                  \
  template ModelParams<T> init_params<T>(int, std::uint64_t, const StageWidths&);                     \
  template ModelParams<T> zero_params<T>(int, const StageWidths&);                                    \
  template std::array<Tensor<T>, kBackboneStages> run_backbone(const Tensor<T>&, const ModelParams<T>&); \
  template MultiscaleFeatures<T> multiscale_head(const Tensor<T>&, std::span<const Tensor<T>>,       \
                                                 const ConvLayer<T>&);                                \
  template MultiscaleFeatures<T> extract_multiscale_features(const Tensor<T>&, const ModelParams<T>&); \
  template Tensor<T> crop_patch_features(const Tensor<T>&, const Polyline&, int);                     \
  template Tensor<T> lane_attention(const Tensor<T>&, const ModelParams<T>&);                         \
  template Tensor<T> correction_mlp(const Tensor<T>&, const ModelParams<T>&);                         \
  template OffsetField to_offset_field(const Tensor<T>&);                                             \
  template ForwardResult<T> forward(const Tensor<T>&, const std::vector<LaneInstance>&, const ModelParams<T>&);

PLC_MODEL_INSTANTIATE(float)
PLC_MODEL_INSTANTIATE(double)

}  // namespace plc::model
