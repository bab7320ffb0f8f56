#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "plc/autodiff/tensor.hpp"
#include "plc/core/types.hpp"
#include "plc/model/plcnet.hpp"

namespace plc::train {

struct TrainConfig {
  int epochs = 60;
  double lr = 0.001;
  int lr_drop_epoch = 50;
  double lr_after_drop = 0.0001;
  int batch_size = 2;
  int net_height = 640;
  int net_width = 320;
  int M = 32;
  int P = 6;
  double seg_loss_weight = 1.0;
  double offset_loss_weight = 1.0;
  std::uint64_t seed = 1;

  // Throws ConfigError naming the violated key.
  void validate() const;
  // Learning rate for a 1-based epoch.
  double lr_for_epoch(int epoch) const { return epoch <= lr_drop_epoch ? lr : lr_after_drop; }
};

TrainConfig parse_train_config(const std::string& text);
std::string to_config_text(const TrainConfig& config);

// Clamped cubic B-spline with the input points as control points (linear for
// fewer than four), sampled at `count` uniform parameter values. The first and
// last samples equal the input endpoints.
Polyline resample_lane(const Polyline& points, int count);

inline constexpr double kFocalAlpha = 0.25;
inline constexpr double kFocalGamma = 2.0;

// Mean over pixels of -alpha (1-p)^gamma log p on positives and
// -(1-alpha) p^gamma log(1-p) on negatives, p = sigmoid(logit), log
// arguments clamped to >= 1e-12. Labels must be 0 or 1.
template <typename T>
ad::Tensor<T> focal_loss(const ad::Tensor<T>& seg_logits, const BinaryMap& label);

// Mean smooth-L1 (on the per-point L1 norm) of predicted [2,M] offsets
// against targets, over all points of all lanes.
template <typename T>
ad::Tensor<T> offset_loss(std::span<const ad::Tensor<T>> predicted, std::span<const model::OffsetField> targets);

// Image resampled to the network size as a [3,H,W] tensor in [0,1]. The
// coordinate map is pure scaling, x_net = x * W_net / W, matching the lane
// coordinate scaling; each output pixel box-averages the source footprint.
ad::Tensor<float> resize_image(const PointCloudImage& image, int net_height, int net_width);

struct NetScale {
  double sx = 1;  // net pixels per original pixel along x
  double sy = 1;
};
NetScale net_scale(const PointCloudImage& image, const TrainConfig& config);
Polyline scale_points(const Polyline& points, double sx, double sy);

// A sample moved to network resolution: lanes resampled to M points and
// matched to ground truth by track id.
struct PreparedSample {
  std::string image_id;
  ad::Tensor<float> image;
  BinaryMap label;  // at network resolution
  NetScale scale;
  std::vector<LaneInstance> initial;    // net scale, M points
  std::vector<LaneInstance> gt;         // same order as `initial` for matched lanes
  std::vector<model::OffsetField> targets;  // gt - initial, per matched lane
};

// Ground-truth lanes without an initial partner are skipped with a warning;
// initial lanes without ground truth are dropped. `with_targets` = false keeps
// every initial lane and ignores ground truth.
PreparedSample prepare_sample(const Sample& sample, const TrainConfig& config, bool with_targets = true);

struct EpochRecord {
  int epoch = 0;
  double seg_loss = 0;
  double offset_loss = 0;
  double lr = 0;
};

struct Checkpoint {
  model::ModelParams<float> params;
  TrainConfig config;
  int epoch = 0;
  std::vector<EpochRecord> history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Adam training with the step schedule of `config`. Deterministic for a given
// config and dataset.
Checkpoint train(const TrainConfig& config, const std::vector<Sample>& dataset, const EpochCallback& on_epoch = {});
Checkpoint train_prepared(const TrainConfig& config, const std::vector<PreparedSample>& dataset,
                          const EpochCallback& on_epoch = {});

// Corrected lanes at network scale for a prepared sample.
std::vector<LaneInstance> predict(const model::ModelParams<float>& params, const PreparedSample& sample);

// Corrected lanes (M points each) in original image coordinates.
std::vector<LaneInstance> correct(const Checkpoint& checkpoint, const Sample& sample);

}  // namespace plc::train
