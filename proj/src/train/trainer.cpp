#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

#include "plc/autodiff/ops.hpp"
#include "plc/core/log.hpp"
#include "plc/synth/synth.hpp"
#include "plc/train/train.hpp"

namespace plc::train {

using ad::Tensor;

namespace {

struct Tap {
  int index;
  float weight;
};

// Source taps of each output sample along one axis. Output i is centred at
// source coordinate i * scale and averages round(scale) bilinear reads spread
// over its footprint.
std::vector<std::vector<Tap>> resample_taps(int n_in, int n_out) {
  const double scale = static_cast<double>(n_in) / n_out;
  const int reads = std::max(1, static_cast<int>(std::lround(scale)));
  std::vector<std::vector<Tap>> taps(n_out);
  for (int i = 0; i < n_out; ++i) {
    std::map<int, double> acc;
    for (int q = 0; q < reads; ++q) {
      const double offset = ((q + 0.5) / reads - 0.5) * scale;
      const double x = std::clamp(i * scale + offset, 0.0, static_cast<double>(n_in - 1));
      const int lo = static_cast<int>(std::floor(x));
      const double f = x - lo;
      acc[lo] += (1.0 - f) / reads;
      if (f > 0) acc[std::min(lo + 1, n_in - 1)] += f / reads;
    }
    for (const auto& [index, weight] : acc) taps[i].push_back({index, static_cast<float>(weight)});
  }
  return taps;
}

}  // namespace

Tensor<float> resize_image(const PointCloudImage& image, int net_height, int net_width) {
  const int h = image.height, w = image.width;
  if (h <= 0 || w <= 0 || image.rgb.size() != static_cast<std::size_t>(h) * w * 3) {
    throw std::invalid_argument("resize_image: malformed image buffer");
  }
  const auto tx = resample_taps(w, net_width);
  const auto ty = resample_taps(h, net_height);
  // Horizontal pass into [3, h, net_width], then vertical.
  std::vector<float> rows(static_cast<std::size_t>(3) * h * net_width, 0.0f);
  for (int c = 0; c < 3; ++c)
    for (int r = 0; r < h; ++r)
      for (int j = 0; j < net_width; ++j) {
        float v = 0;
        for (const Tap& t : tx[j]) v += t.weight * image.at(r, t.index, c);
        rows[(static_cast<std::size_t>(c) * h + r) * net_width + j] = v;
      }
  std::vector<float> out(static_cast<std::size_t>(3) * net_height * net_width, 0.0f);
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < net_height; ++i)
      for (int j = 0; j < net_width; ++j) {
        float v = 0;
        for (const Tap& t : ty[i]) v += t.weight * rows[(static_cast<std::size_t>(c) * h + t.index) * net_width + j];
        out[(static_cast<std::size_t>(c) * net_height + i) * net_width + j] = v / 255.0f;
      }
  return Tensor<float>({3, net_height, net_width}, std::move(out));
}

NetScale net_scale(const PointCloudImage& image, const TrainConfig& config) {
  return {static_cast<double>(config.net_width) / image.width, static_cast<double>(config.net_height) / image.height};
}

Polyline scale_points(const Polyline& points, double sx, double sy) {
  Polyline out;
  out.reserve(points.size());
  for (const Point2& p : points) out.push_back({p.x * sx, p.y * sy});
  return out;
}

PreparedSample prepare_sample(const Sample& sample, const TrainConfig& config, bool with_targets) {
  config.validate();
  PreparedSample out;
  out.image_id = sample.image_id;
  out.scale = net_scale(sample.image, config);
  out.image = resize_image(sample.image, config.net_height, config.net_width);

  auto to_net = [&](const LaneInstance& lane) {
    LaneInstance scaled{lane.track_id, lane.role, resample_lane(scale_points(lane.points, out.scale.sx, out.scale.sy), config.M)};
    return scaled;
  };

  if (!with_targets) {
    for (const auto& lane : sample.initial_lanes) out.initial.push_back(to_net(lane));
    return out;
  }

  std::vector<LaneInstance> gt_scaled;
  for (const auto& lane : sample.gt_lanes) {
    gt_scaled.push_back({lane.track_id, lane.role, scale_points(lane.points, out.scale.sx, out.scale.sy)});
  }
  out.label = synth::rasterize_label(gt_scaled, config.net_height, config.net_width);

  std::map<int, const LaneInstance*> initial_by_id;
  for (const auto& lane : sample.initial_lanes) initial_by_id[lane.track_id] = &lane;
  for (const auto& gt : sample.gt_lanes) {
    const auto it = initial_by_id.find(gt.track_id);
    if (it == initial_by_id.end()) {
      log::warn(sample.image_id + ": ground-truth lane " + std::to_string(gt.track_id) +
                " has no matching initial lane, skipped");
      continue;
    }
    LaneInstance init = to_net(*it->second);
    LaneInstance target_lane = to_net(gt);
    model::OffsetField target;
    for (int k = 0; k < config.M; ++k) target.deltas.push_back(target_lane.points[k] - init.points[k]);
    out.initial.push_back(std::move(init));
    out.gt.push_back(std::move(target_lane));
    out.targets.push_back(std::move(target));
  }
  return out;
}

Checkpoint train_prepared(const TrainConfig& config, const std::vector<PreparedSample>& dataset,
                          const EpochCallback& on_epoch) {
  config.validate();
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
  for (const auto& s : dataset) {
    if (s.image.dim(1) != config.net_height || s.image.dim(2) != config.net_width) {
      throw std::invalid_argument("train: sample " + s.image_id + " was prepared for a different network size");
    }
  }

  Checkpoint ckpt;
  ckpt.config = config;
  ckpt.params = model::init_params<float>(config.P, config.seed);
  auto named = ckpt.params.named_parameters();
  ad::Adam<float> adam;
  std::mt19937_64 order_rng(synth::mix_seed(config.seed, 0x6f72646572ULL));
  std::vector<std::size_t> order(dataset.size());

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const double lr = config.lr_for_epoch(epoch);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[order_rng() % i]);

    double seg_total = 0, offset_total = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const float share = 1.0f / static_cast<float>(end - start);
      ckpt.params.zero_grad();
      for (std::size_t b = start; b < end; ++b) {
        const PreparedSample& s = dataset[order[b]];
        const auto result = model::forward(s.image, s.initial, ckpt.params);
        const Tensor<float> seg = focal_loss(result.seg_logits, s.label);
        const Tensor<float> off = offset_loss<float>(result.offsets, s.targets);
        const Tensor<float> loss = ad::scale(
            ad::add(ad::scale(seg, static_cast<float>(config.seg_loss_weight)),
                    ad::scale(off, static_cast<float>(config.offset_loss_weight))),
            share);
        if (!std::isfinite(loss.item())) {
          throw std::runtime_error("train: non-finite loss on sample " + s.image_id + " in epoch " + std::to_string(epoch));
        }
        loss.backward();
        seg_total += seg.item();
        offset_total += off.item();
      }
      adam.step(named, lr);
    }
    const double n = static_cast<double>(dataset.size());
    EpochRecord record{epoch, seg_total / n, offset_total / n, lr};
    ckpt.history.push_back(record);
    ckpt.epoch = epoch;
    if (on_epoch) on_epoch(record);
  }
  return ckpt;
}

Checkpoint train(const TrainConfig& config, const std::vector<Sample>& dataset, const EpochCallback& on_epoch) {
  config.validate();
  std::vector<PreparedSample> prepared;
  prepared.reserve(dataset.size());
  for (const auto& s : dataset) prepared.push_back(prepare_sample(s, config));
  return train_prepared(config, prepared, on_epoch);
}

std::vector<LaneInstance> predict(const model::ModelParams<float>& params, const PreparedSample& sample) {
  model::ModelParams<float> frozen = params.cast<float>();
  frozen.set_requires_grad(false);
  return model::forward(sample.image, sample.initial, frozen).corrected;
}

std::vector<LaneInstance> correct(const Checkpoint& checkpoint, const Sample& sample) {
  const PreparedSample prepared = prepare_sample(sample, checkpoint.config, false);
  std::vector<LaneInstance> lanes = predict(checkpoint.params, prepared);
  for (auto& lane : lanes) lane.points = scale_points(lane.points, 1.0 / prepared.scale.sx, 1.0 / prepared.scale.sy);
  return lanes;
}

}  // namespace plc::train
