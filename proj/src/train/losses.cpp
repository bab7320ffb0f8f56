#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "plc/autodiff/ops.hpp"
#include "plc/train/train.hpp"

namespace plc::train {

using ad::Tensor;

template <typename T>
Tensor<T> focal_loss(const Tensor<T>& seg_logits, const BinaryMap& label) {
  if (seg_logits.rank() != 3 || seg_logits.dim(0) != 1 || seg_logits.dim(1) != label.height ||
      seg_logits.dim(2) != label.width) {
    throw ad::ShapeError("focal_loss: logits " + ad::shape_str(seg_logits.shape()) + " do not match a " +
                         std::to_string(label.height) + "x" + std::to_string(label.width) + " label");
  }
  for (auto v : label.cells) {
    if (v > 1) throw std::invalid_argument("focal_loss: label values must be 0 or 1");
  }
  constexpr double kMinLog = 1e-12;
  const double alpha = kFocalAlpha;
  const double gamma = kFocalGamma;
  const std::size_t n = label.cells.size();
  // d loss / d logit per pixel, before the 1/n of the mean.
  std::vector<T> dlogit(n);
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = static_cast<double>(seg_logits.data()[i]);
    const double p = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    if (label.cells[i]) {
      const double log_p = std::log(std::max(p, kMinLog));
      total += -alpha * std::pow(1.0 - p, gamma) * log_p;
      dlogit[i] = static_cast<T>(alpha * std::pow(1.0 - p, gamma) * (gamma * p * log_p - (1.0 - p)));
    } else {
      const double log_q = std::log(std::max(1.0 - p, kMinLog));
      total += -(1.0 - alpha) * std::pow(p, gamma) * log_q;
      dlogit[i] = static_cast<T>((1.0 - alpha) * std::pow(p, gamma) * (p - gamma * (1.0 - p) * log_q));
    }
  }
  const T inv_n = T(1) / static_cast<T>(n);
  return ad::make_result<T>(ad::Shape{1}, {static_cast<T>(total / static_cast<double>(n))}, {seg_logits.node()},
                            [dlogit = std::move(dlogit), inv_n](ad::Node<T>& self) {
                              auto& g = self.inputs[0]->ensure_grad();
                              const T up = self.grad[0] * inv_n;
                              for (std::size_t i = 0; i < g.size(); ++i) g[i] += up * dlogit[i];
                            });
}

template <typename T>
Tensor<T> offset_loss(std::span<const Tensor<T>> predicted, std::span<const model::OffsetField> targets) {
  if (predicted.size() != targets.size()) {
    throw std::invalid_argument("offset_loss: " + std::to_string(predicted.size()) + " predictions for " +
                                std::to_string(targets.size()) + " targets");
  }
  std::size_t points = 0;
  for (std::size_t l = 0; l < predicted.size(); ++l) {
    const auto& pred = predicted[l];
    if (pred.rank() != 2 || pred.dim(0) != 2 || static_cast<std::size_t>(pred.dim(1)) != targets[l].deltas.size()) {
      throw std::invalid_argument("offset_loss: lane " + std::to_string(l) + " prediction " +
                                  ad::shape_str(pred.shape()) + " does not match " +
                                  std::to_string(targets[l].deltas.size()) + " targets");
    }
    points += targets[l].deltas.size();
  }
  if (points == 0) return Tensor<T>::scalar(T(0));

  std::vector<std::shared_ptr<ad::Node<T>>> inputs;
  std::vector<std::vector<T>> dpred;  // d loss / d prediction, before the 1/points
  double total = 0;
  for (std::size_t l = 0; l < predicted.size(); ++l) {
    const auto values = predicted[l].data();
    const std::size_t m = targets[l].deltas.size();
    std::vector<T> grad(2 * m);
    for (std::size_t k = 0; k < m; ++k) {
      const double dx = static_cast<double>(values[k]) - targets[l].deltas[k].x;
      const double dy = static_cast<double>(values[m + k]) - targets[l].deltas[k].y;
      const double s = std::abs(dx) + std::abs(dy);
      total += s < 1.0 ? 0.5 * s * s : s - 0.5;
      const double slope = std::min(s, 1.0);
      grad[k] = static_cast<T>(slope * ((dx > 0) - (dx < 0)));
      grad[m + k] = static_cast<T>(slope * ((dy > 0) - (dy < 0)));
    }
    inputs.push_back(predicted[l].node());
    dpred.push_back(std::move(grad));
  }
  const T inv_n = T(1) / static_cast<T>(points);
  return ad::make_result<T>(ad::Shape{1}, {static_cast<T>(total / static_cast<double>(points))}, std::move(inputs),
                            [dpred = std::move(dpred), inv_n](ad::Node<T>& self) {
                              const T up = self.grad[0] * inv_n;
                              for (std::size_t l = 0; l < self.inputs.size(); ++l) {
                                auto& in = *self.inputs[l];
                                if (!in.requires_grad) continue;
                                auto& g = in.ensure_grad();
                                for (std::size_t i = 0; i < g.size(); ++i) g[i] += up * dpred[l][i];
                              }
                            });
}

template Tensor<float> focal_loss(const Tensor<float>&, const BinaryMap&);
template Tensor<double> focal_loss(const Tensor<double>&, const BinaryMap&);
template Tensor<float> offset_loss(std::span<const Tensor<float>>, std::span<const model::OffsetField>);
template Tensor<double> offset_loss(std::span<const Tensor<double>>, std::span<const model::OffsetField>);

}  // namespace plc::train
