#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "plc/autodiff/tensor.hpp"

namespace plc::ad {

template <typename T>
struct NamedParam {
  std::string name;
  Tensor<T> tensor;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam. Moments are allocated on the first step and must keep
// matching the parameter list (same order, same shapes) afterwards.
template <typename T>
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  // Applies one update from the parameters' current gradients. Parameters
  // without a gradient buffer are treated as having a zero gradient.
  // Throws std::runtime_error naming the parameter if a gradient is not finite.
  void step(std::vector<NamedParam<T>>& params, double lr);

  std::int64_t step_count() const { return step_count_; }
  const AdamConfig& config() const { return config_; }
  const std::vector<std::vector<double>>& first_moment() const { return m_; }
  const std::vector<std::vector<double>>& second_moment() const { return v_; }

 private:
  AdamConfig config_;
  std::int64_t step_count_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace plc::ad
