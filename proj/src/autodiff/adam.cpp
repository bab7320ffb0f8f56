#include "plc/autodiff/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace plc::ad {

template <typename T>
void Adam<T>::step(std::vector<NamedParam<T>>& params, double lr) {
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.tensor.numel(), 0.0);
      v_.emplace_back(p.tensor.numel(), 0.0);
    }
  }
  if (m_.size() != params.size()) throw std::logic_error("Adam: parameter list changed between steps");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (m_[i].size() != params[i].tensor.numel()) {
      throw ShapeError("Adam: parameter '" + params[i].name + "' changed size");
    }
    if (!params[i].tensor.has_grad()) continue;
    for (T g : params[i].tensor.grad()) {
      if (!std::isfinite(static_cast<double>(g))) {
        throw std::runtime_error("Adam: non-finite gradient in parameter '" + params[i].name + "'");
      }
    }
  }

  ++step_count_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(step_count_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(step_count_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto values = params[i].tensor.mutable_data();
    const bool has_grad = params[i].tensor.has_grad();
    auto grad = params[i].tensor.grad();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double g = has_grad ? static_cast<double>(grad[k]) : 0.0;
      m[k] = b1 * m[k] + (1.0 - b1) * g;
      v[k] = b2 * v[k] + (1.0 - b2) * g * g;
      const double m_hat = m[k] / correction1;
      const double v_hat = v[k] / correction2;
      values[k] = static_cast<T>(static_cast<double>(values[k]) -
                                 lr * m_hat / (std::sqrt(v_hat) + config_.epsilon));
    }
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace plc::ad
