#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace plc::ad {

using Shape = std::vector<int>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

template <typename T>
struct Node {
  Shape shape;
  std::vector<T> value;
  // Empty until the first backward pass reaches this node.
  std::vector<T> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this node's grad and accumulates into the inputs' grads.
  std::function<void(Node&)> backward;

  bool is_leaf() const { return !backward; }
  std::vector<T>& ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), T(0));
    return grad;
  }
};

// Dense row-major tensor with optional reverse-mode gradient tracking.
//
// A Tensor is a cheap handle; copies share the underlying node. Values are
// treated as immutable once an op has consumed them, with the exception of
// parameter leaves that an optimizer updates between steps.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  Tensor(Shape shape, std::vector<T> values, bool requires_grad = false);
  explicit Tensor(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, T value, bool requires_grad = false);
  static Tensor scalar(T value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  int rank() const { return static_cast<int>(node_->shape.size()); }
  int dim(int axis) const;
  std::size_t numel() const { return node_->value.size(); }

  std::span<const T> data() const { return node_->value; }
  // Direct write access for initialisation and optimizer updates.
  std::span<T> mutable_data() { return node_->value; }
  T item() const;
  T at(std::initializer_list<int> index) const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool flag);
  bool has_grad() const { return node_->grad.size() == node_->value.size() && !node_->value.empty(); }
  std::span<const T> grad() const { return node_->grad; }
  void zero_grad();

  // Reverse pass from a scalar. Leaf gradients accumulate across calls until
  // zero_grad(); intermediate gradients are reset at the start of each call.
  void backward() const;

  // Copy of the values with no graph history.
  Tensor detach() const;

  const std::shared_ptr<Node<T>>& node() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

// Builds an op result. The backward closure is only kept when at least one
// input tracks gradients.
template <typename T>
Tensor<T> make_result(Shape shape, std::vector<T> values,
                      std::vector<std::shared_ptr<Node<T>>> inputs,
                      std::function<void(Node<T>&)> backward) {
  auto node = std::make_shared<Node<T>>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  bool tracked = false;
  for (const auto& in : inputs) tracked = tracked || in->requires_grad;
  if (tracked) {
    node->requires_grad = true;
    node->inputs = std::move(inputs);
    node->backward = std::move(backward);
  }
  return Tensor<T>(std::move(node));
}

template <typename T>
inline void accumulate(Node<T>& node, std::size_t i, T g) {
  if (node.requires_grad) node.ensure_grad()[i] += g;
}

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace plc::ad
