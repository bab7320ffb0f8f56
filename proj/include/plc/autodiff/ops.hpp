#pragma once

#include <span>
#include <vector>

#include "plc/autodiff/tensor.hpp"

namespace plc::ad {

// Elementwise, same-shape.
template <typename T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> scale(const Tensor<T>& a, T factor);

template <typename T> Tensor<T> sigmoid(const Tensor<T>& x);
template <typename T> Tensor<T> relu(const Tensor<T>& x);

// Reductions to a [1] tensor.
template <typename T> Tensor<T> sum(const Tensor<T>& x);
template <typename T> Tensor<T> mean(const Tensor<T>& x);

template <typename T> Tensor<T> reshape(const Tensor<T>& x, Shape shape);
template <typename T> Tensor<T> flatten(const Tensor<T>& x);
template <typename T> Tensor<T> transpose2d(const Tensor<T>& x);

// Concatenates along axis 0; trailing extents must agree.
template <typename T> Tensor<T> concat(std::span<const Tensor<T>> parts);

// input [C_in,H,W], kernel [C_out,C_in,kh,kw], optional bias [C_out].
// Output extent per axis: floor((n + 2*padding - k) / stride) + 1.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& kernel, const Tensor<T>& bias,
                 int stride, int padding);
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& kernel, int stride, int padding) {
  return conv2d(input, kernel, Tensor<T>{}, stride, padding);
}

// input [C_in,L], kernel [C_out,C_in,k], optional bias [C_out]. Stride 1.
template <typename T>
Tensor<T> conv1d(const Tensor<T>& input, const Tensor<T>& kernel, const Tensor<T>& bias,
                 int padding);
template <typename T>
Tensor<T> conv1d(const Tensor<T>& input, const Tensor<T>& kernel, int padding) {
  return conv1d(input, kernel, Tensor<T>{}, padding);
}

// Bilinear resize of [C,H,W] to [C,out_h,out_w] with corner alignment: the
// centres of the four corner pixels of input and output coincide, so output
// pixel (i, j) reads input coordinate (i*(H-1)/(out_h-1), j*(W-1)/(out_w-1)).
template <typename T>
Tensor<T> upsample_bilinear(const Tensor<T>& x, int out_h, int out_w);
template <typename T>
Tensor<T> upsample_bilinear(const Tensor<T>& x, int factor) {
  return upsample_bilinear(x, x.dim(1) * factor, x.dim(2) * factor);
}

struct SamplePoint {
  double x = 0;
  double y = 0;
};

// Bilinear read of [C,H,W] at n points; pixel centres sit on integer
// coordinates. Every point must satisfy 0 <= x <= W-1, 0 <= y <= H-1.
// Returns [n, C]. Gradient flows to the feature map only.
template <typename T>
Tensor<T> bilinear_sample_points(const Tensor<T>& featuremap, std::span<const SamplePoint> points);
// Single point, returns [C].
template <typename T>
Tensor<T> bilinear_sample(const Tensor<T>& featuremap, double x, double y);

enum class PoolMode { kMax, kMean };

// [K,M] -> [K,1]. Max routes gradient to the first maximal index.
template <typename T>
Tensor<T> pool_over_positions(const Tensor<T>& x, PoolMode mode);

// x [K,M] with row k multiplied by weights[k]; weights holds K values in any shape.
template <typename T>
Tensor<T> scale_rows(const Tensor<T>& x, const Tensor<T>& weights);

#define PLC_AD_DECLARE_OPS(T)                                                                   \
  extern template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                            \
  extern template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                            \
  extern template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                            \
  extern template Tensor<T> scale(const Tensor<T>&, T);                                         \
  extern template Tensor<T> sigmoid(const Tensor<T>&);                                          \
  extern template Tensor<T> relu(const Tensor<T>&);                                             \
  extern template Tensor<T> sum(const Tensor<T>&);                                              \
  extern template Tensor<T> mean(const Tensor<T>&);                                             \
  extern template Tensor<T> reshape(const Tensor<T>&, Shape);                                   \
  extern template Tensor<T> flatten(const Tensor<T>&);                                          \
  extern template Tensor<T> transpose2d(const Tensor<T>&);                                      \
  extern template Tensor<T> concat(std::span<const Tensor<T>>);                                 \
  extern template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int,   \
                                   int);                                                        \
  extern template Tensor<T> conv1d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int);  \
  extern template Tensor<T> upsample_bilinear(const Tensor<T>&, int, int);                      \
  extern template Tensor<T> bilinear_sample_points(const Tensor<T>&,                            \
                                                   std::span<const SamplePoint>);               \
  extern template Tensor<T> bilinear_sample(const Tensor<T>&, double, double);                  \
  extern template Tensor<T> pool_over_positions(const Tensor<T>&, PoolMode);                    \
  extern template Tensor<T> scale_rows(const Tensor<T>&, const Tensor<T>&);

PLC_AD_DECLARE_OPS(float)
PLC_AD_DECLARE_OPS(double)
#undef PLC_AD_DECLARE_OPS

}  // namespace plc::ad
