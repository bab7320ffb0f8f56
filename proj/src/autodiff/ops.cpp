#include "plc/autodiff/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <string>

namespace plc::ad {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
}

template <typename T>
void require_rank(const Tensor<T>& x, int rank, const char* op) {
  if (x.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                     shape_str(x.shape()));
  }
}

struct ConvGeometry {
  int channels, height, width;
  int out_channels, kh, kw;
  int stride_h, stride_w, pad_h, pad_w;
  int out_h, out_w;

  bool is_pointwise() const {
    return kh == 1 && kw == 1 && stride_h == 1 && stride_w == 1 && pad_h == 0 && pad_w == 0;
  }
  int col_rows() const { return channels * kh * kw; }
  int col_cols() const { return out_h * out_w; }
};

template <typename T>
void im2col(const ConvGeometry& g, const T* input, T* cols) {
  const int n_cols = g.col_cols();
  for (int c = 0; c < g.channels; ++c) {
    for (int i = 0; i < g.kh; ++i) {
      for (int j = 0; j < g.kw; ++j) {
        T* row = cols + static_cast<std::size_t>((c * g.kh + i) * g.kw + j) * n_cols;
        for (int oy = 0; oy < g.out_h; ++oy) {
          const int iy = oy * g.stride_h - g.pad_h + i;
          T* dst = row + static_cast<std::size_t>(oy) * g.out_w;
          if (iy < 0 || iy >= g.height) {
            std::fill(dst, dst + g.out_w, T(0));
            continue;
          }
          const T* src = input + (static_cast<std::size_t>(c) * g.height + iy) * g.width;
          for (int ox = 0; ox < g.out_w; ++ox) {
            const int ix = ox * g.stride_w - g.pad_w + j;
            dst[ox] = (ix >= 0 && ix < g.width) ? src[ix] : T(0);
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const ConvGeometry& g, const T* cols, T* input_grad) {
  const int n_cols = g.col_cols();
  for (int c = 0; c < g.channels; ++c) {
    for (int i = 0; i < g.kh; ++i) {
      for (int j = 0; j < g.kw; ++j) {
        const T* row = cols + static_cast<std::size_t>((c * g.kh + i) * g.kw + j) * n_cols;
        for (int oy = 0; oy < g.out_h; ++oy) {
          const int iy = oy * g.stride_h - g.pad_h + i;
          if (iy < 0 || iy >= g.height) continue;
          const T* src = row + static_cast<std::size_t>(oy) * g.out_w;
          T* dst = input_grad + (static_cast<std::size_t>(c) * g.height + iy) * g.width;
          for (int ox = 0; ox < g.out_w; ++ox) {
            const int ix = ox * g.stride_w - g.pad_w + j;
            if (ix >= 0 && ix < g.width) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

// Shared 2D convolution kernel behind conv2d and conv1d.
template <typename T>
Tensor<T> conv_impl(const Tensor<T>& input, const Tensor<T>& kernel, const Tensor<T>& bias,
                    ConvGeometry g) {
  if (g.kh < 1 || g.kw < 1) throw ShapeError("conv: kernel extents must be >= 1");
  if (g.stride_h < 1 || g.stride_w < 1) throw ShapeError("conv: stride must be >= 1");
  if (g.pad_h < 0 || g.pad_w < 0) throw ShapeError("conv: padding must be >= 0");
  const int span_h = g.height + 2 * g.pad_h - g.kh;
  const int span_w = g.width + 2 * g.pad_w - g.kw;
  if (span_h < 0 || span_w < 0) throw ShapeError("conv: padded input smaller than kernel");
  g.out_h = span_h / g.stride_h + 1;
  g.out_w = span_w / g.stride_w + 1;
  if (bias.defined() && (bias.numel() != static_cast<std::size_t>(g.out_channels))) {
    throw ShapeError("conv: bias must hold C_out values, got " + shape_str(bias.shape()));
  }

  const int rows = g.col_rows();
  const int n_cols = g.col_cols();
  std::vector<T> cols_storage;
  const T* cols_ptr = input.data().data();
  if (!g.is_pointwise()) {
    cols_storage.resize(static_cast<std::size_t>(rows) * n_cols);
    im2col(g, input.data().data(), cols_storage.data());
    cols_ptr = cols_storage.data();
  }

  std::vector<T> out(static_cast<std::size_t>(g.out_channels) * n_cols);
  Eigen::Map<const RowMat<T>> weights(kernel.data().data(), g.out_channels, rows);
  Eigen::Map<const RowMat<T>> cols(cols_ptr, rows, n_cols);
  Eigen::Map<RowMat<T>> result(out.data(), g.out_channels, n_cols);
  result.noalias() = weights * cols;
  if (bias.defined()) {
    for (int o = 0; o < g.out_channels; ++o) result.row(o).array() += bias.data()[o];
  }

  std::vector<std::shared_ptr<Node<T>>> inputs{input.node(), kernel.node()};
  if (bias.defined()) inputs.push_back(bias.node());
  const bool has_bias = bias.defined();
  return make_result<T>(
      Shape{g.out_channels, g.out_h, g.out_w}, std::move(out), std::move(inputs),
      [g, has_bias](Node<T>& self) {
        Node<T>& in = *self.inputs[0];
        Node<T>& ker = *self.inputs[1];
        const int rows = g.col_rows();
        const int n_cols = g.col_cols();
        Eigen::Map<const RowMat<T>> grad_out(self.grad.data(), g.out_channels, n_cols);

        std::vector<T> cols_storage;
        const T* cols_ptr = in.value.data();
        if (!g.is_pointwise()) {
          cols_storage.resize(static_cast<std::size_t>(rows) * n_cols);
          im2col(g, in.value.data(), cols_storage.data());
          cols_ptr = cols_storage.data();
        }
        if (ker.requires_grad) {
          Eigen::Map<const RowMat<T>> cols(cols_ptr, rows, n_cols);
          Eigen::Map<RowMat<T>> grad_w(ker.ensure_grad().data(), g.out_channels, rows);
          grad_w.noalias() += grad_out * cols.transpose();
        }
        if (in.requires_grad) {
          Eigen::Map<const RowMat<T>> weights(ker.value.data(), g.out_channels, rows);
          if (g.is_pointwise()) {
            Eigen::Map<RowMat<T>> grad_in(in.ensure_grad().data(), rows, n_cols);
            grad_in.noalias() += weights.transpose() * grad_out;
          } else {
            RowMat<T> grad_cols = weights.transpose() * grad_out;
            col2im_add(g, grad_cols.data(), in.ensure_grad().data());
          }
        }
        if (has_bias) {
          Node<T>& b = *self.inputs[2];
          if (b.requires_grad) {
            auto& gb = b.ensure_grad();
            for (int o = 0; o < g.out_channels; ++o) gb[o] += grad_out.row(o).sum();
          }
        }
      });
}

}  // namespace

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "add");
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  return make_result<T>(a.shape(), std::move(out), {a.node(), b.node()}, [](Node<T>& self) {
    for (auto& in : self.inputs) {
      if (!in->requires_grad) continue;
      auto& g = in->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "sub");
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
  return make_result<T>(a.shape(), std::move(out), {a.node(), b.node()}, [](Node<T>& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      auto& in = self.inputs[k];
      if (!in->requires_grad) continue;
      const T sign = k == 0 ? T(1) : T(-1);
      auto& g = in->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += sign * self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "mul");
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
  return make_result<T>(a.shape(), std::move(out), {a.node(), b.node()}, [](Node<T>& self) {
    Node<T>& x = *self.inputs[0];
    Node<T>& y = *self.inputs[1];
    if (x.requires_grad) {
      auto& g = x.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * y.value[i];
    }
    if (y.requires_grad) {
      auto& g = y.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * x.value[i];
    }
  });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor) {
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * factor;
  return make_result<T>(a.shape(), std::move(out), {a.node()}, [factor](Node<T>& self) {
    auto& g = self.inputs[0]->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * factor;
  });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  std::vector<T> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const T v = x.data()[i];
    // Split on sign so exp never overflows.
    if (v >= 0) {
      out[i] = T(1) / (T(1) + std::exp(-v));
    } else {
      const T e = std::exp(v);
      out[i] = e / (T(1) + e);
    }
  }
  return make_result<T>(x.shape(), std::move(out), {x.node()}, [](Node<T>& self) {
    auto& g = self.inputs[0]->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const T s = self.value[i];
      g[i] += self.grad[i] * s * (T(1) - s);
    }
  });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  std::vector<T> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(x.data()[i], T(0));
  return make_result<T>(x.shape(), std::move(out), {x.node()}, [](Node<T>& self) {
    Node<T>& in = *self.inputs[0];
    auto& g = in.ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (in.value[i] > T(0)) g[i] += self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  T total = 0;
  for (T v : x.data()) total += v;
  return make_result<T>(Shape{1}, {total}, {x.node()}, [](Node<T>& self) {
    auto& g = self.inputs[0]->ensure_grad();
    for (auto& v : g) v += self.grad[0];
  });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& x) {
  return scale(sum(x), T(1) / static_cast<T>(x.numel()));
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw ShapeError("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
  }
  std::vector<T> out(x.data().begin(), x.data().end());
  return make_result<T>(std::move(shape), std::move(out), {x.node()}, [](Node<T>& self) {
    auto& g = self.inputs[0]->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

template <typename T>
Tensor<T> flatten(const Tensor<T>& x) {
  return reshape(x, Shape{static_cast<int>(x.numel())});
}

template <typename T>
Tensor<T> transpose2d(const Tensor<T>& x) {
  require_rank(x, 2, "transpose2d");
  const int rows = x.dim(0);
  const int cols = x.dim(1);
  std::vector<T> out(x.numel());
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) out[c * rows + r] = x.data()[r * cols + c];
  return make_result<T>(Shape{cols, rows}, std::move(out), {x.node()},
                        [rows, cols](Node<T>& self) {
                          auto& g = self.inputs[0]->ensure_grad();
                          for (int r = 0; r < rows; ++r)
                            for (int c = 0; c < cols; ++c) g[r * cols + c] += self.grad[c * rows + r];
                        });
}

template <typename T>
Tensor<T> concat(std::span<const Tensor<T>> parts) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  Shape shape = parts.front().shape();
  if (shape.empty()) throw ShapeError("concat: rank-0 input");
  const Shape tail(shape.begin() + 1, shape.end());
  int leading = 0;
  std::vector<std::shared_ptr<Node<T>>> inputs;
  std::vector<T> out;
  for (const auto& p : parts) {
    if (p.rank() != static_cast<int>(shape.size()) ||
        !std::equal(tail.begin(), tail.end(), p.shape().begin() + 1)) {
      throw ShapeError("concat: trailing extents differ, " + shape_str(shape) + " vs " +
                       shape_str(p.shape()));
    }
    leading += p.dim(0);
    out.insert(out.end(), p.data().begin(), p.data().end());
    inputs.push_back(p.node());
  }
  shape[0] = leading;
  return make_result<T>(std::move(shape), std::move(out), std::move(inputs), [](Node<T>& self) {
    std::size_t offset = 0;
    for (auto& in : self.inputs) {
      const std::size_t n = in->value.size();
      if (in->requires_grad) {
        auto& g = in->ensure_grad();
        for (std::size_t i = 0; i < n; ++i) g[i] += self.grad[offset + i];
      }
      offset += n;
    }
  });
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& kernel, const Tensor<T>& bias,
                 int stride, int padding) {
  require_rank(input, 3, "conv2d input");
  require_rank(kernel, 4, "conv2d kernel");
  if (kernel.dim(1) != input.dim(0)) {
    throw ShapeError("conv2d: kernel expects " + std::to_string(kernel.dim(1)) +
                     " input channels, input has " + std::to_string(input.dim(0)));
  }
  ConvGeometry g{};
  g.channels = input.dim(0);
  g.height = input.dim(1);
  g.width = input.dim(2);
  g.out_channels = kernel.dim(0);
  g.kh = kernel.dim(2);
  g.kw = kernel.dim(3);
  g.stride_h = g.stride_w = stride;
  g.pad_h = g.pad_w = padding;
  return conv_impl(input, kernel, bias, g);
}

template <typename T>
Tensor<T> conv1d(const Tensor<T>& input, const Tensor<T>& kernel, const Tensor<T>& bias,
                 int padding) {
  require_rank(input, 2, "conv1d input");
  require_rank(kernel, 3, "conv1d kernel");
  if (kernel.dim(1) != input.dim(0)) {
    throw ShapeError("conv1d: kernel expects " + std::to_string(kernel.dim(1)) +
                     " input channels, input has " + std::to_string(input.dim(0)));
  }
  ConvGeometry g{};
  g.channels = input.dim(0);
  g.height = 1;
  g.width = input.dim(1);
  g.out_channels = kernel.dim(0);
  g.kh = 1;
  g.kw = kernel.dim(2);
  g.stride_h = g.stride_w = 1;
  g.pad_h = 0;
  g.pad_w = padding;
  // [C,L] and [C,1,L] share the same row-major layout, likewise the kernels.
  Tensor<T> out = conv_impl(input, kernel, bias, g);
  return reshape(out, Shape{out.dim(0), out.dim(2)});
}

template <typename T>
Tensor<T> upsample_bilinear(const Tensor<T>& x, int out_h, int out_w) {
  require_rank(x, 3, "upsample_bilinear");
  if (out_h < 1 || out_w < 1) throw ShapeError("upsample_bilinear: output extents must be >= 1");
  const int channels = x.dim(0);
  const int in_h = x.dim(1);
  const int in_w = x.dim(2);

  struct Tap {
    int lo, hi;
    T frac;
  };
  auto taps = [](int n_in, int n_out) {
    std::vector<Tap> t(n_out);
    for (int i = 0; i < n_out; ++i) {
      const double src = n_out > 1 ? static_cast<double>(i) * (n_in - 1) / (n_out - 1) : 0.0;
      const int lo = std::min(static_cast<int>(std::floor(src)), n_in - 1);
      t[i] = {lo, std::min(lo + 1, n_in - 1), static_cast<T>(src - lo)};
    }
    return t;
  };
  auto ty = taps(in_h, out_h);
  auto tx = taps(in_w, out_w);

  std::vector<T> out(static_cast<std::size_t>(channels) * out_h * out_w);
  const T* src = x.data().data();
  for (int c = 0; c < channels; ++c) {
    const T* plane = src + static_cast<std::size_t>(c) * in_h * in_w;
    T* dst = out.data() + static_cast<std::size_t>(c) * out_h * out_w;
    for (int i = 0; i < out_h; ++i) {
      const Tap& a = ty[i];
      const T* r0 = plane + static_cast<std::size_t>(a.lo) * in_w;
      const T* r1 = plane + static_cast<std::size_t>(a.hi) * in_w;
      for (int j = 0; j < out_w; ++j) {
        const Tap& b = tx[j];
        const T top = r0[b.lo] + (r0[b.hi] - r0[b.lo]) * b.frac;
        const T bottom = r1[b.lo] + (r1[b.hi] - r1[b.lo]) * b.frac;
        dst[i * out_w + j] = top + (bottom - top) * a.frac;
      }
    }
  }
  return make_result<T>(
      Shape{channels, out_h, out_w}, std::move(out), {x.node()},
      [ty = std::move(ty), tx = std::move(tx), channels, in_h, in_w, out_h, out_w](Node<T>& self) {
        auto& g = self.inputs[0]->ensure_grad();
        for (int c = 0; c < channels; ++c) {
          T* plane = g.data() + static_cast<std::size_t>(c) * in_h * in_w;
          const T* up = self.grad.data() + static_cast<std::size_t>(c) * out_h * out_w;
          for (int i = 0; i < out_h; ++i) {
            const Tap& a = ty[i];
            for (int j = 0; j < out_w; ++j) {
              const Tap& b = tx[j];
              const T v = up[i * out_w + j];
              const T vt = v * (T(1) - a.frac);
              const T vb = v * a.frac;
              plane[a.lo * in_w + b.lo] += vt * (T(1) - b.frac);
              plane[a.lo * in_w + b.hi] += vt * b.frac;
              plane[a.hi * in_w + b.lo] += vb * (T(1) - b.frac);
              plane[a.hi * in_w + b.hi] += vb * b.frac;
            }
          }
        }
      });
}

template <typename T>
Tensor<T> bilinear_sample_points(const Tensor<T>& featuremap, std::span<const SamplePoint> points) {
  require_rank(featuremap, 3, "bilinear_sample");
  if (points.empty()) throw ShapeError("bilinear_sample: no sample points");
  const int channels = featuremap.dim(0);
  const int height = featuremap.dim(1);
  const int width = featuremap.dim(2);
  const std::size_t plane = static_cast<std::size_t>(height) * width;

  struct Corner {
    std::size_t idx[4];
    T w[4];
  };
  std::vector<Corner> corners(points.size());
  for (std::size_t n = 0; n < points.size(); ++n) {
    const double x = points[n].x;
    const double y = points[n].y;
    if (!(x >= 0.0 && x <= width - 1 && y >= 0.0 && y <= height - 1)) {
      throw std::out_of_range("bilinear_sample: point (" + std::to_string(x) + ", " +
                              std::to_string(y) + ") outside [0," + std::to_string(width - 1) +
                              "]x[0," + std::to_string(height - 1) + "]");
    }
    const int x0 = std::min(static_cast<int>(std::floor(x)), width - 1);
    const int y0 = std::min(static_cast<int>(std::floor(y)), height - 1);
    const int x1 = std::min(x0 + 1, width - 1);
    const int y1 = std::min(y0 + 1, height - 1);
    const T fx = static_cast<T>(x - x0);
    const T fy = static_cast<T>(y - y0);
    corners[n] = {{static_cast<std::size_t>(y0) * width + x0, static_cast<std::size_t>(y0) * width + x1,
                   static_cast<std::size_t>(y1) * width + x0, static_cast<std::size_t>(y1) * width + x1},
                  {(T(1) - fx) * (T(1) - fy), fx * (T(1) - fy), (T(1) - fx) * fy, fx * fy}};
  }

  std::vector<T> out(points.size() * channels);
  const T* src = featuremap.data().data();
  for (std::size_t n = 0; n < points.size(); ++n) {
    const Corner& k = corners[n];
    for (int c = 0; c < channels; ++c) {
      const T* p = src + c * plane;
      out[n * channels + c] =
          p[k.idx[0]] * k.w[0] + p[k.idx[1]] * k.w[1] + p[k.idx[2]] * k.w[2] + p[k.idx[3]] * k.w[3];
    }
  }
  return make_result<T>(Shape{static_cast<int>(points.size()), channels}, std::move(out),
                        {featuremap.node()},
                        [corners = std::move(corners), channels, plane](Node<T>& self) {
                          auto& g = self.inputs[0]->ensure_grad();
                          for (std::size_t n = 0; n < corners.size(); ++n) {
                            const Corner& k = corners[n];
                            for (int c = 0; c < channels; ++c) {
                              const T v = self.grad[n * channels + c];
                              T* p = g.data() + c * plane;
                              for (int q = 0; q < 4; ++q) p[k.idx[q]] += v * k.w[q];
                            }
                          }
                        });
}

template <typename T>
Tensor<T> bilinear_sample(const Tensor<T>& featuremap, double x, double y) {
  const SamplePoint p{x, y};
  return reshape(bilinear_sample_points(featuremap, std::span<const SamplePoint>(&p, 1)),
                 Shape{featuremap.dim(0)});
}

template <typename T>
Tensor<T> pool_over_positions(const Tensor<T>& x, PoolMode mode) {
  require_rank(x, 2, "pool_over_positions");
  const int rows = x.dim(0);
  const int cols = x.dim(1);
  std::vector<T> out(rows);
  std::vector<int> argmax(mode == PoolMode::kMax ? rows : 0);
  for (int r = 0; r < rows; ++r) {
    const T* row = x.data().data() + static_cast<std::size_t>(r) * cols;
    if (mode == PoolMode::kMax) {
      int best = 0;
      for (int c = 1; c < cols; ++c)
        if (row[c] > row[best]) best = c;
      argmax[r] = best;
      out[r] = row[best];
    } else {
      T total = 0;
      for (int c = 0; c < cols; ++c) total += row[c];
      out[r] = total / static_cast<T>(cols);
    }
  }
  return make_result<T>(Shape{rows, 1}, std::move(out), {x.node()},
                        [argmax = std::move(argmax), mode, rows, cols](Node<T>& self) {
                          auto& g = self.inputs[0]->ensure_grad();
                          for (int r = 0; r < rows; ++r) {
                            if (mode == PoolMode::kMax) {
                              g[static_cast<std::size_t>(r) * cols + argmax[r]] += self.grad[r];
                            } else {
                              const T share = self.grad[r] / static_cast<T>(cols);
                              for (int c = 0; c < cols; ++c) g[static_cast<std::size_t>(r) * cols + c] += share;
                            }
                          }
                        });
}

template <typename T>
Tensor<T> scale_rows(const Tensor<T>& x, const Tensor<T>& weights) {
  require_rank(x, 2, "scale_rows");
  const int rows = x.dim(0);
  const int cols = x.dim(1);
  if (weights.numel() != static_cast<std::size_t>(rows)) {
    throw ShapeError("scale_rows: need " + std::to_string(rows) + " weights, got " +
                     shape_str(weights.shape()));
  }
  std::vector<T> out(x.numel());
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      out[static_cast<std::size_t>(r) * cols + c] = x.data()[static_cast<std::size_t>(r) * cols + c] * weights.data()[r];
  return make_result<T>(x.shape(), std::move(out), {x.node(), weights.node()},
                        [rows, cols](Node<T>& self) {
                          Node<T>& in = *self.inputs[0];
                          Node<T>& w = *self.inputs[1];
                          if (in.requires_grad) {
                            auto& g = in.ensure_grad();
                            for (int r = 0; r < rows; ++r)
                              for (int c = 0; c < cols; ++c) {
                                const std::size_t i = static_cast<std::size_t>(r) * cols + c;
                                g[i] += self.grad[i] * w.value[r];
                              }
                          }
                          if (w.requires_grad) {
                            auto& g = w.ensure_grad();
                            for (int r = 0; r < rows; ++r) {
                              T acc = 0;
                              for (int c = 0; c < cols; ++c) {
                                const std::size_t i = static_cast<std::size_t>(r) * cols + c;
                                acc += self.grad[i] * in.value[i];
                              }
                              g[r] += acc;
                            }
                          }
                        });
}

#define PLC_AD_INSTANTIATE_OPS(T)                                                         \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                             \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                             \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                             \
  template Tensor<T> scale(const Tensor<T>&, T);                                          \
  template Tensor<T> sigmoid(const Tensor<T>&);                                           \
  template Tensor<T> relu(const Tensor<T>&);                                              \
  template Tensor<T> sum(const Tensor<T>&);                                               \
  template Tensor<T> mean(const Tensor<T>&);                                              \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                    \
  template Tensor<T> flatten(const Tensor<T>&);                                           \
  template Tensor<T> transpose2d(const Tensor<T>&);                                       \
  template Tensor<T> concat(std::span<const Tensor<T>>);                                  \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int, int); \
  template Tensor<T> conv1d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int);   \
  template Tensor<T> upsample_bilinear(const Tensor<T>&, int, int);                       \
  template Tensor<T> bilinear_sample_points(const Tensor<T>&, std::span<const SamplePoint>); \
  template Tensor<T> bilinear_sample(const Tensor<T>&, double, double);                   \
  template Tensor<T> pool_over_positions(const Tensor<T>&, PoolMode);                     \
  template Tensor<T> scale_rows(const Tensor<T>&, const Tensor<T>&);

PLC_AD_INSTANTIATE_OPS(float)
PLC_AD_INSTANTIATE_OPS(double)

}  // namespace plc::ad
