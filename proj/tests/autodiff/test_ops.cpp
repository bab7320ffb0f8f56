#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "../support/gradcheck.hpp"
#include "plc/autodiff/ops.hpp"

using namespace plc::ad;
using plc::testing::gradcheck;
using plc::testing::random_away_from_zero;
using plc::testing::random_tensor;

namespace {

constexpr double kOpTolerance = 1e-4;

// Direct summation, zero padding.
std::vector<double> conv2d_oracle(const Tensor<double>& in, const Tensor<double>& k, const Tensor<double>* bias,
                                  int stride, int pad, int& oh, int& ow) {
  const int c_in = in.dim(0), h = in.dim(1), w = in.dim(2);
  const int c_out = k.dim(0), kh = k.dim(2), kw = k.dim(3);
  oh = (h + 2 * pad - kh) / stride + 1;
  ow = (w + 2 * pad - kw) / stride + 1;
  std::vector<double> out(static_cast<std::size_t>(c_out) * oh * ow, 0.0);
  for (int o = 0; o < c_out; ++o)
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x) {
        double acc = bias ? bias->at({o}) : 0.0;
        for (int c = 0; c < c_in; ++c)
          for (int i = 0; i < kh; ++i)
            for (int j = 0; j < kw; ++j) {
              const int sy = y * stride - pad + i, sx = x * stride - pad + j;
              if (sy < 0 || sx < 0 || sy >= h || sx >= w) continue;
              acc += in.at({c, sy, sx}) * k.at({o, c, i, j});
            }
        out[(static_cast<std::size_t>(o) * oh + y) * ow + x] = acc;
      }
  return out;
}

std::vector<double> conv1d_oracle(const Tensor<double>& in, const Tensor<double>& k, int pad) {
  const int c_in = in.dim(0), len = in.dim(1), c_out = k.dim(0), kl = k.dim(2);
  const int out_len = len + 2 * pad - kl + 1;
  std::vector<double> out(static_cast<std::size_t>(c_out) * out_len, 0.0);
  for (int o = 0; o < c_out; ++o)
    for (int x = 0; x < out_len; ++x) {
      double acc = 0;
      for (int c = 0; c < c_in; ++c)
        for (int j = 0; j < kl; ++j) {
          const int s = x - pad + j;
          if (s >= 0 && s < len) acc += in.at({c, s}) * k.at({o, c, j});
        }
      out[static_cast<std::size_t>(o) * out_len + x] = acc;
    }
  return out;
}

// Weighted sum with fixed random weights, so every output entry matters.
Tensor<double> probe(const Tensor<double>& y, std::uint64_t seed = 99) {
  std::mt19937_64 rng(seed);
  return sum(mul(y, random_tensor(y.shape(), rng, -1, 1, false)));
}

}  // namespace

TEST(Conv2d, ScalarProduct) {
  Tensor<double> in({1, 1, 1}, {2});
  Tensor<double> k({1, 1, 1, 1}, {3});
  EXPECT_EQ(conv2d(in, k, 1, 0).item(), 6.0);
}

TEST(Conv2d, IdentityKernel) {
  std::mt19937_64 rng(1);
  auto in = random_tensor({3, 4, 5}, rng, -1, 1, false);
  std::vector<double> kv(9, 0.0);
  for (int c = 0; c < 3; ++c) kv[c * 3 + c] = 1.0;
  Tensor<double> k({3, 3, 1, 1}, kv);
  auto out = conv2d(in, k, 1, 0);
  ASSERT_EQ(out.shape(), in.shape());
  for (std::size_t i = 0; i < in.numel(); ++i) EXPECT_EQ(out.data()[i], in.data()[i]);
}

TEST(Conv2d, MatchesDirectSummation) {
  std::mt19937_64 rng(2);
  auto in = random_tensor({2, 5, 5}, rng, -1, 1, false);
  auto k = random_tensor({3, 2, 3, 3}, rng, -1, 1, false);
  for (int stride : {1, 2}) {
    for (int pad : {0, 1}) {
      int oh = 0, ow = 0;
      const auto expect = conv2d_oracle(in, k, nullptr, stride, pad, oh, ow);
      auto out = conv2d(in, k, stride, pad);
      ASSERT_EQ(out.shape(), (Shape{3, oh, ow}));
      for (std::size_t i = 0; i < expect.size(); ++i) EXPECT_NEAR(out.data()[i], expect[i], 1e-6);
    }
  }
}

TEST(Conv2d, BiasMatchesOracle) {
  std::mt19937_64 rng(3);
  auto in = random_tensor({2, 6, 7}, rng, -1, 1, false);
  auto k = random_tensor({4, 2, 3, 3}, rng, -1, 1, false);
  auto b = random_tensor({4}, rng, -1, 1, false);
  int oh = 0, ow = 0;
  const auto expect = conv2d_oracle(in, k, &b, 2, 1, oh, ow);
  auto out = conv2d(in, k, b, 2, 1);
  for (std::size_t i = 0; i < expect.size(); ++i) EXPECT_NEAR(out.data()[i], expect[i], 1e-9);
}

TEST(Conv2d, ShapeMismatchThrows) {
  auto in = Tensor<double>::zeros({2, 4, 4});
  auto k = Tensor<double>::zeros({1, 3, 3, 3});
  EXPECT_THROW(conv2d(in, k, 1, 1), ShapeError);
}

TEST(Conv1d, Identity) {
  Tensor<double> in({1, 3}, {1, 2, 3});
  Tensor<double> k({1, 1, 1}, {1});
  auto out = conv1d(in, k, 0);
  EXPECT_EQ(std::vector<double>(out.data().begin(), out.data().end()), (std::vector<double>{1, 2, 3}));
}

TEST(Conv1d, BoxSumZeroPadded) {
  Tensor<double> in({1, 3}, {1, 1, 1});
  Tensor<double> k({1, 1, 3}, {1, 1, 1});
  auto out = conv1d(in, k, 1);
  EXPECT_EQ(std::vector<double>(out.data().begin(), out.data().end()), (std::vector<double>{2, 3, 2}));
}

TEST(Conv1d, MatchesDirectSummation) {
  std::mt19937_64 rng(4);
  auto in = random_tensor({2, 7}, rng, -1, 1, false);
  auto k = random_tensor({1, 2, 3}, rng, -1, 1, false);
  for (int pad : {0, 1}) {
    const auto expect = conv1d_oracle(in, k, pad);
    auto out = conv1d(in, k, pad);
    ASSERT_EQ(out.numel(), expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i) EXPECT_NEAR(out.data()[i], expect[i], 1e-6);
  }
}

TEST(BilinearSample, ConstantField) {
  auto fm = Tensor<double>::full({2, 4, 5}, 0.7);
  auto v = bilinear_sample(fm, 2.3, 1.9);
  EXPECT_DOUBLE_EQ(v.data()[0], 0.7);
  EXPECT_DOUBLE_EQ(v.data()[1], 0.7);
}

TEST(BilinearSample, OnGridReadsPixel) {
  std::mt19937_64 rng(5);
  auto fm = random_tensor({3, 5, 4}, rng, -1, 1, false);
  auto v = bilinear_sample(fm, 2.0, 3.0);
  for (int c = 0; c < 3; ++c) EXPECT_EQ(v.data()[c], fm.at({c, 3, 2}));
}

TEST(BilinearSample, CellCentreAverage) {
  Tensor<double> fm({1, 2, 2}, {0, 1, 2, 3});
  EXPECT_DOUBLE_EQ(bilinear_sample(fm, 0.5, 0.5).item(), 1.5);
}

TEST(BilinearSample, OutOfRangeThrows) {
  auto fm = Tensor<double>::zeros({1, 3, 3});
  EXPECT_THROW(bilinear_sample(fm, 2.01, 1.0), std::out_of_range);
  EXPECT_THROW(bilinear_sample(fm, 1.0, -0.01), std::out_of_range);
}

TEST(BilinearSample, MatchesHandInterpolation) {
  std::mt19937_64 rng(6);
  auto fm = random_tensor({2, 4, 6}, rng, -1, 1, false);
  std::uniform_real_distribution<double> ux(0, 5), uy(0, 3);
  for (int t = 0; t < 20; ++t) {
    const double x = ux(rng), y = uy(rng);
    const int x0 = static_cast<int>(x), y0 = static_cast<int>(y);
    const int x1 = std::min(x0 + 1, 5), y1 = std::min(y0 + 1, 3);
    const double fx = x - x0, fy = y - y0;
    auto v = bilinear_sample(fm, x, y);
    for (int c = 0; c < 2; ++c) {
      const double expect = (1 - fx) * (1 - fy) * fm.at({c, y0, x0}) + fx * (1 - fy) * fm.at({c, y0, x1}) +
                            (1 - fx) * fy * fm.at({c, y1, x0}) + fx * fy * fm.at({c, y1, x1});
      EXPECT_NEAR(v.data()[c], expect, 1e-12);
    }
  }
}

TEST(Upsample, CornersAlign) {
  std::mt19937_64 rng(7);
  auto x = random_tensor({2, 3, 4}, rng, -1, 1, false);
  auto y = upsample_bilinear(x, 6, 8);
  ASSERT_EQ(y.shape(), (Shape{2, 6, 8}));
  for (int c = 0; c < 2; ++c) {
    EXPECT_DOUBLE_EQ(y.at({c, 0, 0}), x.at({c, 0, 0}));
    EXPECT_DOUBLE_EQ(y.at({c, 5, 7}), x.at({c, 2, 3}));
    EXPECT_DOUBLE_EQ(y.at({c, 0, 7}), x.at({c, 0, 3}));
    EXPECT_DOUBLE_EQ(y.at({c, 5, 0}), x.at({c, 2, 0}));
  }
}

TEST(Upsample, MatchesPointSampling) {
  std::mt19937_64 rng(8);
  auto x = random_tensor({1, 3, 5}, rng, -1, 1, false);
  auto y = upsample_bilinear(x, 7, 9);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 9; ++j) {
      const double sy = i * 2.0 / 6.0, sx = j * 4.0 / 8.0;
      EXPECT_NEAR(y.at({0, i, j}), bilinear_sample(x, sx, sy).item(), 1e-12);
    }
}

TEST(Pool, Examples) {
  Tensor<double> x({1, 3}, {1, 5, 3});
  EXPECT_EQ(pool_over_positions(x, PoolMode::kMax).item(), 5.0);
  EXPECT_EQ(pool_over_positions(x, PoolMode::kMean).item(), 3.0);
}

TEST(Pool, SingleColumnIsIdentity) {
  Tensor<double> x({3, 1}, {0.5, -2, 7});
  for (auto mode : {PoolMode::kMax, PoolMode::kMean}) {
    auto y = pool_over_positions(x, mode);
    for (int k = 0; k < 3; ++k) EXPECT_EQ(y.data()[k], x.data()[k]);
  }
}

TEST(Pool, MatchesLoopOracle) {
  std::mt19937_64 rng(9);
  auto x = random_tensor({4, 8}, rng, -1, 1, false);
  auto mx = pool_over_positions(x, PoolMode::kMax);
  auto mn = pool_over_positions(x, PoolMode::kMean);
  for (int k = 0; k < 4; ++k) {
    double best = x.at({k, 0}), total = 0;
    for (int m = 0; m < 8; ++m) {
      best = std::max(best, x.at({k, m}));
      total += x.at({k, m});
    }
    EXPECT_EQ(mx.data()[k], best);
    EXPECT_EQ(mn.data()[k], total / 8);
  }
}

TEST(Backward, SumGivesOnes) {
  std::mt19937_64 rng(10);
  auto x = random_tensor({2, 3, 4}, rng);
  sum(x).backward();
  for (double g : x.grad()) EXPECT_EQ(g, 1.0);
}

TEST(Backward, SigmoidAtZero) {
  auto x = Tensor<double>::zeros({5}, true);
  sum(sigmoid(x)).backward();
  for (double g : x.grad()) EXPECT_EQ(g, 0.25);
}

TEST(Backward, LeafGradientsAccumulate) {
  auto x = Tensor<double>::full({3}, 2.0, true);
  auto loss = sum(scale(x, 3.0));
  loss.backward();
  loss.backward();
  for (double g : x.grad()) EXPECT_EQ(g, 6.0);
  x.zero_grad();
  loss.backward();
  for (double g : x.grad()) EXPECT_EQ(g, 3.0);
}

TEST(Backward, SharedSubexpression) {
  auto x = Tensor<double>::full({2}, 3.0, true);
  auto y = mul(x, x);
  sum(add(y, y)).backward();
  for (double g : x.grad()) EXPECT_EQ(g, 12.0);
}

TEST(Backward, NonScalarThrows) {
  auto x = Tensor<double>::zeros({2}, true);
  EXPECT_THROW(scale(x, 2.0).backward(), ShapeError);
}

TEST(Backward, UntrackedInputsBuildNoGraph) {
  auto a = Tensor<double>::full({2}, 1.0);
  auto b = Tensor<double>::full({2}, 2.0);
  auto y = add(a, b);
  EXPECT_FALSE(y.requires_grad());
  EXPECT_TRUE(y.node()->inputs.empty());
}

TEST(Backward, ShapeMismatchThrows) {
  auto a = Tensor<double>::zeros({2, 3});
  auto b = Tensor<double>::zeros({3, 2});
  EXPECT_THROW(add(a, b), ShapeError);
  EXPECT_THROW(reshape(a, {4}), ShapeError);
}

// Finite-difference checks, one per differentiable op.

TEST(GradCheck, Elementwise) {
  std::mt19937_64 rng(11);
  auto a = random_tensor({3, 4}, rng);
  auto b = random_tensor({3, 4}, rng);
  EXPECT_LT(gradcheck({a, b}, [&] { return probe(add(a, b)); }), kOpTolerance);
  EXPECT_LT(gradcheck({a, b}, [&] { return probe(sub(a, b)); }), kOpTolerance);
  EXPECT_LT(gradcheck({a, b}, [&] { return probe(mul(a, b)); }), kOpTolerance);
  EXPECT_LT(gradcheck({a}, [&] { return probe(scale(a, -1.7)); }), kOpTolerance);
}

TEST(GradCheck, Activations) {
  std::mt19937_64 rng(12);
  auto a = random_tensor({3, 5}, rng, -4, 4);
  EXPECT_LT(gradcheck({a}, [&] { return probe(sigmoid(a)); }), kOpTolerance);
  auto r = random_away_from_zero({3, 5}, rng);
  EXPECT_LT(gradcheck({r}, [&] { return probe(relu(r)); }), kOpTolerance);
}

TEST(GradCheck, Reductions) {
  std::mt19937_64 rng(13);
  auto a = random_tensor({2, 3, 4}, rng);
  EXPECT_LT(gradcheck({a}, [&] { return scale(sum(a), 0.3); }), kOpTolerance);
  EXPECT_LT(gradcheck({a}, [&] { return mul(mean(a), mean(a)); }), kOpTolerance);
}

TEST(GradCheck, ShapeOps) {
  std::mt19937_64 rng(14);
  auto a = random_tensor({2, 3, 4}, rng);
  auto b = random_tensor({1, 3, 4}, rng);
  EXPECT_LT(gradcheck({a}, [&] { return probe(reshape(a, {6, 4})); }), kOpTolerance);
  EXPECT_LT(gradcheck({a}, [&] { return probe(flatten(a)); }), kOpTolerance);
  auto m = random_tensor({3, 5}, rng);
  EXPECT_LT(gradcheck({m}, [&] { return probe(transpose2d(m)); }), kOpTolerance);
  EXPECT_LT(gradcheck({a, b},
                      [&] {
                        std::vector<Tensor<double>> parts{a, b};
                        return probe(concat<double>(parts));
                      }),
            kOpTolerance);
}

TEST(GradCheck, Conv2d) {
  std::mt19937_64 rng(15);
  auto in = random_tensor({2, 6, 5}, rng);
  auto k = random_tensor({3, 2, 3, 3}, rng);
  auto b = random_tensor({3}, rng);
  EXPECT_LT(gradcheck({in, k, b}, [&] { return probe(conv2d(in, k, b, 1, 1)); }), kOpTolerance);
  EXPECT_LT(gradcheck({in, k, b}, [&] { return probe(conv2d(in, k, b, 2, 1)); }), kOpTolerance);
  auto pw = random_tensor({4, 2, 1, 1}, rng);
  EXPECT_LT(gradcheck({in, pw}, [&] { return probe(conv2d(in, pw, 1, 0)); }), kOpTolerance);
}

TEST(GradCheck, Conv1d) {
  std::mt19937_64 rng(16);
  auto in = random_tensor({2, 7}, rng);
  auto k = random_tensor({3, 2, 3}, rng);
  auto b = random_tensor({3}, rng);
  EXPECT_LT(gradcheck({in, k, b}, [&] { return probe(conv1d(in, k, b, 1)); }), kOpTolerance);
  auto pw = random_tensor({4, 2, 1}, rng);
  EXPECT_LT(gradcheck({in, pw}, [&] { return probe(conv1d(in, pw, 0)); }), kOpTolerance);
}

TEST(GradCheck, Upsample) {
  std::mt19937_64 rng(17);
  auto x = random_tensor({2, 3, 4}, rng);
  EXPECT_LT(gradcheck({x}, [&] { return probe(upsample_bilinear(x, 7, 9)); }), kOpTolerance);
  EXPECT_LT(gradcheck({x}, [&] { return probe(upsample_bilinear(x, 2)); }), kOpTolerance);
}

TEST(GradCheck, BilinearSample) {
  std::mt19937_64 rng(18);
  auto fm = random_tensor({3, 5, 6}, rng);
  const std::vector<SamplePoint> pts{{0.3, 0.7}, {4.9, 3.2}, {2.0, 4.0}, {5.0, 1.5}};
  EXPECT_LT(gradcheck({fm}, [&] { return probe(bilinear_sample_points<double>(fm, pts)); }), kOpTolerance);
}

TEST(GradCheck, PoolAndScaleRows) {
  std::mt19937_64 rng(19);
  auto x = random_tensor({4, 6}, rng);
  auto w = random_tensor({4}, rng);
  EXPECT_LT(gradcheck({x}, [&] { return probe(pool_over_positions(x, PoolMode::kMax)); }), kOpTolerance);
  EXPECT_LT(gradcheck({x}, [&] { return probe(pool_over_positions(x, PoolMode::kMean)); }), kOpTolerance);
  EXPECT_LT(gradcheck({x, w}, [&] { return probe(scale_rows(x, w)); }), kOpTolerance);
}

TEST(GradCheck, CompositeGraph) {
  std::mt19937_64 rng(20);
  auto img = random_tensor({2, 8, 8}, rng);
  auto k1 = random_tensor({3, 2, 3, 3}, rng);
  auto k2 = random_tensor({1, 2, 3}, rng);
  auto loss = [&] {
    auto f = sigmoid(conv2d(img, k1, 2, 1));                      // [3,4,4]
    auto up = upsample_bilinear(f, 8, 8);                         // [3,8,8]
    std::vector<SamplePoint> pts{{1.2, 3.4}, {6.5, 0.5}, {3.0, 7.0}};
    auto t = transpose2d(bilinear_sample_points<double>(up, pts));  // [3,3]
    std::vector<Tensor<double>> pooled{reshape(pool_over_positions(t, PoolMode::kMax), {1, 3}),
                                       reshape(pool_over_positions(t, PoolMode::kMean), {1, 3})};
    auto w = sigmoid(conv1d(concat<double>(pooled), k2, 1));      // [1,3]
    return probe(scale_rows(t, w));
  };
  EXPECT_LT(gradcheck({img, k1, k2}, loss), kOpTolerance);
}

TEST(GradCheck, PiecewiseExcludesStencilsAcrossKink) {
  // 0.0004 sits inside the +-1e-3 stencil of relu's kink; 0.5 and -0.7 do not.
  Tensor<double> x({3}, {0.0004, 0.5, -0.7}, true);
  auto loss = [&] { return sum(relu(x)); };
  auto signs = [&] {
    std::vector<std::uint8_t> s;
    for (double v : x.data()) s.push_back(v > 0);
    return s;
  };
  const auto r = plc::testing::gradcheck_piecewise({x}, loss, signs);
  EXPECT_EQ(r.probes, 3u);
  EXPECT_EQ(r.straddling, 1u);
  EXPECT_LT(r.error, 1e-9);
  EXPECT_GT(r.unfiltered, 1e-2);
}
