#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "../support/gradcheck.hpp"
#include "plc/autodiff/ops.hpp"
#include "plc/train/train.hpp"

using namespace plc;
using namespace plc::train;
using ad::Tensor;
using plc::testing::gradcheck;
using plc::testing::random_tensor;

namespace {

BinaryMap random_label(int h, int w, std::mt19937_64& rng) {
  BinaryMap m(h, w);
  std::bernoulli_distribution b(0.3);
  for (auto& v : m.cells) v = b(rng);
  return m;
}

}  // namespace

TEST(FocalLoss, SaturatedCorrectPrediction) {
  std::mt19937_64 rng(1);
  const BinaryMap label = random_label(6, 5, rng);
  std::vector<double> z(label.cells.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = label.cells[i] ? 20.0 : -20.0;
  EXPECT_LT(focal_loss(Tensor<double>({1, 6, 5}, z), label).item(), 1e-6);
}

TEST(FocalLoss, SingleNegativeAtZeroLogit) {
  BinaryMap label(1, 1);
  const double loss = focal_loss(Tensor<double>::zeros({1, 1, 1}), label).item();
  EXPECT_NEAR(loss, -0.75 * 0.25 * std::log(0.5), 1e-12);
  EXPECT_NEAR(loss, 0.1300, 5e-5);
}

TEST(FocalLoss, SinglePositiveAtZeroLogit) {
  BinaryMap label(1, 1);
  label.cells[0] = 1;
  EXPECT_NEAR(focal_loss(Tensor<double>::zeros({1, 1, 1}), label).item(), -0.25 * 0.25 * std::log(0.5), 1e-12);
}

TEST(FocalLoss, NonNegative) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 10; ++t) {
    const BinaryMap label = random_label(4, 7, rng);
    auto z = random_tensor({1, 4, 7}, rng, -30, 30, false);
    EXPECT_GE(focal_loss(z, label).item(), 0.0);
  }
}

TEST(FocalLoss, RejectsMismatchedLabel) {
  BinaryMap label(3, 3);
  EXPECT_THROW(focal_loss(Tensor<double>::zeros({1, 3, 4}), label), ad::ShapeError);
}

TEST(FocalLoss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  const BinaryMap label = random_label(5, 6, rng);
  auto z = random_tensor({1, 5, 6}, rng, -3, 3);
  EXPECT_LT(gradcheck({z}, [&] { return focal_loss(z, label); }), 1e-4);
}

TEST(OffsetLoss, Examples) {
  auto loss_of = [](double px, double py, Point2 target) {
    std::vector<Tensor<double>> pred{Tensor<double>({2, 1}, {px, py})};
    std::vector<model::OffsetField> tgt{{{target}}};
    return offset_loss<double>(pred, tgt).item();
  };
  EXPECT_EQ(loss_of(1.5, -2, {1.5, -2}), 0.0);
  EXPECT_DOUBLE_EQ(loss_of(0.5, 0, {0, 0}), 0.125);
  EXPECT_DOUBLE_EQ(loss_of(3, 4, {0, 0}), 6.5);
}

TEST(OffsetLoss, MeanOverAllPoints) {
  std::vector<Tensor<double>> pred{Tensor<double>({2, 2}, {0.5, 3, 0, 4}), Tensor<double>({2, 1}, {0, 0})};
  std::vector<model::OffsetField> tgt{{{{0, 0}, {0, 0}}}, {{{0, 0}}}};
  EXPECT_DOUBLE_EQ(offset_loss<double>(pred, tgt).item(), (0.125 + 6.5 + 0) / 3);
}

TEST(OffsetLoss, RejectsMismatch) {
  std::vector<Tensor<double>> pred{Tensor<double>::zeros({2, 3})};
  std::vector<model::OffsetField> tgt{{{{0, 0}, {0, 0}}}};
  EXPECT_THROW(offset_loss<double>(pred, tgt), std::invalid_argument);
}

TEST(OffsetLoss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  auto a = random_tensor({2, 6}, rng, -2, 2);
  auto b = random_tensor({2, 3}, rng, -2, 2);
  std::vector<model::OffsetField> tgt(2);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int k = 0; k < 6; ++k) tgt[0].deltas.push_back({u(rng), u(rng)});
  for (int k = 0; k < 3; ++k) tgt[1].deltas.push_back({u(rng), u(rng)});
  auto loss = [&] {
    std::vector<Tensor<double>> pred{a, b};
    return offset_loss<double>(pred, tgt);
  };
  EXPECT_LT(gradcheck({a, b}, loss), 1e-4);
}

TEST(Resample, TwoPointSegment) {
  const Polyline out = resample_lane({{0, 0}, {3, 6}}, 4);
  ASSERT_EQ(out.size(), 4u);
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(out[k].x, k * 1.0, 1e-12);
    EXPECT_NEAR(out[k].y, k * 2.0, 1e-12);
  }
}

TEST(Resample, StaysOnLine) {
  Polyline in;
  for (double t : {0.0, 0.7, 1.1, 2.5, 4.0, 4.2, 7.5, 9.0}) in.push_back({1 + 2 * t, -3 + 0.5 * t});
  const Polyline out = resample_lane(in, 8);
  ASSERT_EQ(out.size(), 8u);
  for (const auto& p : out) {
    const double t = (p.x - 1) / 2;
    EXPECT_NEAR(p.y, -3 + 0.5 * t, 1e-6);
    EXPECT_GE(t, -1e-9);
    EXPECT_LE(t, 9 + 1e-9);
  }
}

TEST(Resample, CountAndEndpoints) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int n : {2, 3, 4, 9}) {
    Polyline in;
    for (int i = 0; i < n; ++i) in.push_back({u(rng), u(rng)});
    for (int m : {2, 5, 32}) {
      const Polyline out = resample_lane(in, m);
      ASSERT_EQ(out.size(), static_cast<std::size_t>(m));
      EXPECT_EQ(out.front(), in.front());
      EXPECT_EQ(out.back(), in.back());
    }
  }
}

TEST(Resample, CubicReproducesControlPolygonHull) {
  // A clamped cubic stays inside the convex hull of its control points.
  const Polyline in{{0, 0}, {1, 2}, {3, 2}, {4, 0}};
  for (const auto& p : resample_lane(in, 20)) {
    EXPECT_GE(p.y, -1e-12);
    EXPECT_LE(p.y, 2 + 1e-12);
    EXPECT_GE(p.x, -1e-12);
    EXPECT_LE(p.x, 4 + 1e-12);
  }
}

TEST(Resample, Errors) {
  EXPECT_THROW(resample_lane({{1, 1}, {1, 1}, {1, 1}}, 4), std::invalid_argument);
  EXPECT_THROW(resample_lane({{1, 1}}, 4), std::invalid_argument);
  EXPECT_THROW(resample_lane({{0, 0}, {1, 1}}, 1), std::invalid_argument);
}
