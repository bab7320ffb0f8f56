#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "plc/autodiff/adam.hpp"
#include "plc/autodiff/ops.hpp"

using namespace plc::ad;

TEST(Adam, ZeroGradientLeavesParameters) {
  auto w = Tensor<double>({3}, {0.5, -1, 2}, true);
  w.zero_grad();
  std::vector<NamedParam<double>> params{{"w", w}};
  Adam<double> adam;
  adam.step(params, 0.001);
  EXPECT_EQ(w.at({0}), 0.5);
  EXPECT_EQ(w.at({1}), -1.0);
  EXPECT_EQ(w.at({2}), 2.0);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  auto w = Tensor<double>::zeros({1}, true);
  sum(w).backward();  // g = 1
  std::vector<NamedParam<double>> params{{"w", w}};
  Adam<double> adam;
  adam.step(params, 0.001);
  // m_hat = 1, v_hat = 1 -> update lr * 1 / (1 + eps)
  EXPECT_NEAR(w.item(), -0.001 / (1 + 1e-8), 1e-15);
  EXPECT_EQ(adam.step_count(), 1);
  EXPECT_NEAR(adam.first_moment()[0][0], 0.1, 1e-15);
  EXPECT_NEAR(adam.second_moment()[0][0], 0.001, 1e-15);
}

TEST(Adam, DescendsQuadratic) {
  auto w = Tensor<double>::full({1}, 1.0, true);
  std::vector<NamedParam<double>> params{{"w", w}};
  Adam<double> adam;
  std::vector<double> trace;
  for (int i = 0; i < 100; ++i) {
    w.zero_grad();
    sum(mul(w, w)).backward();
    adam.step(params, 0.01);
    trace.push_back(std::abs(w.item()));
  }
  for (std::size_t i = 10; i < trace.size(); ++i) EXPECT_LT(trace[i], trace[i - 1]) << "step " << i;
  EXPECT_LT(trace.back(), 0.5);
}

TEST(Adam, NonFiniteGradientNamesParameter) {
  auto w = Tensor<double>::zeros({2}, true);
  w.node()->ensure_grad()[1] = std::numeric_limits<double>::quiet_NaN();
  std::vector<NamedParam<double>> params{{"mlp.0.weight", w}};
  Adam<double> adam;
  try {
    adam.step(params, 0.001);
    FAIL() << "expected an exception";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("mlp.0.weight"), std::string::npos);
  }
}
