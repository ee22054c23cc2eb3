#include <gtest/gtest.h>

#include "support/gradcheck.hpp"
#include "support/layer_checks.hpp"

namespace d = mail::diff;
using V = d::Var<double>;
using T = d::Tensor<double>;

TEST(Gradients, EveryLayerMatchesFiniteDifferences) {
  for (const auto& check : mail::testing::run_layer_checks()) {
    EXPECT_LT(check.max_rel_error, 1e-4) << check.name;
  }
}

TEST(Gradients, SquareAtThree) {
  V x = V::parameter(T::scalar(3.0));
  d::backward(d::square(x));
  EXPECT_DOUBLE_EQ(x.grad()[0], 6.0);
}

TEST(Gradients, SigmoidCrossEntropyAtZeroLogit) {
  V logit = V::parameter(T({1}, {0.0}));
  d::backward(d::bce_with_logits(logit, {1.0}));
  EXPECT_DOUBLE_EQ(logit.grad()[0], -0.5);
}

TEST(Gradients, NonScalarLossIsUsageError) {
  V x = V::parameter(T({2}, {1.0, 2.0}));
  EXPECT_THROW(d::backward(d::relu(x)), mail::UsageError);
}

TEST(Gradients, TwoLayerNetMatchesFiniteDifferences) {
  mail::Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    V x = V::constant(mail::testing::random_tensor(rng, {3, 5}));
    V w1 = V::parameter(mail::testing::random_tensor(rng, {5, 7}));
    V b1 = V::parameter(mail::testing::random_tensor(rng, {7}));
    V w2 = V::parameter(mail::testing::random_tensor(rng, {7, 4}));
    V b2 = V::parameter(mail::testing::random_tensor(rng, {4}));
    std::vector<std::size_t> labels{0, 3, 1};
    auto loss = [&] { return d::cross_entropy(d::dense(d::tanh(d::dense(x, w1, b1)), w2, b2), labels); };
    auto r = mail::testing::grad_check(loss, {w1, b1, w2, b2});
    EXPECT_LT(r.max_rel_error, 1e-4);
  }
}

TEST(Gradients, RepeatedBackwardAfterClearingIsIdentical) {
  mail::Rng rng(5);
  V x = V::constant(mail::testing::random_tensor(rng, {2, 3, 6, 6}));
  V k = V::parameter(mail::testing::random_tensor(rng, {4, 3, 3, 3}));
  V b = V::parameter(mail::testing::random_tensor(rng, {4}));
  auto loss = d::mean(d::relu(d::conv2d(x, k, b, 2)));
  d::backward(loss);
  std::vector<double> first(k.grad().begin(), k.grad().end());
  k.clear_grad();
  b.clear_grad();
  d::backward(loss);
  std::vector<double> second(k.grad().begin(), k.grad().end());
  EXPECT_EQ(first, second);
}

TEST(Gradients, LeafGradientsAccumulateAcrossLosses) {
  V x = V::parameter(T::scalar(2.0));
  d::backward(d::square(x));
  d::backward(d::scale(x, 3.0));
  EXPECT_DOUBLE_EQ(x.grad()[0], 7.0);
}

TEST(Gradients, StraightThroughPassesGradientToSoftInput) {
  V soft = V::parameter(T({1, 3}, {0.2, 0.5, 0.3}));
  T hard({1, 3}, {0.0, 1.0, 0.0});
  auto st = d::straight_through(hard, soft);
  EXPECT_EQ(st.value().values(), hard.values());
  d::backward(d::sum(d::mul(st, V::constant(T({1, 3}, {1.0, 2.0, 3.0})))));
  EXPECT_DOUBLE_EQ(soft.grad()[0], 1.0);
  EXPECT_DOUBLE_EQ(soft.grad()[2], 3.0);
}

TEST(Gradients, MinimumRoutesToSmallerInput) {
  V a = V::parameter(T({2}, {1.0, 5.0}));
  V b = V::parameter(T({2}, {2.0, 3.0}));
  d::backward(d::sum(d::minimum(a, b)));
  EXPECT_DOUBLE_EQ(a.grad()[0], 1.0);
  EXPECT_DOUBLE_EQ(a.grad()[1], 0.0);
  EXPECT_DOUBLE_EQ(b.grad()[0], 0.0);
  EXPECT_DOUBLE_EQ(b.grad()[1], 1.0);
}

TEST(Gradients, FiniteAfterForwardAndBackward) {
  mail::Rng rng(3);
  V x = V::parameter(mail::testing::random_tensor(rng, {4, 6}, -50.0, 50.0));
  auto loss = d::add(d::mean(d::log_softmax(x)), d::mean(d::sigmoid(x)));
  d::backward(loss);
  EXPECT_TRUE(x.value().all_finite());
  EXPECT_TRUE(std::isfinite(loss.item()));
}
