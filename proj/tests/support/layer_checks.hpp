#pragma once

// Finite-difference checks for every differentiable layer, 20 random
// instances each, 64-bit. Shared by the unit and acceptance suites.

#include <string>
#include <vector>

#include "support/gradcheck.hpp"

namespace mail::testing {

struct LayerCheck {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t instances = 0;
};

inline std::vector<LayerCheck> run_layer_checks(std::size_t instances = 20, std::uint64_t seed = 2024) {
  namespace d = mail::diff;
  using V = Var<double>;
  Rng rng(seed);
  std::vector<LayerCheck> out;

  auto run = [&](const std::string& name, auto make_case) {
    LayerCheck c{name, 0.0, instances};
    for (std::size_t i = 0; i < instances; ++i) {
      auto [loss, inputs] = make_case();
      c.max_rel_error = std::max(c.max_rel_error, grad_check(loss, inputs).max_rel_error);
    }
    out.push_back(c);
  };
  auto dim = [&](std::size_t lo, std::size_t hi) { return lo + rng.uniform_int(hi - lo + 1); };
  using Case = std::pair<std::function<V()>, std::vector<V>>;

  run("dense", [&]() -> Case {
    const auto n = dim(1, 4), in = dim(1, 6), o = dim(1, 5);
    V x = V::parameter(random_tensor(rng, {n, in}));
    V w = V::parameter(random_tensor(rng, {in, o}));
    V b = V::parameter(random_tensor(rng, {o}));
    auto dir = random_tensor(rng, {n, o});
    return {[=] { return project(d::dense(x, w, b), dir); }, {x, w, b}};
  });
  for (std::size_t stride : {1u, 2u}) {
    run("conv2d_stride" + std::to_string(stride), [&, stride]() -> Case {
      const auto n = dim(1, 2), c = dim(1, 3), h = dim(3, 6), wd = dim(3, 6), k = dim(1, 3);
      V x = V::parameter(random_tensor(rng, {n, c, h, wd}));
      V kern = V::parameter(random_tensor(rng, {k, c, 3, 3}));
      V b = V::parameter(random_tensor(rng, {k}));
      auto probe = d::conv2d(V::constant(x.value()), V::constant(kern.value()), V(), stride);
      auto dir = random_tensor(rng, probe.shape());
      return {[=] { return project(d::conv2d(x, kern, b, stride), dir); }, {x, kern, b}};
    });
  }
  auto elementwise = [&](const std::string& name, auto op, bool avoid_zero) {
    run(name, [&, op, avoid_zero]() -> Case {
      const auto n = dim(1, 4), m = dim(1, 6);
      V x = V::parameter(avoid_zero ? random_nonzero(rng, {n, m}) : random_tensor(rng, {n, m}, -3.0, 3.0));
      auto dir = random_tensor(rng, {n, m});
      return {[=] { return project(op(x), dir); }, {x}};
    });
  };
  elementwise("relu", [](const V& x) { return d::relu(x); }, true);
  elementwise("tanh", [](const V& x) { return d::tanh(x); }, false);
  elementwise("sigmoid", [](const V& x) { return d::sigmoid(x); }, false);
  elementwise("softmax", [](const V& x) { return d::softmax(x); }, false);
  elementwise("log_softmax", [](const V& x) { return d::log_softmax(x); }, false);
  run("cross_entropy", [&]() -> Case {
    const auto n = dim(1, 5), k = dim(2, 6);
    V logits = V::parameter(random_tensor(rng, {n, k}, -3.0, 3.0));
    std::vector<std::size_t> labels(n);
    for (auto& l : labels) l = rng.uniform_int(k);
    return {[=] { return d::cross_entropy(logits, labels); }, {logits}};
  });
  run("bce_with_logits", [&]() -> Case {
    const auto n = dim(1, 6);
    V logits = V::parameter(random_tensor(rng, {n}, -4.0, 4.0));
    std::vector<double> targets(n);
    for (auto& t : targets) t = static_cast<double>(rng.uniform_int(2));
    return {[=] { return d::bce_with_logits(logits, targets); }, {logits}};
  });
  run("gaussian_kl", [&]() -> Case {
    const auto n = dim(1, 4), k = dim(1, 6);
    V mu = V::parameter(random_tensor(rng, {n, k}, -2.0, 2.0));
    V log_sigma = V::parameter(random_tensor(rng, {n, k}, -1.5, 1.0));
    auto dir = random_tensor(rng, {n});
    return {[=] { return project(d::gaussian_kl(mu, log_sigma), dir); }, {mu, log_sigma}};
  });
  run("categorical_kl_uniform", [&]() -> Case {
    const auto n = dim(1, 4), k = dim(2, 6);
    V logits = V::parameter(random_tensor(rng, {n, k}, -3.0, 3.0));
    auto dir = random_tensor(rng, {n});
    return {[=] { return project(d::categorical_kl_uniform(logits), dir); }, {logits}};
  });
  return out;
}

}  // namespace mail::testing
