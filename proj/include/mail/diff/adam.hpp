#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "mail/diff/params.hpp"

namespace mail::diff {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam over a ParamSet. Frozen parameters are skipped.
template <class T>
class Adam {
 public:
  Adam(ParamSet<T> params, AdamOptions options) : params_(std::move(params)), options_(options) {
    if (!(options_.lr > 0.0) || !(options_.eps > 0.0) || options_.beta1 < 0.0 || options_.beta1 >= 1.0 ||
        options_.beta2 < 0.0 || options_.beta2 >= 1.0) {
      throw ConfigError("adam: invalid hyperparameters");
    }
    for (const auto& e : params_.entries()) {
      first_.emplace_back(e.var.size(), T(0));
      second_.emplace_back(e.var.size(), T(0));
    }
  }

  /// Applies one update. Every trainable parameter must carry a gradient.
  void step() {
    const auto& entries = params_.entries();
    for (const auto& e : entries) {
      if (!e.var.frozen() && !e.var.has_grad()) {
        throw UsageError("adam step: parameter '" + e.name + "' has no gradient");
      }
    }
    ++steps_;
    const double c1 = 1.0 - std::pow(options_.beta1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(options_.beta2, static_cast<double>(steps_));
    const T b1 = static_cast<T>(options_.beta1), b2 = static_cast<T>(options_.beta2);
    const T inv_c1 = static_cast<T>(1.0 / c1), inv_c2 = static_cast<T>(1.0 / c2);
    const T lr = static_cast<T>(options_.lr), eps = static_cast<T>(options_.eps);
    for (std::size_t p = 0; p < entries.size(); ++p) {
      auto var = entries[p].var;
      if (var.frozen()) continue;
      auto theta = var.value().data();
      const auto g = var.grad();
      auto& m = first_[p];
      auto& v = second_[p];
      for (std::size_t i = 0; i < theta.size(); ++i) {
        m[i] = b1 * m[i] + (T(1) - b1) * g[i];
        v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
        const T m_hat = m[i] * inv_c1;
        const T v_hat = v[i] * inv_c2;
        theta[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
      }
    }
  }

  void zero_grad() { params_.zero_grad(); }

  std::uint64_t step_count() const noexcept { return steps_; }
  const AdamOptions& options() const noexcept { return options_; }
  ParamSet<T>& params() noexcept { return params_; }
  const std::vector<std::vector<T>>& first_moments() const noexcept { return first_; }
  const std::vector<std::vector<T>>& second_moments() const noexcept { return second_; }

 private:
  ParamSet<T> params_;
  AdamOptions options_;
  std::vector<std::vector<T>> first_;
  std::vector<std::vector<T>> second_;
  std::uint64_t steps_ = 0;
};

}  // namespace mail::diff
