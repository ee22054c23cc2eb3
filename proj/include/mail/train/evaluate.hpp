#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "mail/core/rng.hpp"
#include "mail/nav/env.hpp"
#include "mail/train/features.hpp"

namespace mail::train {

struct EvalReport {
  double mean = 0.0;
  double std = 0.0;  // population std over episodes
  double success_rate = 0.0;
  std::vector<double> returns;
  std::vector<int> lengths;
};

/// Action selection for a batch of live episodes run in lockstep.
class Policy {
 public:
  virtual ~Policy() = default;
  /// Called once before `n` episodes start.
  virtual void start(std::size_t n) { (void)n; }
  /// `ids` are episode indices, `states` their current states.
  virtual std::vector<nav::Action> act(const std::vector<std::size_t>& ids, const std::vector<nav::EnvState>& states,
                                       Rng& rng) = 0;
  /// Latent code chosen at the last act() for episode `id`, if any.
  virtual std::optional<std::size_t> code(std::size_t id) const {
    (void)id;
    return std::nullopt;
  }
};

class ExpertPolicy final : public Policy {
 public:
  std::vector<nav::Action> act(const std::vector<std::size_t>& ids, const std::vector<nav::EnvState>& states,
                               Rng& rng) override;
};

class RandomPolicy final : public Policy {
 public:
  std::vector<nav::Action> act(const std::vector<std::size_t>& ids, const std::vector<nav::EnvState>& states,
                               Rng& rng) override;
};

/// Samples from the actor. With a posterior, each step first samples a code
/// c_t ~ q(. | s_t, c_{t-1}) and conditions the actor on it.
class NetworkPolicy final : public Policy {
 public:
  /// `posterior_features` defaults to `features`. Greedy mode takes the
  /// most probable code and action (first index on ties) instead of sampling.
  NetworkPolicy(const models::Actor& actor, FeatureSource& features, const models::Posterior* posterior = nullptr,
                FeatureSource* posterior_features = nullptr, bool greedy = false);
  void start(std::size_t n) override;
  std::vector<nav::Action> act(const std::vector<std::size_t>& ids, const std::vector<nav::EnvState>& states,
                               Rng& rng) override;
  std::optional<std::size_t> code(std::size_t id) const override { return codes_.at(id); }

 private:
  const models::Actor& actor_;
  FeatureSource& features_;
  const models::Posterior* posterior_;
  FeatureSource* posterior_features_;
  bool greedy_;
  std::vector<std::optional<std::size_t>> codes_;
};

using StepObserver =
    std::function<void(std::size_t episode, int t, const nav::EnvState& state, nav::Action a, std::optional<std::size_t> code)>;

/// Episode e starts from nav::reset(derive_seed(seed, e)); action sampling
/// draws from its own stream of the same seed.
EvalReport evaluate(Policy& policy, std::size_t n_episodes, std::uint64_t seed, const StepObserver& observer = {});

EvalReport evaluate(const models::Actor& actor, FeatureSource& features, std::size_t n_episodes, std::uint64_t seed,
                    const models::Posterior* posterior = nullptr, FeatureSource* posterior_features = nullptr,
                    bool greedy = false);

}  // namespace mail::train
