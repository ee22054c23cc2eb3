#pragma once

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "mail/core/rng.hpp"
#include "mail/diff/adam.hpp"
#include "mail/train/config.hpp"
#include "mail/train/features.hpp"

namespace mail::train {

struct PairBatch {
  std::vector<nav::EnvState> states;
  std::vector<std::size_t> actions;
  std::size_t size() const noexcept { return states.size(); }
};

struct DiscStats {
  double loss = 0.0;      // -mean log D(policy) - mean log(1 - D(expert))
  double accuracy = 0.0;  // policy classified D > 0.5, expert D < 0.5
  double kl = 0.0;        // VDB only
  double beta = 0.0;
};

/// Owns the discriminator optimizer and, with VDB, the Lagrange multiplier.
/// Labels follow the printed objective: policy pairs -> 1, expert pairs -> 0.
class DiscriminatorLearner {
 public:
  DiscriminatorLearner(models::Discriminator& disc, FeatureSource& features, const TrainConfig& cfg, std::uint64_t seed);

  /// One gradient step; then beta <- max(0, beta + beta_lr * (KL - Ic)).
  DiscStats update(const PairBatch& policy, const PairBatch& expert);
  /// Clamped D for inference (VDB uses the mean code, no sampling).
  std::vector<double> predict(const PairBatch& batch);

  double beta() const noexcept { return beta_; }
  void set_beta(double b) { beta_ = b; }

 private:
  models::Discriminator& disc_;
  FeatureSource& features_;
  const TrainConfig& cfg_;
  diff::Adam<float> opt_;
  Rng noise_;
  double beta_;
};

struct PpoSample {
  nav::EnvState state;
  std::size_t action = 0;
  std::optional<std::size_t> code;
  float logp_old = 0.0f;
  std::array<float, models::kNumActions> probs_old{};
  double advantage = 0.0;  // already normalized
  double ret = 0.0;
};

struct PpoStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;  // mean KL(old || new) over the batch after the update
  double clip_fraction = 0.0;
};

class PpoLearner {
 public:
  /// Optimizes actor + critic and, when trainable, the policy encoder.
  PpoLearner(models::Actor& actor, models::Critic& critic, FeatureSource& features, const TrainConfig& cfg);

  PpoStats update(const std::vector<PpoSample>& batch, Rng& rng);
  /// Critic values for inference.
  std::vector<double> values(const Tensor& features) const;

 private:
  models::Actor& actor_;
  models::Critic& critic_;
  FeatureSource& features_;
  const TrainConfig& cfg_;
  models::Params params_;
  diff::Adam<float> opt_;
};

}  // namespace mail::train
