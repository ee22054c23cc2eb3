#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "mail/train/reward.hpp"

namespace mail::train {

/// Global-encoder strategy. `None` gives the policy (actor+critic) and the
/// discriminator separate, randomly initialized, trainable encoders; every
/// other mode uses one encoder shared by all networks.
enum class GlobalEncoder { None, LoadFix, LoadTrain, RandomFixExcluded, RandomTrain };

std::string_view encoder_mode_name(GlobalEncoder g);
GlobalEncoder parse_encoder_mode(std::string_view name);
inline bool loads_bc(GlobalEncoder g) { return g == GlobalEncoder::LoadFix || g == GlobalEncoder::LoadTrain; }
inline bool encoder_frozen(GlobalEncoder g) {
  return g == GlobalEncoder::LoadFix || g == GlobalEncoder::RandomFixExcluded;
}

struct TrainConfig {
  GlobalEncoder global_encoder = GlobalEncoder::None;
  bool vdb = false;
  bool di = false;
  RewardScheme reward = RewardScheme::LogShift;

  // PPO
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double ppo_clip = 0.2;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
  std::size_t ppo_epochs = 4;
  std::size_t minibatch = 256;
  std::size_t rollout_len = 2048;
  std::size_t num_envs = 8;
  std::size_t total_steps = 200'000;
  double policy_lr = 3e-4;

  // discriminator
  double disc_lr = 1e-3;
  std::size_t disc_epochs = 1;
  std::size_t disc_minibatch = 256;
  double ic = 0.5;
  double beta_lr = 1e-5;
  double beta_init = 0.0;

  // DI
  double di_bonus_weight = 0.01;

  // pre-training
  double bc_lr = 1e-3;
  std::size_t bc_epochs = 10;
  std::size_t bc_minibatch = 128;
  double bc_holdout = 0.1;
  double posterior_lr = 1e-3;
  std::size_t posterior_epochs = 5;
  std::size_t posterior_batch_episodes = 32;
  double kl_weight = 0.1;
  double temperature = 1.0;

  // evaluation
  std::size_t eval_interval = 1;  // iterations
  std::size_t eval_episodes = 20;
  std::size_t final_eval_episodes = 200;
  std::size_t rolling_window = 10;
  double threshold = -10.0;
  bool eval_greedy = true;  // most probable action (and code); false samples from the policy

  std::uint64_t seed = 0;

  /// Throws ConfigError naming the first bad field.
  void validate() const;
  std::size_t iterations() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

}  // namespace mail::train
