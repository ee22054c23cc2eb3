#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "mail/demo/dataset.hpp"
#include "mail/train/config.hpp"
#include "mail/train/evaluate.hpp"
#include "mail/train/features.hpp"
#include "mail/train/report.hpp"

namespace mail::train {

/// Phase 1 and phase 2 artifacts consumed by the main loop.
struct Pretrained {
  std::shared_ptr<const models::Encoder> bc_encoder;
  std::shared_ptr<const models::Posterior> posterior;
};

struct Agent {
  std::shared_ptr<FeatureSource> policy_features;
  std::shared_ptr<FeatureSource> disc_features;       // same object when the encoder is shared
  std::shared_ptr<FeatureSource> posterior_features;  // DI only
  std::unique_ptr<models::Actor> actor;
  std::unique_ptr<models::Critic> critic;
  std::unique_ptr<models::Discriminator> disc;
  std::shared_ptr<const models::Posterior> posterior;
  double beta = 0.0;

  bool shared_encoder() const { return policy_features == disc_features; }
};

/// Wires networks for the configured encoder strategy. Throws ConfigError
/// naming the missing phase artifact.
Agent build_agent(const TrainConfig& cfg, const Pretrained& pre, Rng& init);

struct Transition {
  nav::EnvState state;
  std::size_t action = 0;
  std::optional<std::size_t> code;
  std::optional<std::size_t> prev_code;
  float logp = 0.0f;
  std::array<float, models::kNumActions> probs{};
  double value = 0.0;
  double d = 0.5;        // clamped discriminator output
  double reward = 0.0;   // compute_reward(scheme, d)
  double bonus = 0.0;    // lambda_DI * log q(c_t | c_{t-1}, s_t)
  bool done = false;
};

struct RolloutBuffer {
  std::vector<std::vector<Transition>> envs;  // [env][t]
  std::vector<double> bootstrap;              // V(s) after the last step of each env
  std::size_t size() const;
};

struct TrainHooks {
  std::function<void(const RolloutBuffer&)> on_rollout;  // after rewards are filled in
  std::function<void(const CurvePoint&)> on_eval;
};

struct TrainResult {
  TrainReport report;
  Agent agent;
};

/// Alternates rollout collection, one discriminator pass, reward
/// recomputation, GAE and PPO; evaluates every eval_interval iterations and
/// once more at the end with final_eval_episodes.
TrainResult train(const TrainConfig& cfg, const demo::DemoDataset& demos, const Pretrained& pre,
                  const TrainHooks& hooks = {});

/// SHA-1 of the MAILPARM encoding of an encoder.
std::string encoder_hash(const models::Encoder& encoder);

}  // namespace mail::train
