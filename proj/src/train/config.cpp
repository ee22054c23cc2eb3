#include "mail/train/config.hpp"

#include <string>

#include "mail/core/error.hpp"

namespace mail::train {

std::string_view encoder_mode_name(GlobalEncoder g) {
  switch (g) {
    case GlobalEncoder::None:
      return "none";
    case GlobalEncoder::LoadFix:
      return "load_fix";
    case GlobalEncoder::LoadTrain:
      return "load_train";
    case GlobalEncoder::RandomFixExcluded:
      return "random_fix_excluded";
    case GlobalEncoder::RandomTrain:
      return "random_train";
  }
  return "?";
}

GlobalEncoder parse_encoder_mode(std::string_view name) {
  for (auto g : {GlobalEncoder::None, GlobalEncoder::LoadFix, GlobalEncoder::LoadTrain,
                 GlobalEncoder::RandomFixExcluded, GlobalEncoder::RandomTrain})
    if (encoder_mode_name(g) == name) return g;
  throw ConfigError("unknown global_encoder '" + std::string(name) + "'");
}

namespace {
void positive(double v, const char* name) {
  if (!(v > 0.0)) throw ConfigError(std::string(name) + " must be positive");
}
void unit(double v, const char* name) {
  if (!(v > 0.0 && v <= 1.0)) throw ConfigError(std::string(name) + " must lie in (0, 1]");
}
}  // namespace

void TrainConfig::validate() const {
  unit(gamma, "gamma");
  unit(gae_lambda, "gae_lambda");
  positive(ppo_clip, "ppo_clip");
  if (entropy_coef < 0.0) throw ConfigError("entropy_coef must be non-negative");
  positive(value_coef, "value_coef");
  positive(max_grad_norm, "max_grad_norm");
  positive(policy_lr, "policy_lr");
  positive(disc_lr, "disc_lr");
  positive(bc_lr, "bc_lr");
  positive(posterior_lr, "posterior_lr");
  positive(beta_lr, "beta_lr");
  positive(ic, "ic");
  positive(temperature, "temperature");
  if (beta_init < 0.0) throw ConfigError("beta_init must be non-negative");
  if (kl_weight < 0.0) throw ConfigError("kl_weight must be non-negative");
  if (di_bonus_weight < 0.0) throw ConfigError("di_bonus_weight must be non-negative");
  if (!(bc_holdout > 0.0 && bc_holdout < 1.0)) throw ConfigError("bc_holdout must lie in (0, 1)");
  for (auto [v, name] : {std::pair{ppo_epochs, "ppo_epochs"}, {minibatch, "minibatch"}, {rollout_len, "rollout_len"},
                         {num_envs, "num_envs"}, {total_steps, "total_steps"}, {disc_epochs, "disc_epochs"},
                         {disc_minibatch, "disc_minibatch"}, {bc_epochs, "bc_epochs"}, {bc_minibatch, "bc_minibatch"},
                         {posterior_epochs, "posterior_epochs"},
                         {posterior_batch_episodes, "posterior_batch_episodes"}, {eval_interval, "eval_interval"},
                         {eval_episodes, "eval_episodes"}, {final_eval_episodes, "final_eval_episodes"},
                         {rolling_window, "rolling_window"}}) {
    if (v == 0) throw ConfigError(std::string(name) + " must be positive");
  }
  if (rollout_len % num_envs != 0) throw ConfigError("rollout_len must be a multiple of num_envs");
}

std::size_t TrainConfig::iterations() const { return std::max<std::size_t>(1, total_steps / rollout_len); }

}  // namespace mail::train
