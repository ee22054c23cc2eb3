#include "mail/harness/experiment.hpp"

#include <nlohmann/json.hpp>

#include "mail/core/binary_io.hpp"
#include "mail/core/error.hpp"

namespace mail::harness {

using nlohmann::json;
using train::GlobalEncoder;
using train::RewardScheme;
using train::TrainConfig;

namespace {

// One table drives both directions so that a new field cannot be forgotten
// on one side.
template <class Visit>
void fields(TrainConfig& c, Visit&& v) {
  v("gamma", c.gamma);
  v("gae_lambda", c.gae_lambda);
  v("ppo_clip", c.ppo_clip);
  v("entropy_coef", c.entropy_coef);
  v("value_coef", c.value_coef);
  v("max_grad_norm", c.max_grad_norm);
  v("ppo_epochs", c.ppo_epochs);
  v("minibatch", c.minibatch);
  v("rollout_len", c.rollout_len);
  v("num_envs", c.num_envs);
  v("total_steps", c.total_steps);
  v("policy_lr", c.policy_lr);
  v("disc_lr", c.disc_lr);
  v("disc_epochs", c.disc_epochs);
  v("disc_minibatch", c.disc_minibatch);
  v("ic", c.ic);
  v("beta_lr", c.beta_lr);
  v("beta_init", c.beta_init);
  v("di_bonus_weight", c.di_bonus_weight);
  v("bc_lr", c.bc_lr);
  v("bc_epochs", c.bc_epochs);
  v("bc_minibatch", c.bc_minibatch);
  v("bc_holdout", c.bc_holdout);
  v("posterior_lr", c.posterior_lr);
  v("posterior_epochs", c.posterior_epochs);
  v("posterior_batch_episodes", c.posterior_batch_episodes);
  v("kl_weight", c.kl_weight);
  v("temperature", c.temperature);
  v("eval_interval", c.eval_interval);
  v("eval_episodes", c.eval_episodes);
  v("final_eval_episodes", c.final_eval_episodes);
  v("rolling_window", c.rolling_window);
  v("threshold", c.threshold);
  v("seed", c.seed);
  v("vdb", c.vdb);
  v("di", c.di);
  v("eval_greedy", c.eval_greedy);
}

json train_to_json(TrainConfig c) {
  json j;
  j["global_encoder"] = std::string(train::encoder_mode_name(c.global_encoder));
  j["reward"] = std::string(train::scheme_name(c.reward));
  fields(c, [&](const char* key, auto& value) { j[key] = value; });
  return j;
}

template <class T>
void read_value(const json& j, const std::string& where, T& out) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!j.is_boolean()) throw ConfigError(where + ": expected a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
        throw ConfigError(where + ": expected a non-negative integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!j.is_number()) throw ConfigError(where + ": expected a number");
    } else {
      if (!j.is_string()) throw ConfigError(where + ": expected a string");
    }
    out = j.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

TrainConfig train_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("train: expected an object");
  TrainConfig c;
  std::vector<std::string> known{"global_encoder", "reward"};
  fields(c, [&](const char* key, auto&) { known.emplace_back(key); });
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("unknown key 'train." + key + "' in experiment config");
  }
  if (j.contains("global_encoder")) {
    std::string s;
    read_value(j["global_encoder"], "train.global_encoder", s);
    c.global_encoder = train::parse_encoder_mode(s);
  }
  if (j.contains("reward")) {
    std::string s;
    read_value(j["reward"], "train.reward", s);
    c.reward = train::parse_scheme(s);
  }
  fields(c, [&](const char* key, auto& value) {
    if (j.contains(key)) read_value(j[key], std::string("train.") + key, value);
  });
  return c;
}

TrainConfig make(GlobalEncoder g, RewardScheme r, bool vdb = false, bool di = false) {
  TrainConfig c;
  c.global_encoder = g;
  c.reward = r;
  c.vdb = vdb;
  c.di = di;
  return c;
}

}  // namespace

std::string to_json(const ExperimentConfig& cfg) {
  json j;
  j["schema"] = kSchema;
  j["preset"] = cfg.preset;
  j["train"] = train_to_json(cfg.train);
  j["demos"] = cfg.demos;
  j["bc_dir"] = cfg.bc_dir;
  j["posterior_dir"] = cfg.posterior_dir;
  j["out_dir"] = cfg.out_dir;
  j["demo_pairs"] = cfg.demo_pairs;
  j["demo_seed"] = cfg.demo_seed;
  return j.dump(2) + "\n";
}

ExperimentConfig from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  if (!j.contains("schema")) throw ConfigError("experiment config lacks \"schema\"");
  int schema = 0;
  read_value(j["schema"], "schema", schema);
  if (schema != kSchema) throw ConfigError("unsupported config schema " + std::to_string(schema));
  static const std::vector<std::string> known{"schema",        "preset",  "train",      "demos",    "bc_dir",
                                              "posterior_dir", "out_dir", "demo_pairs", "demo_seed"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("unknown key '" + key + "' in experiment config");
  }
  ExperimentConfig cfg;
  if (j.contains("preset")) read_value(j["preset"], "preset", cfg.preset);
  if (j.contains("train")) cfg.train = train_from_json(j["train"]);
  if (j.contains("demos")) read_value(j["demos"], "demos", cfg.demos);
  if (j.contains("bc_dir")) read_value(j["bc_dir"], "bc_dir", cfg.bc_dir);
  if (j.contains("posterior_dir")) read_value(j["posterior_dir"], "posterior_dir", cfg.posterior_dir);
  if (j.contains("out_dir")) read_value(j["out_dir"], "out_dir", cfg.out_dir);
  if (j.contains("demo_pairs")) read_value(j["demo_pairs"], "demo_pairs", cfg.demo_pairs);
  if (j.contains("demo_seed")) read_value(j["demo_seed"], "demo_seed", cfg.demo_seed);
  cfg.train.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) { return from_json(read_file(path)); }

const std::vector<Preset>& presets() {
  using G = GlobalEncoder;
  using R = RewardScheme;
  static const std::vector<Preset> all = [] {
    std::vector<Preset> p{
        {"GAIL", "main", "no global encoder, log reward", make(G::None, R::Log)},
        {"VAIL", "main", "GAIL with a variational discriminator bottleneck", make(G::None, R::Log, true)},
        {"GAIL_LS", "main", "no global encoder, shifted-log reward", make(G::None, R::LogShift)},
        {"VAIL_LS", "main", "VAIL with shifted-log reward", make(G::None, R::LogShift, true)},
        {"GAIL_GE", "main", "frozen BC encoder, log reward", make(G::LoadFix, R::Log)},
        {"MAIL", "main", "frozen BC encoder, shifted-log reward", make(G::LoadFix, R::LogShift)},
        {"MAIL+VDB", "main", "MAIL with a variational discriminator bottleneck", make(G::LoadFix, R::LogShift, true)},
        {"DI-GAIL_GE", "main", "latent codes, frozen BC encoder, log reward", make(G::LoadFix, R::Log, false, true)},
        {"DI-MAIL", "main", "latent codes, frozen BC encoder, shifted-log reward",
         make(G::LoadFix, R::LogShift, false, true)},
        {"DI-MAIL+VDB", "main", "DI-MAIL with a variational discriminator bottleneck",
         make(G::LoadFix, R::LogShift, true, true)},
    };
    for (auto r : train::kRewardSchemes) {
      p.push_back({"MAIL/" + std::string(train::scheme_name(r)), "reward", "MAIL encoder with this reward scheme",
                   make(G::LoadFix, r)});
    }
    for (auto g : {G::LoadFix, G::LoadTrain, G::RandomTrain}) {
      p.push_back({"MAIL/" + std::string(train::encoder_mode_name(g)), "encoder",
                   "shifted-log reward with this encoder strategy", make(g, R::LogShift)});
    }
    return p;
  }();
  return all;
}

const Preset& find_preset(std::string_view name) {
  for (const auto& p : presets())
    if (p.name == name) return p;
  std::string msg = "unknown preset '" + std::string(name) + "'; valid presets:";
  for (const auto& p : presets()) msg += " " + p.name;
  throw UsageError(msg);
}

std::vector<std::string> main_names() {
  std::vector<std::string> out;
  for (const auto& p : presets())
    if (p.group == "main") out.push_back(p.name);
  return out;
}

}  // namespace mail::harness
