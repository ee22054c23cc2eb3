#include "mail/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "mail/core/error.hpp"
#include "mail/core/hash.hpp"
#include "mail/diff/checkpoint.hpp"
#include "mail/train/gae.hpp"
#include "mail/train/learners.hpp"

namespace mail::train {

namespace {

// Independent RNG streams derived from the run seed.
enum Stream : std::uint64_t {
  kInit = 20,
  kEnvResets,
  kPolicySampling,
  kDiscSampling,
  kDiscNoise,
  kPpoShuffle,
  kPeriodicEval,
  kFinalEval,
};

std::shared_ptr<models::Encoder> copy_encoder(const models::Encoder& src, Rng& init, const std::string& prefix) {
  auto out = std::make_shared<models::Encoder>(init, prefix);
  const auto& from = src.params().entries();
  const auto& to = out->params().entries();
  for (std::size_t i = 0; i < from.size(); ++i) {
    Var dst = to[i].var;
    const auto values = from[i].var.data();
    std::copy(values.begin(), values.end(), dst.value().data().begin());
  }
  return out;
}

}  // namespace

std::size_t RolloutBuffer::size() const {
  std::size_t n = 0;
  for (const auto& e : envs) n += e.size();
  return n;
}

std::string encoder_hash(const models::Encoder& encoder) {
  return sha1_hex(diff::encode_checkpoint(encoder.params()));
}

Agent build_agent(const TrainConfig& cfg, const Pretrained& pre, Rng& init) {
  cfg.validate();
  const bool need_bc = loads_bc(cfg.global_encoder) || cfg.di;
  if (need_bc && !pre.bc_encoder) {
    throw ConfigError("missing BC encoder checkpoint: run phase 1 (train-bc) first");
  }
  if (cfg.di && !pre.posterior) {
    throw ConfigError("missing posterior checkpoint: run phase 2 (train-posterior) first");
  }
  Agent a;
  switch (cfg.global_encoder) {
    case GlobalEncoder::None:
      a.policy_features = std::make_shared<FeatureSource>(std::make_shared<models::Encoder>(init, "policy_encoder"));
      a.disc_features = std::make_shared<FeatureSource>(std::make_shared<models::Encoder>(init, "disc_encoder"));
      break;
    case GlobalEncoder::LoadFix:
    case GlobalEncoder::LoadTrain: {
      auto enc = copy_encoder(*pre.bc_encoder, init, "encoder");
      enc->set_frozen(cfg.global_encoder == GlobalEncoder::LoadFix);
      a.policy_features = a.disc_features = std::make_shared<FeatureSource>(enc);
      break;
    }
    case GlobalEncoder::RandomFixExcluded:
    case GlobalEncoder::RandomTrain: {
      auto enc = std::make_shared<models::Encoder>(init, "encoder");
      enc->set_frozen(cfg.global_encoder == GlobalEncoder::RandomFixExcluded);
      a.policy_features = a.disc_features = std::make_shared<FeatureSource>(enc);
      break;
    }
  }
  a.actor = std::make_unique<models::Actor>(cfg.di ? models::kNumCodes : 0, init);
  a.critic = std::make_unique<models::Critic>(init);
  a.disc = std::make_unique<models::Discriminator>(cfg.vdb, init);
  a.beta = cfg.beta_init;
  if (cfg.di) {
    a.posterior = pre.posterior;
    if (cfg.global_encoder == GlobalEncoder::LoadFix) {
      a.posterior_features = a.policy_features;
    } else {
      auto enc = copy_encoder(*pre.bc_encoder, init, "posterior_encoder");
      enc->set_frozen(true);
      a.posterior_features = std::make_shared<FeatureSource>(enc);
    }
  }
  return a;
}

TrainResult train(const TrainConfig& cfg, const demo::DemoDataset& demos, const Pretrained& pre,
                  const TrainHooks& hooks) {
  cfg.validate();
  if (demos.count() == 0) throw ConfigError("train: demonstration dataset is empty");
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t seed = cfg.seed;
  Rng init(derive_seed(seed, kInit));
  TrainResult result{TrainReport{}, build_agent(cfg, pre, init)};
  Agent& ag = result.agent;
  TrainReport& report = result.report;
  report.encoder_hash_start = encoder_hash(ag.policy_features->encoder());

  DiscriminatorLearner disc(*ag.disc, *ag.disc_features, cfg, derive_seed(seed, kDiscNoise));
  PpoLearner ppo(*ag.actor, *ag.critic, *ag.policy_features, cfg);
  Rng policy_rng(derive_seed(seed, kPolicySampling));
  Rng disc_rng(derive_seed(seed, kDiscSampling));
  Rng ppo_rng(derive_seed(seed, kPpoShuffle));
  const std::uint64_t reset_base = derive_seed(seed, kEnvResets);
  std::uint64_t episodes_started = 0;

  const std::size_t n_envs = cfg.num_envs;
  const std::size_t horizon = cfg.rollout_len / n_envs;
  std::vector<nav::EnvState> env(n_envs);
  std::vector<std::optional<std::size_t>> prev_code(n_envs);
  for (auto& s : env) s = nav::reset(derive_seed(reset_base, episodes_started++));

  std::size_t steps = 0;
  for (std::size_t it = 0; it < cfg.iterations(); ++it) {
    // ---- rollout
    RolloutBuffer buf;
    buf.envs.assign(n_envs, {});
    for (std::size_t t = 0; t < horizon; ++t) {
      const Tensor f = ag.policy_features->infer(env);
      std::vector<std::size_t> codes;
      std::vector<double> logq(n_envs, 0.0);
      std::vector<std::array<float, models::kNumActions>> probs;
      if (cfg.di) {
        const Tensor pf = ag.posterior_features == ag.policy_features ? f : ag.posterior_features->infer(env);
        const auto q = code_probs(*ag.posterior, pf, prev_code);
        for (std::size_t e = 0; e < n_envs; ++e) {
          codes.push_back(policy_rng.categorical(q[e]));
          logq[e] = std::log(std::max<double>(q[e][codes.back()], 1e-30));
        }
        probs = action_probs(*ag.actor, f, &codes);
      } else {
        probs = action_probs(*ag.actor, f);
      }
      const auto values = ppo.values(f);
      for (std::size_t e = 0; e < n_envs; ++e) {
        Transition tr;
        tr.state = env[e];
        tr.action = policy_rng.categorical(probs[e]);
        tr.probs = probs[e];
        tr.logp = std::log(std::max(probs[e][tr.action], 1e-30f));
        tr.value = values[e];
        tr.prev_code = prev_code[e];
        if (cfg.di) {
          tr.code = codes[e];
          tr.bonus = cfg.di_bonus_weight * logq[e];
        }
        const auto r = nav::step(env[e], nav::kActions[tr.action]);
        tr.done = r.done;
        buf.envs[e].push_back(tr);
        if (r.done) {
          env[e] = nav::reset(derive_seed(reset_base, episodes_started++));
          prev_code[e].reset();
        } else {
          env[e] = r.state;
          prev_code[e] = tr.code;
        }
      }
    }
    steps += horizon * n_envs;
    buf.bootstrap = ppo.values(ag.policy_features->infer(env));

    // ---- discriminator
    PairBatch policy_pairs;
    for (const auto& e : buf.envs)
      for (const auto& tr : e) {
        policy_pairs.states.push_back(tr.state);
        policy_pairs.actions.push_back(tr.action);
      }
    double acc_sum = 0.0;
    std::size_t disc_steps = 0;
    for (std::size_t epoch = 0; epoch < cfg.disc_epochs; ++epoch) {
      std::vector<std::size_t> order(policy_pairs.size());
      std::iota(order.begin(), order.end(), 0);
      disc_rng.shuffle(order);
      for (std::size_t b = 0; b < order.size(); b += cfg.disc_minibatch) {
        const std::size_t n = std::min(cfg.disc_minibatch, order.size() - b);
        PairBatch pol, exp;
        for (std::size_t i = 0; i < n; ++i) {
          pol.states.push_back(policy_pairs.states[order[b + i]]);
          pol.actions.push_back(policy_pairs.actions[order[b + i]]);
          const auto& rec = demos.records[disc_rng.uniform_int(demos.count())];
          exp.states.push_back(rec.state());
          exp.actions.push_back(static_cast<std::size_t>(rec.action));
        }
        acc_sum += disc.update(pol, exp).accuracy;
        ++disc_steps;
      }
    }
    ag.beta = disc.beta();

    // ---- rewards from the updated discriminator
    const auto d = disc.predict(policy_pairs);
    double reward_sum = 0.0;
    std::size_t k = 0;
    for (auto& e : buf.envs)
      for (auto& tr : e) {
        tr.d = d[k++];
        tr.reward = compute_reward(cfg.reward, tr.d);
        reward_sum += tr.reward;
      }
    if (hooks.on_rollout) hooks.on_rollout(buf);

    // ---- GAE + PPO
    std::vector<PpoSample> batch;
    batch.reserve(buf.size());
    for (std::size_t e = 0; e < n_envs; ++e) {
      std::vector<double> rewards, vals;
      std::vector<bool> dones;
      for (const auto& tr : buf.envs[e]) {
        rewards.push_back(tr.reward + tr.bonus);
        vals.push_back(tr.value);
        dones.push_back(tr.done);
      }
      const auto g = gae_advantages(rewards, vals, dones, buf.bootstrap[e], cfg.gamma, cfg.gae_lambda);
      for (std::size_t t = 0; t < buf.envs[e].size(); ++t) {
        const auto& tr = buf.envs[e][t];
        batch.push_back({tr.state, tr.action, tr.code, tr.logp, tr.probs, g.advantages[t], g.returns[t]});
      }
    }
    std::vector<double> adv;
    for (const auto& s : batch) adv.push_back(s.advantage);
    normalize(adv);
    for (std::size_t i = 0; i < batch.size(); ++i) batch[i].advantage = adv[i];
    ppo.update(batch, ppo_rng);

    // ---- periodic evaluation
    if ((it + 1) % cfg.eval_interval == 0) {
      NetworkPolicy pol(*ag.actor, *ag.policy_features, ag.posterior.get(), ag.posterior_features.get(),
                        cfg.eval_greedy);
      const auto ev = evaluate(pol, cfg.eval_episodes, derive_seed(seed, kPeriodicEval));
      CurvePoint p{steps, ev.mean, ev.std, acc_sum / static_cast<double>(std::max<std::size_t>(disc_steps, 1)),
                   reward_sum / static_cast<double>(buf.size())};
      report.curve.push_back(p);
      if (hooks.on_eval) hooks.on_eval(p);
    }
  }

  NetworkPolicy pol(*ag.actor, *ag.policy_features, ag.posterior.get(), ag.posterior_features.get(),
                    cfg.eval_greedy);
  const auto fin = evaluate(pol, cfg.final_eval_episodes, derive_seed(seed, kFinalEval));
  report.final_score = fin.mean;
  report.final_std = fin.std;
  report.final_success_rate = fin.success_rate;
  report.encoder_hash_end = encoder_hash(ag.policy_features->encoder());
  summarize(report, cfg.threshold, cfg.rolling_window);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace mail::train
