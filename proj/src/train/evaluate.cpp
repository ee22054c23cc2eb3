#include "mail/train/evaluate.hpp"

#include <algorithm>
#include <cmath>

#include "mail/demo/expert.hpp"

namespace mail::train {

namespace {
constexpr std::uint64_t kActionStream = 0xac710ULL;

template <class P>
std::size_t argmax(const P& p) {
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}
}  // namespace

std::vector<nav::Action> ExpertPolicy::act(const std::vector<std::size_t>& ids, const std::vector<nav::EnvState>& states,
                                           Rng& rng) {
  (void)ids;
  (void)rng;
  std::vector<nav::Action> out;
  for (const auto& s : states) out.push_back(demo::expert_action(s));
  return out;
}

std::vector<nav::Action> RandomPolicy::act(const std::vector<std::size_t>& ids, const std::vector<nav::EnvState>& states,
                                           Rng& rng) {
  (void)ids;
  std::vector<nav::Action> out;
  for (std::size_t i = 0; i < states.size(); ++i) out.push_back(nav::kActions[rng.uniform_int(nav::kNumActions)]);
  return out;
}

NetworkPolicy::NetworkPolicy(const models::Actor& actor, FeatureSource& features, const models::Posterior* posterior,
                             FeatureSource* posterior_features, bool greedy)
    : actor_(actor),
      features_(features),
      posterior_(posterior),
      posterior_features_(posterior_features ? posterior_features : &features),
      greedy_(greedy) {
  if (actor.di() != (posterior != nullptr)) {
    throw UsageError(actor.di() ? "DI policy evaluation needs a posterior" : "posterior given for a non-DI policy");
  }
}

void NetworkPolicy::start(std::size_t n) { codes_.assign(n, std::nullopt); }

std::vector<nav::Action> NetworkPolicy::act(const std::vector<std::size_t>& ids,
                                            const std::vector<nav::EnvState>& states, Rng& rng) {
  const Tensor f = features_.infer(states);
  std::vector<std::array<float, models::kNumActions>> probs;
  if (posterior_) {
    std::vector<std::optional<std::size_t>> prev;
    for (auto id : ids) prev.push_back(codes_[id]);
    const auto q = code_probs(*posterior_, posterior_features_ == &features_ ? f : posterior_features_->infer(states), prev);
    std::vector<std::size_t> codes;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      codes.push_back(greedy_ ? argmax(q[i]) : rng.categorical(q[i]));
      codes_[ids[i]] = codes.back();
    }
    probs = action_probs(actor_, f, &codes);
  } else {
    probs = action_probs(actor_, f);
  }
  std::vector<nav::Action> out;
  for (const auto& p : probs) out.push_back(nav::kActions[greedy_ ? argmax(p) : rng.categorical(p)]);
  return out;
}

EvalReport evaluate(Policy& policy, std::size_t n_episodes, std::uint64_t seed, const StepObserver& observer) {
  if (n_episodes == 0) throw ConfigError("evaluate: n_episodes must be positive");
  Rng rng(derive_seed(seed, kActionStream));
  std::vector<nav::EnvState> states;
  for (std::size_t e = 0; e < n_episodes; ++e) states.push_back(nav::reset(derive_seed(seed, e)));
  EvalReport rep;
  rep.returns.assign(n_episodes, 0.0);
  rep.lengths.assign(n_episodes, 0);
  policy.start(n_episodes);
  std::vector<std::size_t> live;
  for (std::size_t e = 0; e < n_episodes; ++e)
    if (!nav::is_done(states[e])) live.push_back(e);
  while (!live.empty()) {
    std::vector<nav::EnvState> batch;
    for (auto e : live) batch.push_back(states[e]);
    const auto actions = policy.act(live, batch, rng);
    std::vector<std::size_t> still;
    for (std::size_t i = 0; i < live.size(); ++i) {
      const auto e = live[i];
      if (observer) observer(e, states[e].t, states[e], actions[i], policy.code(e));
      const auto r = nav::step(states[e], actions[i]);
      rep.returns[e] += r.reward;
      ++rep.lengths[e];
      states[e] = r.state;
      if (!r.done) still.push_back(e);
    }
    live = std::move(still);
  }
  double sum = 0.0, successes = 0.0;
  for (std::size_t e = 0; e < n_episodes; ++e) {
    sum += rep.returns[e];
    successes += nav::is_success(states[e]) ? 1.0 : 0.0;
  }
  rep.mean = sum / static_cast<double>(n_episodes);
  double var = 0.0;
  for (double r : rep.returns) var += (r - rep.mean) * (r - rep.mean);
  rep.std = std::sqrt(var / static_cast<double>(n_episodes));
  rep.success_rate = successes / static_cast<double>(n_episodes);
  return rep;
}

EvalReport evaluate(const models::Actor& actor, FeatureSource& features, std::size_t n_episodes, std::uint64_t seed,
                    const models::Posterior* posterior, FeatureSource* posterior_features, bool greedy) {
  NetworkPolicy policy(actor, features, posterior, posterior_features, greedy);
  return evaluate(policy, n_episodes, seed);
}

}  // namespace mail::train
