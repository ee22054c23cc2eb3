#include "mail/train/learners.hpp"

#include <cmath>
#include <numeric>

#include "mail/core/error.hpp"

namespace mail::train {

namespace ad = mail::diff;

namespace {

models::Params disc_params(models::Discriminator& disc, FeatureSource& features) {
  models::Params p;
  if (features.trainable()) p.extend(features.encoder().params());
  p.extend(disc.params());
  return p;
}

}  // namespace

DiscriminatorLearner::DiscriminatorLearner(models::Discriminator& disc, FeatureSource& features,
                                           const TrainConfig& cfg, std::uint64_t seed)
    : disc_(disc),
      features_(features),
      cfg_(cfg),
      opt_(disc_params(disc, features), {.lr = cfg.disc_lr}),
      noise_(seed),
      beta_(cfg.beta_init) {}

DiscStats DiscriminatorLearner::update(const PairBatch& policy, const PairBatch& expert) {
  if (policy.size() == 0 || expert.size() == 0) throw ConfigError("discriminator update needs non-empty batches");
  PairBatch joint = policy;
  joint.states.insert(joint.states.end(), expert.states.begin(), expert.states.end());
  joint.actions.insert(joint.actions.end(), expert.actions.begin(), expert.actions.end());
  const std::size_t np = policy.size(), ne = expert.size();

  Var f = features_.features(joint.states);
  const auto out = disc_.forward(f, joint.actions, disc_.vdb() ? &noise_ : nullptr);
  Var pol = ad::slice_cols(ad::reshape(out.logits, {1, np + ne}), 0, np);
  Var exp = ad::slice_cols(ad::reshape(out.logits, {1, np + ne}), np, ne);
  Var loss = ad::add(ad::bce_with_logits(pol, std::vector<float>(np, 1.0f)),
                     ad::bce_with_logits(exp, std::vector<float>(ne, 0.0f)));
  DiscStats st;
  st.loss = loss.item();
  if (disc_.vdb()) {
    Var kl = ad::mean(out.kl);
    st.kl = kl.item();
    loss = ad::add(loss, ad::scale(ad::add_scalar(kl, static_cast<float>(-cfg_.ic)), static_cast<float>(beta_)));
  }
  opt_.zero_grad();
  ad::backward(loss);
  opt_.step();
  features_.invalidate();
  if (disc_.vdb()) beta_ = std::max(0.0, beta_ + cfg_.beta_lr * (st.kl - cfg_.ic));
  st.beta = beta_;

  std::size_t correct = 0;
  const auto logits = out.logits.data();
  for (std::size_t i = 0; i < np + ne; ++i) correct += (i < np) ? logits[i] > 0.0f : logits[i] < 0.0f;
  st.accuracy = static_cast<double>(correct) / static_cast<double>(np + ne);
  return st;
}

std::vector<double> DiscriminatorLearner::predict(const PairBatch& batch) {
  const auto out = disc_.forward(Var::constant(features_.infer(batch.states)), batch.actions);
  std::vector<double> d;
  d.reserve(batch.size());
  for (float l : out.logits.data()) d.push_back(models::sigmoid_clamped(l));
  return d;
}

namespace {

models::Params ppo_params(models::Actor& actor, models::Critic& critic, FeatureSource& features) {
  models::Params p;
  if (features.trainable()) p.extend(features.encoder().params());
  p.extend(actor.params());
  p.extend(critic.params());
  return p;
}

}  // namespace

PpoLearner::PpoLearner(models::Actor& actor, models::Critic& critic, FeatureSource& features, const TrainConfig& cfg)
    : actor_(actor),
      critic_(critic),
      features_(features),
      cfg_(cfg),
      params_(ppo_params(actor, critic, features)),
      opt_(params_, {.lr = cfg.policy_lr}) {}

std::vector<double> PpoLearner::values(const Tensor& features) const {
  const Var v = critic_.value(Var::constant(features));
  return {v.data().begin(), v.data().end()};
}

PpoStats PpoLearner::update(const std::vector<PpoSample>& batch, Rng& rng) {
  if (batch.empty()) throw ConfigError("ppo_update: empty batch");
  const float clip = static_cast<float>(cfg_.ppo_clip);
  std::vector<std::size_t> order(batch.size());
  std::iota(order.begin(), order.end(), 0);
  PpoStats st;
  std::size_t updates = 0, clipped = 0, seen = 0;
  for (std::size_t epoch = 0; epoch < cfg_.ppo_epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t b = 0; b < order.size(); b += cfg_.minibatch) {
      const std::size_t n = std::min(cfg_.minibatch, order.size() - b);
      std::vector<nav::EnvState> states;
      std::vector<std::size_t> actions, codes;
      std::vector<float> logp_old(n), adv(n), ret(n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto& s = batch[order[b + i]];
        states.push_back(s.state);
        actions.push_back(s.action);
        if (s.code) codes.push_back(*s.code);
        logp_old[i] = s.logp_old;
        adv[i] = static_cast<float>(s.advantage);
        ret[i] = static_cast<float>(s.ret);
      }
      Var f = features_.features(states);
      Var logits;
      if (actor_.di()) {
        Var c = Var::constant(models::one_hot(codes, actor_.code_dim()));
        logits = actor_.logits(f, &c);
      } else {
        logits = actor_.logits(f);
      }
      Var logp = ad::pick(ad::log_softmax(logits), actions);
      Var ratio = ad::exp(ad::sub(logp, Var::constant(Tensor({n}, logp_old))));
      Var a = Var::constant(Tensor({n}, adv));
      Var surr = ad::minimum(ad::mul(ratio, a), ad::mul(ad::clamp(ratio, 1.0f - clip, 1.0f + clip), a));
      Var policy_loss = ad::scale(ad::mean(surr), -1.0f);
      Var value_loss = ad::mean(ad::square(ad::sub(critic_.value(f), Var::constant(Tensor({n}, ret)))));
      Var entropy = ad::mean(ad::categorical_entropy(logits));
      Var loss = ad::add(policy_loss, ad::sub(ad::scale(value_loss, static_cast<float>(cfg_.value_coef)),
                                              ad::scale(entropy, static_cast<float>(cfg_.entropy_coef))));
      params_.zero_grad();
      ad::backward(loss);
      params_.clip_grad_norm(cfg_.max_grad_norm);
      opt_.step();
      for (float r : ratio.data()) clipped += (r < 1.0f - clip || r > 1.0f + clip);
      seen += n;
      st.policy_loss += policy_loss.item();
      st.value_loss += value_loss.item();
      st.entropy += entropy.item();
      ++updates;
    }
  }
  features_.invalidate();
  st.policy_loss /= static_cast<double>(updates);
  st.value_loss /= static_cast<double>(updates);
  st.entropy /= static_cast<double>(updates);
  st.clip_fraction = static_cast<double>(clipped) / static_cast<double>(seen);

  std::vector<nav::EnvState> states;
  std::vector<std::size_t> codes;
  for (const auto& s : batch) {
    states.push_back(s.state);
    if (s.code) codes.push_back(*s.code);
  }
  const auto probs = action_probs(actor_, features_.infer(states), actor_.di() ? &codes : nullptr);
  double kl = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i)
    for (std::size_t j = 0; j < models::kNumActions; ++j) {
      const double p = batch[i].probs_old[j], q = std::max<double>(probs[i][j], 1e-30);
      if (p > 0.0) kl += p * (std::log(p) - std::log(q));
    }
  st.approx_kl = kl / static_cast<double>(batch.size());
  return st;
}

}  // namespace mail::train
