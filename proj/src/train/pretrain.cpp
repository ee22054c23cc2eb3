#include "mail/train/pretrain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mail/core/error.hpp"
#include "mail/core/rng.hpp"
#include "mail/diff/adam.hpp"
#include "mail/models/feature_cache.hpp"

namespace mail::train {

namespace ad = mail::diff;
using models::Tensor;
using models::Var;

namespace {

std::vector<nav::EnvState> states_of(const demo::DemoDataset& ds, const std::vector<std::size_t>& index) {
  std::vector<nav::EnvState> out;
  out.reserve(index.size());
  for (auto i : index) out.push_back(ds.records[i].state());
  return out;
}

std::vector<std::size_t> actions_of(const demo::DemoDataset& ds, const std::vector<std::size_t>& index) {
  std::vector<std::size_t> out;
  out.reserve(index.size());
  for (auto i : index) out.push_back(static_cast<std::size_t>(ds.records[i].action));
  return out;
}

}  // namespace

EpisodeSplit split_by_episode(const demo::DemoDataset& ds, double fraction, std::uint64_t seed) {
  if (ds.count() == 0 || ds.episode_count() == 0) throw ConfigError("demonstration dataset is empty");
  EpisodeSplit split;
  auto push = [&](std::vector<std::size_t>& dst, std::size_t e) {
    const auto [b, end] = ds.episode(e);
    for (std::size_t i = b; i < end; ++i) dst.push_back(i);
  };
  if (ds.episode_count() == 1) {
    push(split.train, 0);
    split.holdout = split.train;
    return split;
  }
  std::vector<std::size_t> order(ds.episode_count());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  const auto n_hold = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(order.size()))), 1, order.size() - 1);
  const std::size_t n_train = order.size() - n_hold;
  std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::sort(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  for (std::size_t i = 0; i < order.size(); ++i) push(i < n_train ? split.train : split.holdout, order[i]);
  return split;
}

std::pair<double, double> bc_loss_accuracy(const models::Encoder& encoder, const models::Actor& actor,
                                           const demo::DemoDataset& demos, const std::vector<std::size_t>& index) {
  if (index.empty()) throw ConfigError("bc_loss_accuracy: no records");
  models::FeatureCache cache(encoder);
  double loss = 0.0;
  std::size_t correct = 0;
  constexpr std::size_t kChunk = 1024;
  for (std::size_t b = 0; b < index.size(); b += kChunk) {
    std::vector<std::size_t> part(index.begin() + static_cast<std::ptrdiff_t>(b),
                                  index.begin() + static_cast<std::ptrdiff_t>(std::min(index.size(), b + kChunk)));
    const auto labels = actions_of(demos, part);
    Var logits = actor.logits(Var::constant(cache.gather(states_of(demos, part))));
    loss += ad::cross_entropy(logits, labels).item() * static_cast<double>(part.size());
    for (std::size_t r = 0; r < part.size(); ++r) {
      const auto row = logits.data().subspan(r * models::kNumActions, models::kNumActions);
      const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
      correct += best == labels[r];
    }
  }
  return {loss / static_cast<double>(index.size()), static_cast<double>(correct) / static_cast<double>(index.size())};
}

BcResult bc_pretrain(const demo::DemoDataset& demos, const TrainConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const auto split = split_by_episode(demos, cfg.bc_holdout, derive_seed(seed, 1));
  Rng init(derive_seed(seed, 2));
  Rng order_rng(derive_seed(seed, 3));

  BcResult res;
  res.encoder = std::make_shared<models::Encoder>(init);
  res.actor = std::make_unique<models::Actor>(0, init);
  res.train_pairs = split.train.size();
  res.holdout_pairs = split.holdout.size();

  models::Params params;
  params.extend(res.encoder->params());
  params.extend(res.actor->params());
  ad::Adam<float> opt(params, {.lr = cfg.bc_lr});

  res.initial_train_loss = bc_loss_accuracy(*res.encoder, *res.actor, demos, split.train).first;
  std::vector<std::size_t> order = split.train;
  for (std::size_t epoch = 0; epoch < cfg.bc_epochs; ++epoch) {
    order_rng.shuffle(order);
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t b = 0; b < order.size(); b += cfg.bc_minibatch) {
      std::vector<std::size_t> mb(order.begin() + static_cast<std::ptrdiff_t>(b),
                                  order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), b + cfg.bc_minibatch)));
      Var f = res.encoder->forward(Var::constant(models::render_batch(states_of(demos, mb))));
      Var loss = ad::cross_entropy(res.actor->logits(f), actions_of(demos, mb));
      opt.zero_grad();
      ad::backward(loss);
      opt.step();
      total += loss.item();
      ++batches;
    }
    res.epoch_loss.push_back(total / static_cast<double>(batches));
    res.epoch_holdout_accuracy.push_back(bc_loss_accuracy(*res.encoder, *res.actor, demos, split.holdout).second);
  }
  res.final_train_loss = bc_loss_accuracy(*res.encoder, *res.actor, demos, split.train).first;
  res.holdout_accuracy = res.epoch_holdout_accuracy.empty()
                             ? bc_loss_accuracy(*res.encoder, *res.actor, demos, split.holdout).second
                             : res.epoch_holdout_accuracy.back();
  return res;
}

PosteriorResult posterior_pretrain(const demo::DemoDataset& demos, std::shared_ptr<const models::Encoder> encoder,
                                   const TrainConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (!encoder) throw ConfigError("posterior pre-training needs the BC encoder checkpoint (phase 1 artifact)");
  if (!encoder->frozen()) throw UsageError("posterior pre-training requires a frozen encoder");
  if (demos.episode_count() == 0) throw ConfigError("demonstration dataset is empty");

  Rng init(derive_seed(seed, 4));
  Rng noise(derive_seed(seed, 5));
  Rng order_rng(derive_seed(seed, 6));
  PosteriorResult res;
  res.posterior = std::make_shared<models::Posterior>(init);
  res.actor = std::make_unique<models::Actor>(models::kNumCodes, init);
  const std::size_t k = res.posterior->codes();

  models::Params params;
  params.extend(res.posterior->params());
  params.extend(res.actor->params());
  ad::Adam<float> opt(params, {.lr = cfg.posterior_lr});
  models::FeatureCache cache(*encoder);
  const float inv_temp = static_cast<float>(1.0 / cfg.temperature);

  std::vector<std::size_t> episodes(demos.episode_count());
  std::iota(episodes.begin(), episodes.end(), 0);
  for (std::size_t epoch = 0; epoch < cfg.posterior_epochs; ++epoch) {
    order_rng.shuffle(episodes);
    double total = 0.0, recon_total = 0.0, kl_total = 0.0;
    std::size_t steps_total = 0;
    for (std::size_t b = 0; b < episodes.size(); b += cfg.posterior_batch_episodes) {
      const std::size_t end = std::min(episodes.size(), b + cfg.posterior_batch_episodes);
      std::vector<std::pair<std::size_t, std::size_t>> ranges;
      std::size_t longest = 0, n_steps = 0;
      for (std::size_t i = b; i < end; ++i) {
        ranges.push_back(demos.episode(episodes[i]));
        longest = std::max(longest, ranges.back().second - ranges.back().first);
        n_steps += ranges.back().second - ranges.back().first;
      }
      std::vector<std::size_t> prev(ranges.size(), k);  // k = no previous code
      Var recon, kl;
      for (std::size_t t = 0; t < longest; ++t) {
        std::vector<std::size_t> rows, records;
        for (std::size_t e = 0; e < ranges.size(); ++e)
          if (ranges[e].first + t < ranges[e].second) {
            rows.push_back(e);
            records.push_back(ranges[e].first + t);
          }
        Var f = Var::constant(cache.gather(states_of(demos, records)));
        Tensor prev_t({rows.size(), k});
        for (std::size_t r = 0; r < rows.size(); ++r)
          if (prev[rows[r]] < k) prev_t[r * k + prev[rows[r]]] = 1.0f;
        Var logits = res.posterior->logits(f, Var::constant(std::move(prev_t)));
        Tensor g({rows.size(), k});
        for (float& v : g.data()) v = static_cast<float>(noise.gumbel());
        Var soft = ad::softmax(ad::scale(ad::add(logits, Var::constant(std::move(g))), inv_temp));
        Tensor hard({rows.size(), k});
        for (std::size_t r = 0; r < rows.size(); ++r) {
          const auto row = soft.data().subspan(r * k, k);
          const auto c = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
          hard[r * k + c] = 1.0f;
          prev[rows[r]] = c;
        }
        Var code = ad::straight_through(hard, soft);
        Var ce = ad::scale(ad::cross_entropy(res.actor->logits(f, &code), actions_of(demos, records)),
                           static_cast<float>(rows.size()));
        Var klt = ad::sum(ad::categorical_kl_uniform(logits));
        recon = recon.defined() ? ad::add(recon, ce) : ce;
        kl = kl.defined() ? ad::add(kl, klt) : klt;
      }
      const float inv_n = 1.0f / static_cast<float>(n_steps);
      Var recon_mean = ad::scale(recon, inv_n);
      Var kl_mean = ad::scale(kl, inv_n);
      Var loss = ad::add(recon_mean, ad::scale(kl_mean, static_cast<float>(cfg.kl_weight)));
      opt.zero_grad();
      ad::backward(loss);
      opt.step();
      total += loss.item() * static_cast<double>(n_steps);
      recon_total += recon_mean.item() * static_cast<double>(n_steps);
      kl_total += kl_mean.item() * static_cast<double>(n_steps);
      steps_total += n_steps;
    }
    res.epoch_loss.push_back(total / static_cast<double>(steps_total));
    res.epoch_reconstruction.push_back(recon_total / static_cast<double>(steps_total));
    res.epoch_kl.push_back(kl_total / static_cast<double>(steps_total));
  }
  return res;
}

}  // namespace mail::train
