#include "mail/models/networks.hpp"

#include <cmath>

#include "mail/core/error.hpp"

namespace mail::models {

namespace ad = mail::diff;

Tensor dense_init(std::size_t in, std::size_t out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  Tensor t({in, out});
  for (float& v : t.data()) v = static_cast<float>(rng.uniform(-limit, limit));
  return t;
}

Tensor conv_init(std::size_t out_channels, std::size_t in_channels, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in_channels * 9));
  Tensor t({out_channels, in_channels, 3, 3});
  for (float& v : t.data()) v = static_cast<float>(rng.uniform(-limit, limit));
  return t;
}

Tensor one_hot(const std::vector<std::size_t>& index, std::size_t width) {
  if (index.empty()) throw ConfigError("one_hot: empty index list");
  Tensor t({index.size(), width});
  for (std::size_t r = 0; r < index.size(); ++r) {
    if (index[r] >= width) throw ConfigError("one_hot: index out of range");
    t[r * width + index[r]] = 1.0f;
  }
  return t;
}

Tensor render_batch(const std::vector<nav::EnvState>& states) {
  if (states.empty()) throw ConfigError("render_batch: no states");
  Tensor t({states.size(), nav::kChannels, nav::kImageSize, nav::kImageSize});
  for (std::size_t i = 0; i < states.size(); ++i) {
    nav::render_into(states[i], t.data().subspan(i * nav::kObservationSize, nav::kObservationSize));
  }
  return t;
}

float sigmoid_clamped(float logit) {
  const double d = 1.0 / (1.0 + std::exp(-static_cast<double>(logit)));
  return static_cast<float>(std::clamp(d, static_cast<double>(kDiscClamp), 1.0 - static_cast<double>(kDiscClamp)));
}

// ---------------------------------------------------------------- encoder

namespace {
constexpr std::size_t kC1 = 16, kC2 = 32;
constexpr std::size_t kFlat = kC2 * 8 * 8;
}  // namespace

Encoder::Encoder(Rng& rng, const std::string& prefix) {
  c1w_ = params_.add(prefix + ".conv1.w", conv_init(kC1, nav::kChannels, rng));
  c1b_ = params_.add(prefix + ".conv1.b", Tensor({kC1}));
  c2w_ = params_.add(prefix + ".conv2.w", conv_init(kC2, kC1, rng));
  c2b_ = params_.add(prefix + ".conv2.b", Tensor({kC2}));
  fw_ = params_.add(prefix + ".fc.w", dense_init(kFlat, kFeatureDim, rng));
  fb_ = params_.add(prefix + ".fc.b", Tensor({kFeatureDim}));
}

Var Encoder::forward(const Var& obs) const {
  Var x = obs;
  if (x.rank() == 2 && x.dim(1) == nav::kObservationSize) {
    x = ad::reshape(x, {x.dim(0), nav::kChannels, nav::kImageSize, nav::kImageSize});
  }
  if (x.rank() != 4 || x.dim(1) != nav::kChannels || x.dim(2) != nav::kImageSize || x.dim(3) != nav::kImageSize) {
    throw ConfigError("encoder expects observations [n,4,32,32], got " + ad::shape_string(x.shape()));
  }
  const std::size_t n = x.dim(0);
  Var h = ad::relu(ad::conv2d(x, c1w_, c1b_, 2));
  h = ad::relu(ad::conv2d(h, c2w_, c2b_, 2));
  h = ad::reshape(h, {n, kFlat});
  return ad::relu(ad::dense(h, fw_, fb_));
}

std::vector<float> Encoder::encode(const nav::Observation& obs) const {
  if (obs.size() != nav::kObservationSize) throw ConfigError("encoder expects 4096 observation values");
  Var x = Var::constant(Tensor({1, nav::kChannels, nav::kImageSize, nav::kImageSize}, obs));
  const Var f = forward(x);
  return {f.data().begin(), f.data().end()};
}

Tensor Encoder::encode_states(const std::vector<nav::EnvState>& states) const {
  return forward(Var::constant(render_batch(states))).value();
}

// ------------------------------------------------------------------ actor

Actor::Actor(std::size_t code_dim, Rng& rng, const std::string& prefix) : code_dim_(code_dim) {
  (void)rng;
  w_ = params_.add(prefix + ".head.w", Tensor({kFeatureDim + code_dim, kNumActions}));
  b_ = params_.add(prefix + ".head.b", Tensor({kNumActions}));
}

Var Actor::logits(const Var& features, const Var* codes) const {
  if (di() != (codes != nullptr)) {
    throw UsageError(di() ? "actor: DI policy needs a code" : "actor: code supplied to a non-DI policy");
  }
  Var x = codes ? ad::concat_cols(features, *codes) : features;
  return ad::dense(x, w_, b_);
}

std::array<float, kNumActions> Actor::probs(const std::vector<float>& feature, std::optional<std::size_t> code) const {
  if (di() != code.has_value()) {
    throw UsageError(di() ? "actor: DI policy needs a code" : "actor: code supplied to a non-DI policy");
  }
  Var f = Var::constant(Tensor({1, feature.size()}, feature));
  Var out;
  if (code) {
    Var c = Var::constant(one_hot({*code}, code_dim_));
    out = ad::softmax(logits(f, &c));
  } else {
    out = ad::softmax(logits(f));
  }
  std::array<float, kNumActions> p{};
  std::copy_n(out.data().begin(), kNumActions, p.begin());
  return p;
}

// ----------------------------------------------------------------- critic

Critic::Critic(Rng& rng, const std::string& prefix) {
  w1_ = params_.add(prefix + ".l1.w", dense_init(kFeatureDim, kHidden, rng));
  b1_ = params_.add(prefix + ".l1.b", Tensor({kHidden}));
  w2_ = params_.add(prefix + ".l2.w", Tensor({kHidden, 1}));
  b2_ = params_.add(prefix + ".l2.b", Tensor({1}));
}

Var Critic::value(const Var& features) const {
  Var h = ad::tanh(ad::dense(features, w1_, b1_));
  Var v = ad::dense(h, w2_, b2_);
  return ad::reshape(v, {v.dim(0)});
}

// ---------------------------------------------------------- discriminator

Discriminator::Discriminator(bool vdb, Rng& rng, const std::string& prefix) : vdb_(vdb) {
  const std::size_t in = kFeatureDim + kNumActions;
  if (vdb_) {
    ew_ = params_.add(prefix + ".vdb.w", dense_init(in, 2 * kVdbDim, rng));
    eb_ = params_.add(prefix + ".vdb.b", Tensor({2 * kVdbDim}));
  }
  w1_ = params_.add(prefix + ".l1.w", dense_init(vdb_ ? kVdbDim : in, kHidden, rng));
  b1_ = params_.add(prefix + ".l1.b", Tensor({kHidden}));
  w2_ = params_.add(prefix + ".l2.w", Tensor({kHidden, 1}));
  b2_ = params_.add(prefix + ".l2.b", Tensor({1}));
}

DiscOutput Discriminator::forward(const Var& features, const std::vector<std::size_t>& actions, Rng* noise) const {
  if (features.rank() != 2 || features.dim(1) != kFeatureDim || features.dim(0) != actions.size()) {
    throw ConfigError("discriminator expects [n,128] features with n actions");
  }
  Var x = ad::concat_cols(features, Var::constant(one_hot(actions, kNumActions)));
  DiscOutput out;
  if (vdb_) {
    Var stats = ad::dense(x, ew_, eb_);
    Var mu = ad::slice_cols(stats, 0, kVdbDim);
    Var log_sigma = ad::slice_cols(stats, kVdbDim, kVdbDim);
    out.kl = ad::gaussian_kl(mu, log_sigma);
    x = mu;
    if (noise) {
      Tensor eps(mu.shape());
      for (float& e : eps.data()) e = static_cast<float>(noise->normal());
      x = ad::add(mu, ad::mul(ad::exp(log_sigma), Var::constant(std::move(eps))));
    }
  }
  Var h = ad::relu(ad::dense(x, w1_, b1_));
  Var l = ad::dense(h, w2_, b2_);
  out.logits = ad::reshape(l, {l.dim(0)});
  return out;
}

std::pair<float, float> Discriminator::discriminate(const std::vector<float>& feature, std::size_t action) const {
  const auto out = forward(Var::constant(Tensor({1, feature.size()}, feature)), {action});
  return {sigmoid_clamped(out.logits.item()), vdb_ ? out.kl.item() : 0.0f};
}

// -------------------------------------------------------------- posterior

Posterior::Posterior(Rng& rng, std::size_t codes, const std::string& prefix) : codes_(codes) {
  (void)rng;
  w_ = params_.add(prefix + ".head.w", Tensor({kFeatureDim + codes, codes}));
  b_ = params_.add(prefix + ".head.b", Tensor({codes}));
}

Var Posterior::logits(const Var& features, const Var& prev_codes) const {
  return ad::dense(ad::concat_cols(features, prev_codes), w_, b_);
}

std::vector<float> Posterior::probs(const std::vector<float>& feature, std::optional<std::size_t> prev_code) const {
  Tensor prev({1, codes_});
  if (prev_code) prev[*prev_code] = 1.0f;
  Var p = ad::softmax(logits(Var::constant(Tensor({1, feature.size()}, feature)), Var::constant(std::move(prev))));
  return {p.data().begin(), p.data().end()};
}

}  // namespace mail::models
