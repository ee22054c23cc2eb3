#include <gtest/gtest.h>

#include <filesystem>
#include <numeric>

#include "mail/core/error.hpp"
#include "mail/diff/adam.hpp"
#include "mail/models/feature_cache.hpp"
#include "mail/models/linkage.hpp"
#include "mail/models/networks.hpp"

using namespace mail;
using namespace mail::models;
namespace ad = mail::diff;

namespace {

void randomize(Params& p, Rng& rng, double scale = 0.5) {
  for (const auto& e : p.entries()) {
    Var var = e.var;
    for (float& v : var.value().data()) v = static_cast<float>(rng.uniform(-scale, scale));
  }
}

std::vector<float> random_feature(Rng& rng) {
  std::vector<float> f(kFeatureDim);
  for (float& v : f) v = static_cast<float>(rng.uniform(0.0, 2.0));
  return f;
}

// One cross-entropy step of encoder + actor on a few states.
void bc_step(Encoder& enc, Actor& actor, const std::vector<nav::EnvState>& states) {
  Params all;
  all.extend(enc.params());
  all.extend(actor.params());
  ad::Adam<float> opt(all, {.lr = 1e-2});
  Var f = enc.forward(Var::constant(render_batch(states)));
  std::vector<std::size_t> labels(states.size(), 1);
  all.zero_grad();
  ad::backward(ad::cross_entropy(actor.logits(f), labels));
  opt.step();
}

}  // namespace

TEST(Encoder, SameObservationSameFeatures) {
  Rng rng(1);
  Encoder enc(rng);
  const auto obs = nav::render(nav::reset(3));
  const auto a = enc.encode(obs), b = enc.encode(obs);
  ASSERT_EQ(a.size(), kFeatureDim);
  EXPECT_EQ(a, b);
}

TEST(Encoder, RejectsWrongShape) {
  Rng rng(1);
  Encoder enc(rng);
  EXPECT_THROW(enc.encode(nav::Observation(100)), ConfigError);
  EXPECT_THROW(enc.forward(Var::constant(Tensor({1, 3, 32, 32}))), ConfigError);
}

TEST(Encoder, FrozenSurvivesTrainingUnfrozenChanges) {
  Rng rng(2);
  const std::vector<nav::EnvState> states{nav::reset(1), nav::reset(2), nav::reset(3)};
  const auto obs = nav::render(states[0]);

  Encoder frozen(rng);
  frozen.set_frozen(true);
  Actor a1(0, rng);
  const auto before = frozen.encode(obs);
  for (int i = 0; i < 1000; ++i) bc_step(frozen, a1, states);
  EXPECT_EQ(frozen.encode(obs), before);

  Encoder live(rng);
  Actor a2(0, rng);
  randomize(a2.params(), rng);  // nonzero head so gradients reach the encoder
  const auto live_before = live.encode(obs);
  bc_step(live, a2, states);
  EXPECT_NE(live.encode(obs), live_before);
}

TEST(Actor, ZeroInitIsUniform) {
  Rng rng(3);
  Actor actor(0, rng);
  for (float p : actor.probs(random_feature(rng))) EXPECT_EQ(p, 0.25f);
}

TEST(Actor, RandomParamsGiveDistribution) {
  Rng rng(4);
  Actor actor(kNumCodes, rng);
  randomize(actor.params(), rng);
  for (int i = 0; i < 100; ++i) {
    const auto p = actor.probs(random_feature(rng), i % 4);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-6);
  }
}

TEST(Actor, CodeMustMatchMode) {
  Rng rng(5);
  Actor plain(0, rng), di(kNumCodes, rng);
  const auto f = random_feature(rng);
  EXPECT_THROW(plain.probs(f, 1), UsageError);
  EXPECT_THROW(di.probs(f), UsageError);
}

TEST(Actor, CodeChangesLogitsOnceCodeWeightsAreNonzero) {
  Rng rng(6);
  Actor actor(kNumCodes, rng);
  const auto f = random_feature(rng);
  EXPECT_EQ(actor.probs(f, 0), actor.probs(f, 2));
  auto w = actor.params().get("actor.head.w");
  for (std::size_t j = 0; j < kNumActions; ++j) w.value()[(kFeatureDim + 2) * kNumActions + j] = 0.1f * (j + 1);
  EXPECT_NE(actor.probs(f, 0), actor.probs(f, 2));
}

TEST(Critic, ScalarPerRow) {
  Rng rng(7);
  Critic critic(rng);
  Var f = Var::constant(Tensor({3, kFeatureDim}, 0.5f));
  const auto v = critic.value(f);
  EXPECT_EQ(v.shape(), (ad::Shape{3}));
  for (float x : v.data()) EXPECT_EQ(x, 0.0f);
}

TEST(Discriminator, ZeroInitGivesHalf) {
  Rng rng(8);
  for (bool vdb : {false, true}) {
    Discriminator d(vdb, rng);
    EXPECT_EQ(d.discriminate(random_feature(rng), 2).first, 0.5f);
  }
}

TEST(Discriminator, OutputStrictlyInsideUnitInterval) {
  Rng rng(9);
  Discriminator d(false, rng);
  randomize(d.params(), rng, 3.0);
  for (int i = 0; i < 1000; ++i) {
    auto f = random_feature(rng);
    for (float& v : f) v *= 50.0f;
    const float p = d.discriminate(f, i % 4).first;
    EXPECT_GT(p, 0.0f);
    EXPECT_LT(p, 1.0f);
    EXPECT_TRUE(std::isfinite(std::log(p)) && std::isfinite(std::log(1.0f - p)));
  }
}

TEST(Discriminator, VdbStandardNormalHasZeroKl) {
  Var mu = Var::parameter(Tensor({1, kVdbDim}));
  Var ls = Var::parameter(Tensor({1, kVdbDim}));
  Var kl = ad::gaussian_kl(mu, ls);
  EXPECT_EQ(kl.item(), 0.0f);
  ad::backward(ad::sum(kl));
  for (float g : mu.grad()) EXPECT_EQ(g, 0.0f);
}

TEST(Discriminator, VdbSamplingReproducibleAndKlNonnegative) {
  Rng init(10);
  Discriminator d(true, init);
  randomize(d.params(), init);
  Var f = Var::constant(Tensor({4, kFeatureDim}, 0.3f));
  Rng n1(5), n2(5);
  const auto a = d.forward(f, {0, 1, 2, 3}, &n1);
  const auto b = d.forward(f, {0, 1, 2, 3}, &n2);
  EXPECT_TRUE(std::equal(a.logits.data().begin(), a.logits.data().end(), b.logits.data().begin()));
  for (float k : a.kl.data()) EXPECT_GE(k, 0.0f);
}

TEST(Posterior, ZeroInitUniformAndDeterministic) {
  Rng rng(11);
  Posterior q(rng);
  const auto f = random_feature(rng);
  for (float p : q.probs(f, std::nullopt)) EXPECT_EQ(p, 0.25f);
  randomize(q.params(), rng);
  const auto p1 = q.probs(f, 1), p2 = q.probs(f, 1);
  EXPECT_EQ(p1, p2);
  EXPECT_NEAR(std::accumulate(p1.begin(), p1.end(), 0.0), 1.0, 1e-6);
}

TEST(SharedEncoder, MutationVisibleThroughEveryHandle) {
  Rng rng(12);
  auto enc = std::make_shared<Encoder>(rng);
  std::shared_ptr<const Encoder> policy_view = enc, disc_view = enc;
  const auto obs = nav::render(nav::reset(4));
  const auto before = disc_view->encode(obs);
  enc->params().get("encoder.fc.b").value()[0] += 1.0f;
  EXPECT_NE(policy_view->encode(obs), before);
  EXPECT_EQ(policy_view->encode(obs), disc_view->encode(obs));

  Params ppo, disc;
  ppo.extend(enc->params());
  disc.extend(enc->params());
  EXPECT_EQ(ppo.get("encoder.fc.w").node(), disc.get("encoder.fc.w").node());
}

TEST(FeatureCache, MatchesDirectEncoding) {
  Rng rng(13);
  Encoder enc(rng);
  FeatureCache cache(enc, 7);
  std::vector<nav::EnvState> states;
  for (std::uint64_t s = 0; s < 40; ++s) states.push_back(nav::reset(s % 25));
  const Tensor g = cache.gather(states);
  EXPECT_LE(cache.size(), 25u);
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto f = enc.encode(nav::render(states[i]));
    for (std::size_t j = 0; j < kFeatureDim; ++j) ASSERT_NEAR(g[i * kFeatureDim + j], f[j], 1e-5f);
  }
}

TEST(Linkage, RoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "mail_test_linkage.json";
  std::vector<LinkEntry> entries{{"encoder", "encoder.mailparm", ""},
                                 {"actor", "actor.mailparm", "encoder"},
                                 {"disc", "disc.mailparm", "encoder"}};
  write_linkage(path, entries);
  EXPECT_EQ(read_linkage(path), entries);
  std::filesystem::remove(path);
}
