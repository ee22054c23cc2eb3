#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>

#include "mail/core/binary_io.hpp"
#include "mail/diff/adam.hpp"
#include "mail/diff/checkpoint.hpp"

namespace d = mail::diff;
using TF = d::Tensor<float>;

namespace {

d::ParamSet<float> small_set() {
  d::ParamSet<float> ps;
  ps.add("enc.w", TF({2, 3}, {1, 2, 3, 4, 5, 6}), "encoder");
  ps.add("head.w", TF({3}, {0.5f, -0.5f, 0.25f}), "head");
  ps.add("head.b", TF::scalar(-1.0f), "head");
  return ps;
}

void set_grads(d::ParamSet<float>& ps, float g) {
  for (const auto& e : ps.entries()) {
    auto v = e.var;
    v.value().ensure_grad();
    for (auto& x : v.mutable_grad()) x = g;
  }
}

}  // namespace

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  auto ps = small_set();
  const auto before = d::encode_checkpoint(ps);
  d::Adam<float> opt(ps, {});
  set_grads(ps, 0.0f);
  opt.step();
  EXPECT_EQ(d::encode_checkpoint(ps), before);
}

TEST(Adam, FrozenGroupUnchangedWithNonzeroGradient) {
  auto ps = small_set();
  ps.freeze("encoder");
  std::vector<float> before(ps.get("enc.w").data().begin(), ps.get("enc.w").data().end());
  d::Adam<float> opt(ps, {0.1});
  for (int i = 0; i < 50; ++i) {
    set_grads(ps, 1.0f);
    opt.step();
  }
  auto after = ps.get("enc.w").data();
  EXPECT_EQ(std::memcmp(before.data(), after.data(), before.size() * sizeof(float)), 0);
  EXPECT_NE(ps.get("head.b").item(), -1.0f);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  d::ParamSet<double> ps;
  auto theta = ps.add("x", d::Tensor<double>::scalar(1.0));
  d::Adam<double> opt(ps, {0.1, 0.9, 0.999, 1e-8});
  theta.value().ensure_grad()[0] = 1.0;
  opt.step();
  EXPECT_NEAR(theta.item(), 0.9, 1e-8);
  EXPECT_EQ(opt.step_count(), 1u);
}

TEST(Adam, StepCountIncreasesByOne) {
  auto ps = small_set();
  d::Adam<float> opt(ps, {});
  for (std::uint64_t i = 1; i <= 3; ++i) {
    set_grads(ps, 0.5f);
    opt.step();
    EXPECT_EQ(opt.step_count(), i);
  }
  ASSERT_EQ(opt.first_moments().size(), ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) EXPECT_EQ(opt.first_moments()[i].size(), ps.entries()[i].var.size());
}

TEST(Adam, MissingGradientIsUsageError) {
  auto ps = small_set();
  d::Adam<float> opt(ps, {});
  EXPECT_THROW(opt.step(), mail::UsageError);
}

TEST(ParamSet, SharedLeavesSeeFreezeAndWrites) {
  auto a = small_set();
  d::ParamSet<float> b;
  b.add_existing("shared", a.get("enc.w"), "encoder");
  a.freeze("encoder");
  EXPECT_TRUE(b.is_frozen("shared"));
  a.get("enc.w").value()[0] = 42.0f;
  EXPECT_EQ(b.get("shared").value()[0], 42.0f);
  EXPECT_THROW(b.add("shared", TF::scalar(0.0f)), mail::ConfigError);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  auto ps = small_set();
  const auto bytes = d::encode_checkpoint(ps);
  EXPECT_EQ(bytes.substr(0, 8), "MAILPARM");
  auto other = small_set();
  for (const auto& e : other.entries()) {
    auto v = e.var;
    for (auto& x : v.value().data()) x = 0.0f;
  }
  d::assign_checkpoint(other, d::decode_checkpoint(bytes));
  EXPECT_EQ(d::encode_checkpoint(other), bytes);

  const auto path = std::filesystem::temp_directory_path() / "mail_ckpt_test.mailparm";
  d::save_checkpoint(ps, path);
  auto loaded = small_set();
  d::load_checkpoint(loaded, path);
  EXPECT_EQ(d::encode_checkpoint(loaded), bytes);
  std::filesystem::remove(path);
}

TEST(Checkpoint, DoublePrecisionRoundTrip) {
  d::ParamSet<double> ps;
  ps.add("w", d::Tensor<double>({2}, {0.1, -1e-300}));
  const auto bytes = d::encode_checkpoint(ps);
  auto recs = d::decode_checkpoint(bytes);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(std::get<d::Tensor<double>>(recs[0].tensor).values(), ps.get("w").value().values());
}

TEST(Checkpoint, EveryTruncationIsFormatError) {
  const auto bytes = d::encode_checkpoint(small_set());
  std::size_t failures = 0;
  for (std::size_t cut = 0; cut < bytes.size(); ++cut) {
    try {
      auto recs = d::decode_checkpoint(std::string_view(bytes).substr(0, cut));
      auto ps = small_set();
      d::assign_checkpoint(ps, recs);
    } catch (const mail::FormatError&) {
      ++failures;  // includes cuts on a record boundary (missing parameter)
    }
  }
  EXPECT_EQ(failures, bytes.size());
}

TEST(Checkpoint, WrongMagicNamesExpectedMagic) {
  auto bytes = d::encode_checkpoint(small_set());
  bytes[0] = 'X';
  try {
    d::decode_checkpoint(bytes);
    FAIL() << "expected FormatError";
  } catch (const mail::FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("MAILPARM"), std::string::npos);
  }
}

TEST(Checkpoint, CorruptDtypeAndShapeMismatchRejected) {
  auto bytes = d::encode_checkpoint(small_set());
  auto bad = bytes;
  bad[8 + 4 + 4 + 5] = 9;  // dtype tag of the first record
  EXPECT_THROW(d::decode_checkpoint(bad), mail::FormatError);

  d::ParamSet<float> other;
  other.add("enc.w", TF({3, 2}));
  EXPECT_THROW(d::assign_checkpoint(other, d::decode_checkpoint(bytes)), mail::FormatError);
}

TEST(Checkpoint, UnexpectedOrRepeatedRecordsRejected) {
  auto recs = d::decode_checkpoint(d::encode_checkpoint(small_set()));
  auto extra = recs;
  extra.push_back(recs.front());
  auto ps = small_set();
  EXPECT_THROW(d::assign_checkpoint(ps, extra), mail::FormatError);
  extra.back().name = "not.there";
  EXPECT_THROW(d::assign_checkpoint(ps, extra), mail::FormatError);
}
