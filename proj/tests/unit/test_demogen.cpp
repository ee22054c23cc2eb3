#include <gtest/gtest.h>

#include <filesystem>

#include "mail/core/error.hpp"
#include "mail/demo/dataset.hpp"
#include "mail/demo/expert.hpp"

using namespace mail;
using namespace mail::nav;
using namespace mail::demo;

namespace {
const GridLayout& L() { return GridLayout::four_rooms(); }
}

TEST(ExpertAction, AdjacentKeyToTheRight) {
  EXPECT_EQ(expert_action(make_state({1, 0}, {1, 1}, {5, 5}, false)), Action::Right);
}

TEST(ExpertAction, TiesBreakUpBeforeLeft) {
  // (2,2) -> (1,1): Up and Left both shorten the path
  EXPECT_EQ(expert_action(make_state({2, 2}, {1, 1}, {5, 5}, false)), Action::Up);
}

TEST(ExpertAction, JustTakenKeyHeadsForCar) {
  const auto s = make_state({1, 1}, {1, 1}, {5, 5}, true);
  const Cell next = L().move(s.agent, expert_action(s));
  EXPECT_EQ(shortest_distance(next, s.car), shortest_distance(s.agent, s.car) - 1);
}

TEST(ExpertAction, ExhaustiveDistanceDecrease) {
  for (Cell a : L().open_cells())
    for (Cell k : L().room_cells(Room::TopLeft))
      for (Cell c : L().room_cells(Room::BottomRight))
        for (bool held : {false, true}) {
          if (!held && a == k) continue;
          if (held && a == c) continue;
          const auto s = make_state(a, k, c, held);
          const Cell goal = held ? c : k;
          const Cell next = L().move(a, expert_action(s));
          ASSERT_EQ(shortest_distance(next, goal), shortest_distance(a, goal) - 1);
        }
}

TEST(Generate, SinglePairYieldsOneWholeEpisode) {
  const auto ds = generate(1, 3);
  ASSERT_EQ(ds.episode_count(), 1u);
  const auto r = replay_episode(ds, 0);
  EXPECT_EQ(static_cast<std::size_t>(r.length), ds.count());
  EXPECT_TRUE(r.success);
}

TEST(Generate, DeterministicPerSeed) {
  const auto a = generate(10'000, 1), b = generate(10'000, 1);
  EXPECT_EQ(a, b);
  EXPECT_EQ(encode_dataset(a), encode_dataset(b));
  EXPECT_GE(a.count(), 10'000u);
  EXPECT_NE(encode_dataset(a), encode_dataset(generate(10'000, 2)));
}

TEST(Generate, EveryEpisodeReplaysToReturnOne) {
  const auto ds = generate(5'000, 4);
  std::size_t total = 0;
  for (std::size_t e = 0; e < ds.episode_count(); ++e) {
    const auto r = replay_episode(ds, e);
    EXPECT_TRUE(r.states_match);
    EXPECT_TRUE(r.success);
    EXPECT_EQ(r.total_return, 1.0);
    EXPECT_EQ(r.length, r.d1 + r.d2);
    total += static_cast<std::size_t>(r.length);
  }
  EXPECT_EQ(total, ds.count());
}

TEST(Dataset, RoundTripThroughFile) {
  const auto ds = generate(2'000, 9);
  const auto path = std::filesystem::temp_directory_path() / "mail_test_demo.bin";
  save_dataset(ds, path);
  EXPECT_EQ(load_dataset(path), ds);
  std::filesystem::remove(path);
}

TEST(Dataset, EveryTruncationIsAFormatError) {
  const auto bytes = encode_dataset(generate(50, 2));
  for (std::size_t n = 0; n < bytes.size(); ++n) {
    EXPECT_THROW(decode_dataset(std::string_view(bytes).substr(0, n)), FormatError) << "length " << n;
  }
}

TEST(Dataset, WrongMagicNamesExpectedMagic) {
  auto bytes = encode_dataset(generate(10, 2));
  bytes[0] = 'X';
  try {
    decode_dataset(bytes);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("MAILDEMO"), std::string::npos);
    EXPECT_EQ(e.offset(), 0u);
  }
}

TEST(Dataset, CorruptRecordReportsOffset) {
  auto bytes = encode_dataset(generate(10, 2));
  bytes[bytes.size() - 1] = 9;  // action out of range
  try {
    decode_dataset(bytes);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), bytes.size() - 8);
  }
}
