#pragma once

// Expert demonstration file:
//   "MAILDEMO" | version u32 | seed u64 | record count u64 | episode count u64 |
//   episode start offsets u64[episodes] | records (8 bytes each)
// Record bytes: agent row, agent col, key row, key col, car row, car col,
// has_key, action. Little-endian throughout.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mail/nav/env.hpp"

namespace mail::demo {

inline constexpr std::string_view kDatasetMagic = "MAILDEMO";
inline constexpr std::uint32_t kDatasetVersion = 1;
inline constexpr std::size_t kDefaultPairs = 100'000;

struct DemoRecord {
  nav::Cell agent;
  nav::Cell key;
  nav::Cell car;
  bool has_key = false;
  nav::Action action = nav::Action::Up;

  friend bool operator==(const DemoRecord&, const DemoRecord&) = default;

  /// t=0 state with the same rendering inputs.
  nav::EnvState state() const { return nav::make_state(agent, key, car, has_key); }
};

struct DemoDataset {
  std::uint64_t seed = 0;
  std::vector<DemoRecord> records;
  std::vector<std::uint64_t> episode_offsets;  // start index of each episode

  std::size_t count() const noexcept { return records.size(); }
  std::size_t episode_count() const noexcept { return episode_offsets.size(); }
  /// [begin, end) record range of episode `e`.
  std::pair<std::size_t, std::size_t> episode(std::size_t e) const;

  friend bool operator==(const DemoDataset&, const DemoDataset&) = default;
};

/// Rolls whole expert episodes from seeded resets until at least `n_pairs`
/// records exist. Episode e starts from nav::reset(derive_seed(seed, e)).
DemoDataset generate(std::size_t n_pairs, std::uint64_t seed);

struct ReplayResult {
  double total_return = 0.0;
  int length = 0;
  bool success = false;
  bool states_match = true;  // every stored state equals the replayed one
  int d1 = 0;
  int d2 = 0;
};

/// Re-executes the stored actions of episode `e` through the environment.
ReplayResult replay_episode(const DemoDataset& ds, std::size_t e);

std::string encode_dataset(const DemoDataset& ds);
DemoDataset decode_dataset(std::string_view bytes);
void save_dataset(const DemoDataset& ds, const std::filesystem::path& path);
DemoDataset load_dataset(const std::filesystem::path& path);

}  // namespace mail::demo
