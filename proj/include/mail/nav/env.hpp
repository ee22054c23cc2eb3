#pragma once

#include <cstdint>

#include "mail/nav/grid.hpp"

namespace mail::nav {

inline constexpr int kEpisodeCap = 100;

/// Logical state of the key-then-car task. d1 and d2 are the BFS distances
/// spawn->key and key->car, fixed at reset.
struct EnvState {
  Cell agent;
  Cell key;
  Cell car;
  bool has_key = false;
  int t = 0;
  int d1 = 0;
  int d2 = 0;

  friend bool operator==(const EnvState&, const EnvState&) = default;
};

inline bool is_success(const EnvState& s) { return s.has_key && s.agent == s.car; }
inline bool is_done(const EnvState& s) { return is_success(s) || s.t >= kEpisodeCap; }

/// Agent uniform over open cells, key uniform over the top-left room, car
/// uniform over the bottom-right room. Spawning on the key picks it up.
EnvState reset(std::uint64_t seed);

/// Builds a t=0 state with distances filled in; used to replay stored demos.
EnvState make_state(Cell agent, Cell key, Cell car, bool has_key);

struct StepResult {
  EnvState state;
  double reward = 0.0;
  bool done = false;
};

/// -1 per step, +d1 on first reaching the key, +d2+1 on reaching the car
/// with the key (terminal). Episodes also end at the step cap.
StepResult step(const EnvState& state, Action action);

}  // namespace mail::nav
