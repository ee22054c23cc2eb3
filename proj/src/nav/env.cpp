#include "mail/nav/env.hpp"

#include "mail/core/error.hpp"
#include "mail/core/rng.hpp"

namespace mail::nav {

EnvState make_state(Cell agent, Cell key, Cell car, bool has_key) {
  const auto& layout = GridLayout::four_rooms();
  EnvState s;
  s.agent = agent;
  s.key = key;
  s.car = car;
  s.has_key = has_key || agent == key;
  s.t = 0;
  s.d1 = s.has_key ? 0 : layout.distance(agent, key);
  s.d2 = layout.distance(key, car);
  return s;
}

EnvState reset(std::uint64_t seed) {
  const auto& layout = GridLayout::four_rooms();
  Rng rng(seed);
  const auto& open = layout.open_cells();
  const auto& keys = layout.room_cells(Room::TopLeft);
  const auto& cars = layout.room_cells(Room::BottomRight);
  const Cell agent = open[rng.uniform_int(open.size())];
  const Cell key = keys[rng.uniform_int(keys.size())];
  const Cell car = cars[rng.uniform_int(cars.size())];
  return make_state(agent, key, car, false);
}

StepResult step(const EnvState& state, Action action) {
  if (is_done(state)) throw UsageError("step called on a finished episode");
  StepResult r;
  r.state = state;
  EnvState& s = r.state;
  s.agent = GridLayout::four_rooms().move(state.agent, action);
  s.t = state.t + 1;
  r.reward = -1.0;
  if (!s.has_key && s.agent == s.key) {
    s.has_key = true;
    r.reward += s.d1;
  }
  if (is_success(s)) r.reward += s.d2 + 1;
  r.done = is_done(s);
  return r;
}

}  // namespace mail::nav
