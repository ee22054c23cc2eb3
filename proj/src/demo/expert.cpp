#include "mail/demo/expert.hpp"

#include "mail/core/error.hpp"

namespace mail::demo {

nav::Action expert_action(const nav::EnvState& state) {
  if (nav::is_done(state)) throw UsageError("expert_action on a finished episode");
  const auto& layout = nav::GridLayout::four_rooms();
  const nav::Cell goal = state.has_key ? state.car : state.key;
  const int here = layout.distance(state.agent, goal);
  for (nav::Action a : nav::kActions) {
    if (layout.distance(layout.move(state.agent, a), goal) == here - 1) return a;
  }
  throw ConfigError("expert_action: no distance-reducing move (agent already on subgoal?)");
}

}  // namespace mail::demo
