#pragma once

#include "mail/nav/env.hpp"

namespace mail::demo {

/// First move of a shortest path to the current subgoal (key, then car).
/// Ties break in the fixed order Up < Down < Left < Right.
nav::Action expert_action(const nav::EnvState& state);

}  // namespace mail::demo
