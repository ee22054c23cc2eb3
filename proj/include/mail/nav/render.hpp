#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mail/nav/env.hpp"

namespace mail::nav {

inline constexpr int kCellPixels = 4;
inline constexpr int kBorderPixels = 2;
inline constexpr int kImageSize = kGridSize * kCellPixels + 2 * kBorderPixels;  // 32
inline constexpr int kChannels = 4;
inline constexpr std::size_t kObservationSize = kChannels * kImageSize * kImageSize;

/// Channel-major [4][32][32] image with values in [0,1]. Channels 0-2 are
/// RGB (walls grey, agent red, key green, car blue, overlaps add); channel 3
/// is a constant plane holding the has_key flag. The key stays drawn after
/// pickup, so possession is visible only through channel 3.
using Observation = std::vector<float>;

Observation render(const EnvState& state);

/// Renders into a caller-provided buffer of kObservationSize floats.
void render_into(const EnvState& state, std::span<float> out);

/// Packs everything render depends on into one integer.
std::uint32_t observation_key(const EnvState& state);

/// Debug dump: 4096 comma-separated values, channel-major then row-major.
std::string observation_csv(const Observation& obs);

}  // namespace mail::nav
