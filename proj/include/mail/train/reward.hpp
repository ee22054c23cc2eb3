#pragma once

#include <array>
#include <string>
#include <string_view>

namespace mail::train {

enum class RewardScheme { Log, LogScaled, LogShift, Linear, Tan };

inline constexpr std::array<RewardScheme, 5> kRewardSchemes{RewardScheme::Log, RewardScheme::LogScaled,
                                                            RewardScheme::LogShift, RewardScheme::Linear,
                                                            RewardScheme::Tan};
inline constexpr double kRewardClamp = 1e-7;

std::string_view scheme_name(RewardScheme s);
/// Accepts the names printed by scheme_name; throws ConfigError otherwise.
RewardScheme parse_scheme(std::string_view name);

/// Reward from discriminator output d, clamped to [1e-7, 1-1e-7] first.
///   Log -ln d | LogScaled -ln(d)/10 | LogShift -ln(d+0.5) | Linear 0.5-d | Tan tan(0.5-d)
double compute_reward(RewardScheme s, double d);

}  // namespace mail::train
