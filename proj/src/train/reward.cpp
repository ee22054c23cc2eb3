#include "mail/train/reward.hpp"

#include <algorithm>
#include <cmath>

#include "mail/core/error.hpp"

namespace mail::train {

std::string_view scheme_name(RewardScheme s) {
  switch (s) {
    case RewardScheme::Log:
      return "log";
    case RewardScheme::LogScaled:
      return "log_scaled";
    case RewardScheme::LogShift:
      return "log_shift";
    case RewardScheme::Linear:
      return "linear";
    case RewardScheme::Tan:
      return "tan";
  }
  return "?";
}

RewardScheme parse_scheme(std::string_view name) {
  for (auto s : kRewardSchemes)
    if (scheme_name(s) == name) return s;
  throw ConfigError("unknown reward scheme '" + std::string(name) +
                    "' (expected log, log_scaled, log_shift, linear or tan)");
}

double compute_reward(RewardScheme s, double d) {
  d = std::clamp(d, kRewardClamp, 1.0 - kRewardClamp);
  switch (s) {
    case RewardScheme::Log:
      return -std::log(d);
    case RewardScheme::LogScaled:
      return -std::log(d) / 10.0;
    case RewardScheme::LogShift:
      return -std::log(d + 0.5);
    case RewardScheme::Linear:
      return 0.5 - d;
    case RewardScheme::Tan:
      return std::tan(0.5 - d);
  }
  return 0.0;
}

}  // namespace mail::train
