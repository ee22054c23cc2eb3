#pragma once

#include <vector>

namespace mail::train {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;  // advantages + values, before normalization
};

/// GAE(lambda) over one environment's transitions. dones[t] marks an
/// episode ending after step t; `bootstrap` is V of the state after the last
/// step and is ignored when that step ended an episode.
GaeResult gae_advantages(const std::vector<double>& rewards, const std::vector<double>& values,
                         const std::vector<bool>& dones, double bootstrap, double gamma, double lambda);

/// In-place shift/scale to mean 0, std 1 (population std, floored at 1e-8).
void normalize(std::vector<double>& v);

/// min(r*A, clip(r, 1-eps, 1+eps)*A).
double clipped_surrogate(double ratio, double advantage, double clip);

}  // namespace mail::train
