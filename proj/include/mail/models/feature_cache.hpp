#pragma once

#include <unordered_map>
#include <vector>

#include "mail/models/networks.hpp"

namespace mail::models {

/// Memo of encoder features keyed by observation_key. Valid only while the
/// encoder weights are unchanged; call clear() after any update.
class FeatureCache {
 public:
  explicit FeatureCache(const Encoder& encoder, std::size_t batch = 256) : encoder_(&encoder), batch_(batch) {}

  /// Computes every missing feature in batches.
  void prefetch(const std::vector<nav::EnvState>& states);
  const std::vector<float>& get(const nav::EnvState& state);
  /// [n,128] rows in the order of `states`.
  Tensor gather(const std::vector<nav::EnvState>& states);

  void clear() { table_.clear(); }
  std::size_t size() const noexcept { return table_.size(); }

 private:
  const Encoder* encoder_;
  std::size_t batch_;
  std::unordered_map<std::uint32_t, std::vector<float>> table_;
};

}  // namespace mail::models
