#include "mail/models/feature_cache.hpp"

#include <algorithm>

namespace mail::models {

void FeatureCache::prefetch(const std::vector<nav::EnvState>& states) {
  std::vector<nav::EnvState> missing;
  std::vector<std::uint32_t> keys;
  for (const auto& s : states) {
    const auto k = nav::observation_key(s);
    if (table_.count(k) || std::find(keys.begin(), keys.end(), k) != keys.end()) continue;
    keys.push_back(k);
    missing.push_back(s);
    if (missing.size() == batch_) {
      const Tensor f = encoder_->encode_states(missing);
      for (std::size_t i = 0; i < missing.size(); ++i)
        table_[keys[i]].assign(f.data().begin() + i * kFeatureDim, f.data().begin() + (i + 1) * kFeatureDim);
      missing.clear();
      keys.clear();
    }
  }
  if (!missing.empty()) {
    const Tensor f = encoder_->encode_states(missing);
    for (std::size_t i = 0; i < missing.size(); ++i)
      table_[keys[i]].assign(f.data().begin() + i * kFeatureDim, f.data().begin() + (i + 1) * kFeatureDim);
  }
}

const std::vector<float>& FeatureCache::get(const nav::EnvState& state) {
  const auto k = nav::observation_key(state);
  auto it = table_.find(k);
  if (it != table_.end()) return it->second;
  prefetch({state});
  return table_.at(k);
}

Tensor FeatureCache::gather(const std::vector<nav::EnvState>& states) {
  prefetch(states);
  Tensor out({states.size(), kFeatureDim});
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto& f = table_.at(nav::observation_key(states[i]));
    std::copy(f.begin(), f.end(), out.data().begin() + i * kFeatureDim);
  }
  return out;
}

}  // namespace mail::models
