#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "mail/models/feature_cache.hpp"
#include "mail/models/networks.hpp"

namespace mail::train {

using models::Tensor;
using models::Var;

/// Features for a batch of states from one encoder. A frozen encoder is read
/// through a persistent cache; a trainable one is re-run with gradient
/// tracking, and its inference memo must be invalidated after each update.
class FeatureSource {
 public:
  explicit FeatureSource(std::shared_ptr<models::Encoder> encoder)
      : encoder_(std::move(encoder)), cache_(*encoder_) {}

  bool trainable() const { return !encoder_->frozen(); }
  /// Differentiable features (constant when the encoder is frozen).
  Var features(const std::vector<nav::EnvState>& states);
  /// Inference-only features, memoized.
  Tensor infer(const std::vector<nav::EnvState>& states) { return cache_.gather(states); }
  void invalidate() {
    if (trainable()) cache_.clear();
  }

  models::Encoder& encoder() { return *encoder_; }
  const std::shared_ptr<models::Encoder>& encoder_ptr() const { return encoder_; }

 private:
  std::shared_ptr<models::Encoder> encoder_;
  models::FeatureCache cache_;
};

/// Rows of softmax(logits) for an inference batch.
std::vector<std::array<float, models::kNumActions>> action_probs(const models::Actor& actor, const Tensor& features,
                                                                 const std::vector<std::size_t>* codes = nullptr);

/// q(c | s, prev) rows; std::nullopt marks the first step of an episode.
std::vector<std::vector<float>> code_probs(const models::Posterior& posterior, const Tensor& features,
                                           const std::vector<std::optional<std::size_t>>& prev);

}  // namespace mail::train
