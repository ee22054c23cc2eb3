#include "mail/train/features.hpp"

namespace mail::train {

namespace ad = mail::diff;

Var FeatureSource::features(const std::vector<nav::EnvState>& states) {
  if (!trainable()) return Var::constant(cache_.gather(states));
  return encoder_->forward(Var::constant(models::render_batch(states)));
}

std::vector<std::array<float, models::kNumActions>> action_probs(const models::Actor& actor, const Tensor& features,
                                                                 const std::vector<std::size_t>* codes) {
  Var f = Var::constant(features);
  Var p;
  if (codes) {
    Var c = Var::constant(models::one_hot(*codes, actor.code_dim()));
    p = ad::softmax(actor.logits(f, &c));
  } else {
    p = ad::softmax(actor.logits(f));
  }
  std::vector<std::array<float, models::kNumActions>> out(features.dim(0));
  for (std::size_t r = 0; r < out.size(); ++r)
    std::copy_n(p.data().begin() + r * models::kNumActions, models::kNumActions, out[r].begin());
  return out;
}

std::vector<std::vector<float>> code_probs(const models::Posterior& posterior, const Tensor& features,
                                           const std::vector<std::optional<std::size_t>>& prev) {
  const std::size_t k = posterior.codes();
  Tensor prev_t({prev.size(), k});
  for (std::size_t r = 0; r < prev.size(); ++r)
    if (prev[r]) prev_t[r * k + *prev[r]] = 1.0f;
  Var p = ad::softmax(posterior.logits(Var::constant(features), Var::constant(std::move(prev_t))));
  std::vector<std::vector<float>> out(prev.size());
  for (std::size_t r = 0; r < out.size(); ++r) out[r].assign(p.data().begin() + r * k, p.data().begin() + (r + 1) * k);
  return out;
}

}  // namespace mail::train
