#pragma once

// Encoder, actor, critic, discriminator (with optional VDB) and posterior.
// All networks are float and hold their weights in a named ParamSet.

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mail/core/rng.hpp"
#include "mail/diff/autodiff.hpp"
#include "mail/diff/params.hpp"
#include "mail/nav/render.hpp"

namespace mail::models {

using Var = diff::Var<float>;
using Tensor = diff::Tensor<float>;
using Params = diff::ParamSet<float>;

inline constexpr std::size_t kFeatureDim = 128;
inline constexpr std::size_t kNumActions = nav::kNumActions;
inline constexpr std::size_t kNumCodes = 4;
inline constexpr std::size_t kHidden = 64;
inline constexpr std::size_t kVdbDim = 32;
inline constexpr float kDiscClamp = 1e-7f;

/// Glorot-style scaled uniform, the default for hidden dense layers.
Tensor dense_init(std::size_t in, std::size_t out, Rng& rng);
/// He-style uniform for 3x3 kernels.
Tensor conv_init(std::size_t out_channels, std::size_t in_channels, Rng& rng);

/// Rows of one-hot vectors, [n, width].
Tensor one_hot(const std::vector<std::size_t>& index, std::size_t width);
/// Stacked renders, [n, 4, 32, 32].
Tensor render_batch(const std::vector<nav::EnvState>& states);

class Encoder {
 public:
  explicit Encoder(Rng& rng, const std::string& prefix = "encoder");

  /// obs [n,4,32,32] -> features [n,128].
  Var forward(const Var& obs) const;
  std::vector<float> encode(const nav::Observation& obs) const;
  Tensor encode_states(const std::vector<nav::EnvState>& states) const;

  void set_frozen(bool frozen) { params_.freeze({}, frozen); }
  bool frozen() const { return params_.all_frozen(); }
  Params& params() noexcept { return params_; }
  const Params& params() const noexcept { return params_; }

 private:
  Params params_;
  Var c1w_, c1b_, c2w_, c2b_, fw_, fb_;
};

/// Linear policy head over the feature, plus a one-hot code in DI mode.
/// Zero-initialized, so the starting policy is uniform.
class Actor {
 public:
  Actor(std::size_t code_dim, Rng& rng, const std::string& prefix = "actor");

  Var logits(const Var& features, const Var* codes = nullptr) const;
  std::array<float, kNumActions> probs(const std::vector<float>& feature, std::optional<std::size_t> code = {}) const;

  std::size_t code_dim() const noexcept { return code_dim_; }
  bool di() const noexcept { return code_dim_ > 0; }
  Params& params() noexcept { return params_; }
  const Params& params() const noexcept { return params_; }

 private:
  std::size_t code_dim_;
  Params params_;
  Var w_, b_;
};

class Critic {
 public:
  explicit Critic(Rng& rng, const std::string& prefix = "critic");
  /// features [n,128] -> values [n].
  Var value(const Var& features) const;
  Params& params() noexcept { return params_; }
  const Params& params() const noexcept { return params_; }

 private:
  Params params_;
  Var w1_, b1_, w2_, b2_;
};

struct DiscOutput {
  Var logits;  // [n]
  Var kl;      // [n], VDB only
};

class Discriminator {
 public:
  Discriminator(bool vdb, Rng& rng, const std::string& prefix = "disc");

  /// With VDB, `noise` draws z = mu + sigma * eps; without it z = mu.
  DiscOutput forward(const Var& features, const std::vector<std::size_t>& actions, Rng* noise = nullptr) const;
  /// d in (0,1) and the per-pair KL (0 without VDB).
  std::pair<float, float> discriminate(const std::vector<float>& feature, std::size_t action) const;

  bool vdb() const noexcept { return vdb_; }
  Params& params() noexcept { return params_; }
  const Params& params() const noexcept { return params_; }

 private:
  bool vdb_;
  Params params_;
  Var ew_, eb_;  // VDB: 132 -> 2*32
  Var w1_, b1_, w2_, b2_;
};

/// q(c_t | s_t, c_{t-1}). The previous code is one-hot; all zeros at t=0.
class Posterior {
 public:
  explicit Posterior(Rng& rng, std::size_t codes = kNumCodes, const std::string& prefix = "posterior");
  Var logits(const Var& features, const Var& prev_codes) const;
  std::vector<float> probs(const std::vector<float>& feature, std::optional<std::size_t> prev_code) const;

  std::size_t codes() const noexcept { return codes_; }
  Params& params() noexcept { return params_; }
  const Params& params() const noexcept { return params_; }

 private:
  std::size_t codes_;
  Params params_;
  Var w_, b_;
};

float sigmoid_clamped(float logit);

}  // namespace mail::models
