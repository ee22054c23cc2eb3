#pragma once

#include <memory>
#include <vector>

#include "mail/demo/dataset.hpp"
#include "mail/models/networks.hpp"
#include "mail/train/config.hpp"

namespace mail::train {

struct EpisodeSplit {
  std::vector<std::size_t> train;    // record indices
  std::vector<std::size_t> holdout;  // record indices
};

/// Shuffles episodes with `seed` and holds out the last `fraction` of them
/// (at least one). A single-episode dataset is used for both sides.
EpisodeSplit split_by_episode(const demo::DemoDataset& ds, double fraction, std::uint64_t seed);

struct BcResult {
  std::shared_ptr<models::Encoder> encoder;
  std::unique_ptr<models::Actor> actor;
  double initial_train_loss = 0.0;
  double final_train_loss = 0.0;
  double holdout_accuracy = 0.0;
  std::vector<double> epoch_loss;              // mean minibatch loss per epoch
  std::vector<double> epoch_holdout_accuracy;  // after each epoch
  std::size_t train_pairs = 0;
  std::size_t holdout_pairs = 0;
};

/// Behaviour cloning of encoder + linear classifier on expert pairs:
/// minimizes -log pi(a|s) with Adam(bc_lr) for bc_epochs epochs.
BcResult bc_pretrain(const demo::DemoDataset& demos, const TrainConfig& cfg, std::uint64_t seed);

/// Mean cross-entropy and accuracy of encoder+actor over the given records.
std::pair<double, double> bc_loss_accuracy(const models::Encoder& encoder, const models::Actor& actor,
                                           const demo::DemoDataset& demos, const std::vector<std::size_t>& index);

struct PosteriorResult {
  std::shared_ptr<models::Posterior> posterior;
  std::unique_ptr<models::Actor> actor;  // code-conditioned
  std::vector<double> epoch_loss;        // reconstruction + kl_weight * KL
  std::vector<double> epoch_reconstruction;
  std::vector<double> epoch_kl;
};

/// Learns q(c_t | s_t, c_{t-1}) and a code-conditioned actor on expert
/// episodes. Codes are drawn with straight-through Gumbel-softmax; the
/// previous code enters as a detached one-hot (zeros at t=0).
PosteriorResult posterior_pretrain(const demo::DemoDataset& demos, std::shared_ptr<const models::Encoder> encoder,
                                   const TrainConfig& cfg, std::uint64_t seed);

}  // namespace mail::train
