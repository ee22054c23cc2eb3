#pragma once

// File-level glue between the phases: fixed artifact names, save/load of
// pre-trained networks and trained runs.

#include <filesystem>
#include <memory>
#include <string>

#include "mail/harness/experiment.hpp"
#include "mail/train/pretrain.hpp"
#include "mail/train/trainer.hpp"

namespace mail::harness {

namespace files {
inline constexpr const char* kDemos = "demos.maildemo";
inline constexpr const char* kBcEncoder = "bc_encoder.mailparm";
inline constexpr const char* kBcActor = "bc_actor.mailparm";
inline constexpr const char* kBcSummary = "bc_summary.json";
inline constexpr const char* kPosterior = "posterior.mailparm";
inline constexpr const char* kPosteriorActor = "posterior_actor.mailparm";
inline constexpr const char* kPosteriorSummary = "posterior_summary.json";
inline constexpr const char* kLinkage = "linkage.json";
inline constexpr const char* kExperiment = "experiment.json";
inline constexpr const char* kReport = "report.csv";
inline constexpr const char* kSummary = "summary.json";
inline constexpr const char* kEmbeddings = "embeddings.csv";
inline constexpr const char* kCodes = "codes.csv";
inline constexpr const char* kCodesSummary = "codes_summary.json";
inline constexpr const char* kTrajectories = "trajectories.csv";
inline constexpr const char* kEval = "eval.json";
inline constexpr const char* kManifest = "manifest.json";
}  // namespace files

std::vector<std::string> save_bc(const std::filesystem::path& dir, const train::BcResult& bc);
/// Frozen encoder from dir/bc_encoder.mailparm; ConfigError names the
/// phase-1 artifact when it is missing.
std::shared_ptr<models::Encoder> load_bc_encoder(const std::filesystem::path& dir);

std::vector<std::string> save_posterior(const std::filesystem::path& dir, const train::PosteriorResult& post);
std::shared_ptr<models::Posterior> load_posterior(const std::filesystem::path& dir);

/// Loads the phase artifacts the config needs (bc_dir, posterior_dir).
train::Pretrained load_pretrained(const ExperimentConfig& cfg);

/// Writes every network checkpoint, linkage.json, experiment.json,
/// report.csv and summary.json. Returns the written file names.
std::vector<std::string> save_run(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                                  train::TrainResult& result);

/// Policy-side networks of a saved run, ready for evaluation and exports.
struct LoadedRun {
  ExperimentConfig config;
  std::shared_ptr<train::FeatureSource> features;
  std::shared_ptr<train::FeatureSource> posterior_features;
  std::unique_ptr<models::Actor> actor;
  std::shared_ptr<models::Posterior> posterior;
};

LoadedRun load_run(const std::filesystem::path& dir);

}  // namespace mail::harness
