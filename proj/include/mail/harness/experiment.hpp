#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mail/train/config.hpp"

namespace mail::harness {

inline constexpr int kSchema = 1;

/// A complete, re-runnable experiment description.
struct ExperimentConfig {
  std::string preset;  // may be empty for hand-written configs
  train::TrainConfig train;
  std::string demos;           // demonstration file
  std::string bc_dir;          // directory holding bc_encoder.mailparm
  std::string posterior_dir;   // directory holding posterior.mailparm
  std::string out_dir;
  std::size_t demo_pairs = 100'000;
  std::uint64_t demo_seed = 1;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// JSON text with "schema": 1. Every TrainConfig field is written.
std::string to_json(const ExperimentConfig& cfg);
/// Rejects unknown keys, wrong types and a missing or different schema.
/// Fields not present keep their defaults.
ExperimentConfig from_json(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

struct Preset {
  std::string name;
  std::string group;  // "main", "reward" or "encoder"
  std::string description;
  train::TrainConfig config;
};

/// The ten variant rows, the five reward schemes under MAIL, and the
/// encoder-strategy grid.
const std::vector<Preset>& presets();
/// Throws UsageError listing valid names.
const Preset& find_preset(std::string_view name);
std::vector<std::string> main_names();

}  // namespace mail::harness
