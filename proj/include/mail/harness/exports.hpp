#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mail/models/networks.hpp"
#include "mail/train/features.hpp"

namespace mail::harness {

inline constexpr std::size_t kEmbeddingMetaColumns = 5;

/// CSV: state_id,has_key,agent_cell,key_cell,car_cell,f0..f127. Samples
/// n_states reachable states; even rows have has_key=0, odd rows 1.
/// state_id is the observation key, cells are row*7+col.
std::string export_embeddings(const models::Encoder& encoder, std::size_t n_states, std::uint64_t seed);

struct CodeStats {
  std::string codes_csv;         // episode,timestep,code_id
  std::string trajectories_csv;  // episode,timestep,agent_row,agent_col,has_key,action,code_id
  std::vector<double> proportions;  // per code, sums to 1
  std::vector<std::size_t> counts;
  double score_mean = 0.0;
};

/// Rolls the DI policy for n_episodes and records the code chosen at every
/// step. Throws ConfigError for a non-DI actor.
CodeStats export_code_stats(const models::Actor& actor, const models::Posterior& posterior,
                            train::FeatureSource& features, std::size_t n_episodes, std::uint64_t seed);

std::string code_summary_json(const CodeStats& stats);

}  // namespace mail::harness
