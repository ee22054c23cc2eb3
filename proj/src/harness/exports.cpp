#include "mail/harness/exports.hpp"

#include <cstdio>
#include <nlohmann/json.hpp>

#include "mail/core/error.hpp"
#include "mail/core/rng.hpp"
#include "mail/train/evaluate.hpp"

namespace mail::harness {

std::string export_embeddings(const models::Encoder& encoder, std::size_t n_states, std::uint64_t seed) {
  if (n_states == 0) throw ConfigError("export_embeddings: n_states must be positive");
  const auto& layout = nav::GridLayout::four_rooms();
  Rng rng(seed);
  std::vector<nav::EnvState> states;
  for (std::size_t i = 0; i < n_states; ++i) {
    const bool held = i % 2 == 1;
    nav::Cell agent, key;
    do {
      agent = layout.open_cells()[rng.uniform_int(layout.open_cells().size())];
      key = layout.room_cells(nav::Room::TopLeft)[rng.uniform_int(9)];
    } while (!held && agent == key);
    const nav::Cell car = layout.room_cells(nav::Room::BottomRight)[rng.uniform_int(9)];
    states.push_back(nav::make_state(agent, key, car, held));
  }
  std::string out = "state_id,has_key,agent_cell,key_cell,car_cell";
  for (std::size_t j = 0; j < models::kFeatureDim; ++j) out += ",f" + std::to_string(j);
  out += '\n';
  models::FeatureCache cache(encoder);
  const auto feats = cache.gather(states);
  char buf[32];
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto& s = states[i];
    out += std::to_string(nav::observation_key(s)) + "," + (s.has_key ? "1" : "0") + "," +
           std::to_string(nav::cell_index(s.agent)) + "," + std::to_string(nav::cell_index(s.key)) + "," +
           std::to_string(nav::cell_index(s.car));
    for (std::size_t j = 0; j < models::kFeatureDim; ++j) {
      std::snprintf(buf, sizeof buf, ",%.9g", feats[i * models::kFeatureDim + j]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

CodeStats export_code_stats(const models::Actor& actor, const models::Posterior& posterior,
                            train::FeatureSource& features, std::size_t n_episodes, std::uint64_t seed) {
  if (!actor.di()) throw ConfigError("export_code_stats needs a DI-trained (code-conditioned) actor");
  CodeStats st;
  st.counts.assign(posterior.codes(), 0);
  st.codes_csv = "episode,timestep,code_id\n";
  st.trajectories_csv = "episode,timestep,agent_row,agent_col,has_key,action,code_id\n";
  // Lockstep evaluation interleaves episodes; collect rows per episode first.
  std::vector<std::vector<std::pair<std::string, std::string>>> rows(n_episodes);
  train::NetworkPolicy policy(actor, features, &posterior);
  const auto rep = train::evaluate(policy, n_episodes, seed,
                                   [&](std::size_t e, int t, const nav::EnvState& s, nav::Action a,
                                       std::optional<std::size_t> code) {
                                     const std::size_t c = code.value();
                                     ++st.counts.at(c);
                                     const std::string head = std::to_string(e) + "," + std::to_string(t);
                                     rows[e].emplace_back(
                                         head + "," + std::to_string(c) + "\n",
                                         head + "," + std::to_string(s.agent.row) + "," + std::to_string(s.agent.col) +
                                             "," + (s.has_key ? "1" : "0") + "," +
                                             std::to_string(static_cast<int>(a)) + "," + std::to_string(c) + "\n");
                                   });
  for (const auto& ep : rows)
    for (const auto& [c, t] : ep) {
      st.codes_csv += c;
      st.trajectories_csv += t;
    }
  std::size_t total = 0;
  for (auto c : st.counts) total += c;
  for (auto c : st.counts) st.proportions.push_back(static_cast<double>(c) / static_cast<double>(total));
  st.score_mean = rep.mean;
  return st;
}

std::string code_summary_json(const CodeStats& stats) {
  nlohmann::json j;
  j["codes"] = stats.proportions.size();
  j["counts"] = stats.counts;
  j["proportions"] = stats.proportions;
  std::size_t used = 0;
  for (double p : stats.proportions) used += p > 0.01;
  j["codes_used_above_1pct"] = used;
  j["score_mean"] = stats.score_mean;
  return j.dump(2) + "\n";
}

}  // namespace mail::harness
