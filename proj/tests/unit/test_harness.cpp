#include <gtest/gtest.h>

#include <filesystem>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mail/core/binary_io.hpp"
#include "mail/core/error.hpp"
#include "mail/core/hash.hpp"
#include "mail/harness/experiment.hpp"
#include "mail/harness/exports.hpp"
#include "mail/harness/manifest.hpp"
#include "mail/harness/pipeline.hpp"
#include "mail/train/evaluate.hpp"

using namespace mail;
using namespace mail::harness;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("mail_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

train::TrainConfig tiny(train::TrainConfig cfg) {
  cfg.total_steps = 1024;
  cfg.rollout_len = 512;
  cfg.minibatch = 128;
  cfg.disc_minibatch = 128;
  cfg.eval_episodes = 4;
  cfg.final_eval_episodes = 8;
  return cfg;
}

}  // namespace

TEST(Experiment, EveryPresetRoundTrips) {
  for (const auto& p : presets()) {
    ExperimentConfig cfg;
    cfg.preset = p.name;
    cfg.train = p.config;
    cfg.demos = "d.maildemo";
    cfg.bc_dir = "bc";
    cfg.train.seed = 17;
    EXPECT_EQ(from_json(to_json(cfg)), cfg) << p.name;
  }
}

TEST(Experiment, StrictParsing) {
  const auto good = nlohmann::json::parse(to_json(ExperimentConfig{}));
  auto extra = good;
  extra["bogus"] = 1;
  EXPECT_THROW(from_json(extra.dump()), ConfigError);
  auto inner = good;
  inner["train"]["gama"] = 0.9;
  EXPECT_THROW(from_json(inner.dump()), ConfigError);
  auto wrong_type = good;
  wrong_type["train"]["gamma"] = "high";
  EXPECT_THROW(from_json(wrong_type.dump()), ConfigError);
  auto no_schema = good;
  no_schema.erase("schema");
  EXPECT_THROW(from_json(no_schema.dump()), ConfigError);
  auto bad_scheme = good;
  bad_scheme["train"]["reward"] = "sqrt";
  EXPECT_THROW(from_json(bad_scheme.dump()), ConfigError);
  auto bad_range = good;
  bad_range["train"]["gamma"] = 1.5;
  EXPECT_THROW(from_json(bad_range.dump()), ConfigError);
  EXPECT_THROW(from_json("{not json"), ConfigError);
}

TEST(Experiment, PresetNames) {
  const std::vector<std::string> expected{"GAIL",    "VAIL", "GAIL_LS",    "VAIL_LS", "GAIL_GE",
                                          "MAIL",    "MAIL+VDB", "DI-GAIL_GE", "DI-MAIL", "DI-MAIL+VDB"};
  EXPECT_EQ(main_names(), expected);
  const auto& mail = find_preset("MAIL").config;
  EXPECT_EQ(mail.global_encoder, train::GlobalEncoder::LoadFix);
  EXPECT_EQ(mail.reward, train::RewardScheme::LogShift);
  EXPECT_FALSE(mail.vdb);
  EXPECT_FALSE(mail.di);
  const auto& gail = find_preset("GAIL").config;
  EXPECT_EQ(gail.global_encoder, train::GlobalEncoder::None);
  EXPECT_EQ(gail.reward, train::RewardScheme::Log);
  EXPECT_TRUE(find_preset("DI-MAIL+VDB").config.di);
  EXPECT_TRUE(find_preset("DI-MAIL+VDB").config.vdb);
  EXPECT_EQ(find_preset("MAIL/tan").config.reward, train::RewardScheme::Tan);
  EXPECT_EQ(find_preset("MAIL/random_train").config.global_encoder, train::GlobalEncoder::RandomTrain);
  try {
    find_preset("NOPE");
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("DI-MAIL"), std::string::npos);
  }
}

TEST(Exports, EmbeddingsShapeAndDeterminism) {
  Rng rng(3);
  models::Encoder enc(rng);
  // 1500 draws over ~6400 reachable states make repeated states certain in practice.
  const auto csv = export_embeddings(enc, 1500, 9);
  EXPECT_EQ(csv, export_embeddings(enc, 1500, 9));
  const auto rows = parse_csv(csv);
  ASSERT_EQ(rows.size(), 1501u);
  std::size_t repeats = 0;
  EXPECT_EQ(rows[0].size(), kEmbeddingMetaColumns + models::kFeatureDim);
  EXPECT_EQ(rows[0][0], "state_id");
  EXPECT_EQ(rows[0].back(), "f127");
  std::set<std::string> flags;
  std::map<std::string, std::vector<std::string>> by_state;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    ASSERT_EQ(rows[r].size(), rows[0].size());
    flags.insert(rows[r][1]);
    std::vector<std::string> feats(rows[r].begin() + kEmbeddingMetaColumns, rows[r].end());
    auto [it, fresh] = by_state.emplace(rows[r][0], feats);
    if (!fresh) {
      EXPECT_EQ(it->second, feats);
      ++repeats;
    }
  }
  EXPECT_EQ(flags, (std::set<std::string>{"0", "1"}));
  EXPECT_GT(repeats, 0u);
}

TEST(Exports, CodeStats) {
  Rng rng(4);
  auto enc = std::make_shared<models::Encoder>(rng);
  enc->set_frozen(true);
  train::FeatureSource src(enc);
  models::Actor di_actor(models::kNumCodes, rng);
  models::Posterior post(rng);
  const auto stats = export_code_stats(di_actor, post, src, 3, 11);
  ASSERT_EQ(stats.proportions.size(), models::kNumCodes);
  EXPECT_NEAR(std::accumulate(stats.proportions.begin(), stats.proportions.end(), 0.0), 1.0, 1e-12);
  const auto rows = parse_csv(stats.codes_csv);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"episode", "timestep", "code_id"}));
  std::size_t total = 0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const int c = std::stoi(rows[r][2]);
    EXPECT_GE(c, 0);
    EXPECT_LT(c, 4);
  }
  for (auto c : stats.counts) total += c;
  EXPECT_EQ(total, rows.size() - 1);
  EXPECT_EQ(parse_csv(stats.trajectories_csv).size(), rows.size());
  const auto j = nlohmann::json::parse(code_summary_json(stats));
  EXPECT_EQ(j["proportions"].size(), 4u);
  models::Actor plain(0, rng);
  EXPECT_THROW(export_code_stats(plain, post, src, 1, 1), ConfigError);
}

TEST(Manifest, HashesFiles) {
  const auto dir = temp_dir("manifest");
  write_file(dir / "out.txt", "hello");
  write_file(dir / "in.txt", "abc");
  EXPECT_EQ(file_hash(dir / "out.txt"), "b6fc4c620b67d95f953a5c1c1230aaab5db5a1b0");
  Manifest m;
  m.command = "test";
  m.seed = 5;
  write_manifest(dir, m, {dir / "in.txt"}, {"out.txt"});
  const auto j = nlohmann::json::parse(read_file(dir / files::kManifest));
  EXPECT_EQ(j["command"], "test");
  EXPECT_EQ(j["seed"], 5);
  EXPECT_EQ(j["outputs"]["out.txt"], file_hash(dir / "out.txt"));
  EXPECT_EQ(j["inputs"][(dir / "in.txt").string()], git_blob_hash("abc"));
  EXPECT_THROW(write_manifest(dir, m, {}, {"missing.txt"}), ConfigError);
}

TEST(Pipeline, MissingArtifactsNamePhase) {
  const auto dir = temp_dir("missing");
  try {
    load_bc_encoder(dir);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("phase 1"), std::string::npos);
  }
  try {
    load_posterior(dir);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("phase 2"), std::string::npos);
  }
  ExperimentConfig cfg;
  cfg.train = find_preset("MAIL").config;
  EXPECT_THROW(load_pretrained(cfg), ConfigError);
}

TEST(Pipeline, SavedRunReproducesPolicy) {
  for (const char* preset : {"GAIL", "MAIL", "DI-MAIL"}) {
    const auto dir = temp_dir(std::string("run_") + preset);
    ExperimentConfig cfg;
    cfg.preset = preset;
    cfg.train = tiny(find_preset(preset).config);
    Rng rng(1);
    train::Pretrained pre;
    auto enc = std::make_shared<models::Encoder>(rng);
    enc->set_frozen(true);
    pre.bc_encoder = enc;
    pre.posterior = std::make_shared<models::Posterior>(rng);
    const auto demos = demo::generate(300, 1);
    auto result = train::train(cfg.train, demos, pre);
    const auto written = save_run(dir, cfg, result);
    for (const auto& f : written) EXPECT_TRUE(fs::exists(dir / f)) << f;
    const auto run = load_run(dir);
    EXPECT_EQ(run.config, cfg);
    auto& ag = result.agent;
    const auto a = train::evaluate(*ag.actor, *ag.policy_features, 6, 42, ag.posterior.get(),
                                   ag.posterior_features.get());
    const auto b = train::evaluate(*run.actor, *run.features, 6, 42, run.posterior.get(), run.posterior_features.get());
    EXPECT_EQ(a.returns, b.returns) << preset;
    EXPECT_EQ(a.lengths, b.lengths) << preset;
  }
}
