#include "mail/harness/pipeline.hpp"

#include <map>

#include <nlohmann/json.hpp>

#include "mail/core/binary_io.hpp"
#include "mail/core/error.hpp"
#include "mail/diff/checkpoint.hpp"
#include "mail/models/linkage.hpp"

namespace mail::harness {

namespace fs = std::filesystem;

namespace {

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::exists(p)) throw ConfigError("missing " + what + " (" + p.string() + ")");
}

std::string name_of(const models::Params& p) {
  const auto& n = p.entries().front().name;
  return n.substr(0, n.find('.'));
}

}  // namespace

std::vector<std::string> save_bc(const fs::path& dir, const train::BcResult& bc) {
  diff::save_checkpoint(bc.encoder->params(), dir / files::kBcEncoder);
  diff::save_checkpoint(bc.actor->params(), dir / files::kBcActor);
  nlohmann::json j;
  j["holdout_accuracy"] = bc.holdout_accuracy;
  j["initial_train_loss"] = bc.initial_train_loss;
  j["final_train_loss"] = bc.final_train_loss;
  j["epoch_loss"] = bc.epoch_loss;
  j["epoch_holdout_accuracy"] = bc.epoch_holdout_accuracy;
  j["train_pairs"] = bc.train_pairs;
  j["holdout_pairs"] = bc.holdout_pairs;
  write_file(dir / files::kBcSummary, j.dump(2) + "\n");
  return {files::kBcEncoder, files::kBcActor, files::kBcSummary};
}

std::shared_ptr<models::Encoder> load_bc_encoder(const fs::path& dir) {
  const auto path = dir / files::kBcEncoder;
  require_file(path, "BC encoder checkpoint: run phase 1 (train-bc) first");
  Rng rng(0);
  auto enc = std::make_shared<models::Encoder>(rng);
  diff::load_checkpoint(enc->params(), path);
  enc->set_frozen(true);
  return enc;
}

std::vector<std::string> save_posterior(const fs::path& dir, const train::PosteriorResult& post) {
  diff::save_checkpoint(post.posterior->params(), dir / files::kPosterior);
  diff::save_checkpoint(post.actor->params(), dir / files::kPosteriorActor);
  nlohmann::json j;
  j["epoch_loss"] = post.epoch_loss;
  j["epoch_reconstruction"] = post.epoch_reconstruction;
  j["epoch_kl"] = post.epoch_kl;
  write_file(dir / files::kPosteriorSummary, j.dump(2) + "\n");
  return {files::kPosterior, files::kPosteriorActor, files::kPosteriorSummary};
}

std::shared_ptr<models::Posterior> load_posterior(const fs::path& dir) {
  const auto path = dir / files::kPosterior;
  require_file(path, "posterior checkpoint: run phase 2 (train-posterior) first");
  Rng rng(0);
  auto post = std::make_shared<models::Posterior>(rng);
  diff::load_checkpoint(post->params(), path);
  post->params().freeze();
  return post;
}

train::Pretrained load_pretrained(const ExperimentConfig& cfg) {
  train::Pretrained pre;
  if (train::loads_bc(cfg.train.global_encoder) || cfg.train.di) {
    if (cfg.bc_dir.empty()) throw ConfigError("missing BC encoder checkpoint: run phase 1 (train-bc) and pass --bc");
    pre.bc_encoder = load_bc_encoder(cfg.bc_dir);
  }
  if (cfg.train.di) {
    if (cfg.posterior_dir.empty())
      throw ConfigError("missing posterior checkpoint: run phase 2 (train-posterior) and pass --posterior");
    pre.posterior = load_posterior(cfg.posterior_dir);
  }
  return pre;
}

std::vector<std::string> save_run(const fs::path& dir, const ExperimentConfig& cfg, train::TrainResult& result) {
  auto& ag = result.agent;
  std::vector<models::LinkEntry> links;
  std::vector<std::string> written;
  auto save = [&](const models::Params& p, const std::string& encoder_link) {
    const std::string name = name_of(p);
    const std::string file = name + ".mailparm";
    diff::save_checkpoint(p, dir / file);
    links.push_back({name, file, encoder_link});
    written.push_back(file);
    return name;
  };
  const std::string pol_enc = save(ag.policy_features->encoder().params(), "");
  const std::string disc_enc = ag.shared_encoder() ? pol_enc : save(ag.disc_features->encoder().params(), "");
  save(ag.actor->params(), pol_enc);
  save(ag.critic->params(), pol_enc);
  save(ag.disc->params(), disc_enc);
  if (ag.posterior) {
    std::string post_enc = pol_enc;
    if (ag.posterior_features != ag.policy_features) post_enc = save(ag.posterior_features->encoder().params(), "");
    save(ag.posterior->params(), post_enc);
  }
  models::write_linkage(dir / files::kLinkage, links);
  write_file(dir / files::kExperiment, to_json(cfg));
  result.report.checkpoints = written;
  train::write_report(result.report, dir);
  written.insert(written.end(), {files::kLinkage, files::kExperiment, files::kReport, files::kSummary});
  return written;
}

LoadedRun load_run(const fs::path& dir) {
  require_file(dir / files::kLinkage, "run linkage manifest: run train first");
  LoadedRun run;
  run.config = load_config(dir / files::kExperiment);
  const auto links = models::read_linkage(dir / files::kLinkage);
  Rng rng(0);
  std::map<std::string, std::shared_ptr<train::FeatureSource>> sources;
  auto source = [&](const std::string& name) {
    auto it = sources.find(name);
    if (it != sources.end()) return it->second;
    auto enc = std::make_shared<models::Encoder>(rng, name);
    diff::load_checkpoint(enc->params(), dir / (name + ".mailparm"));
    enc->set_frozen(true);
    return sources[name] = std::make_shared<train::FeatureSource>(enc);
  };
  for (const auto& l : links) {
    if (l.network == "actor") {
      run.actor = std::make_unique<models::Actor>(run.config.train.di ? models::kNumCodes : 0, rng);
      diff::load_checkpoint(run.actor->params(), dir / l.file);
      run.features = source(l.encoder);
    } else if (l.network == "posterior") {
      run.posterior = std::make_shared<models::Posterior>(rng);
      diff::load_checkpoint(run.posterior->params(), dir / l.file);
      run.posterior_features = source(l.encoder);
    }
  }
  if (!run.actor) throw ConfigError("run directory has no actor checkpoint: " + dir.string());
  return run;
}

}  // namespace mail::harness
