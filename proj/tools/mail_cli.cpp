// mail: command-line front end for demonstration generation, the three
// training phases, evaluation and analysis exports.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mail/core/binary_io.hpp"
#include "mail/core/error.hpp"
#include "mail/demo/dataset.hpp"
#include "mail/diff/threading.hpp"
#include "mail/harness/experiment.hpp"
#include "mail/harness/exports.hpp"
#include "mail/harness/manifest.hpp"
#include "mail/harness/pipeline.hpp"
#include "mail/train/evaluate.hpp"

using namespace mail;
using namespace mail::harness;
namespace fs = std::filesystem;

namespace {

constexpr int kUsageExit = 2;
constexpr int kFailureExit = 1;

struct Common {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
  int threads = 1;
};

struct Options {
  Common common;
  std::size_t pairs = demo::kDefaultPairs;
  std::string demos;
  std::string bc;
  std::string posterior;
  std::string preset;
  std::string run;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> epochs;
  std::size_t episodes = 0;
  std::size_t states = 1000;
  bool sample = false;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Random seed");
  cmd->add_option("--config", c.config, "Experiment config JSON")->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "Output directory")->required();
  cmd->add_option("--threads", c.threads, "Kernel threads (1 = serial reference)")->check(CLI::PositiveNumber);
}

// Config file first, then the preset (train only), then explicit flags.
ExperimentConfig resolve(const Options& o) {
  ExperimentConfig cfg;
  if (!o.common.config.empty()) cfg = load_config(o.common.config);
  if (!o.preset.empty()) {
    const auto seed = cfg.train.seed;
    cfg.train = find_preset(o.preset).config;
    cfg.train.seed = seed;
    cfg.preset = o.preset;
  }
  if (o.common.seed) cfg.train.seed = *o.common.seed;
  if (!o.demos.empty()) cfg.demos = o.demos;
  if (!o.bc.empty()) cfg.bc_dir = o.bc;
  if (!o.posterior.empty()) cfg.posterior_dir = o.posterior;
  if (o.steps) cfg.train.total_steps = *o.steps;
  cfg.out_dir = o.common.out;
  cfg.train.validate();
  return cfg;
}

demo::DemoDataset load_demos(const ExperimentConfig& cfg) {
  if (cfg.demos.empty()) throw ConfigError("no demonstration file: pass --demos (produced by gen-demos)");
  return demo::load_dataset(cfg.demos);
}

Manifest manifest_for(const std::string& command, const std::vector<std::string>& args, const ExperimentConfig& cfg,
                      bool with_config = true) {
  Manifest m;
  m.command = command;
  m.args = args;
  m.seed = cfg.train.seed;
  if (with_config) m.config_json = to_json(cfg);
  return m;
}

void say(const Options& o, const std::string& text) {
  if (!o.quiet) std::cout << text << std::endl;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int gen_demos(const Options& o, const std::vector<std::string>& args) {
  auto cfg = resolve(o);
  if (o.common.seed) cfg.demo_seed = *o.common.seed;
  cfg.demo_pairs = o.pairs;
  const fs::path out = o.common.out;
  fs::create_directories(out);
  const auto ds = demo::generate(cfg.demo_pairs, cfg.demo_seed);
  demo::save_dataset(ds, out / files::kDemos);
  cfg.demos = (out / files::kDemos).string();
  auto m = manifest_for("gen-demos", args, cfg);
  m.seed = cfg.demo_seed;
  write_manifest(out, m, {}, {files::kDemos});
  say(o, std::to_string(ds.count()) + " pairs in " + std::to_string(ds.episode_count()) + " episodes -> " +
             cfg.demos);
  return 0;
}

int train_bc(const Options& o, const std::vector<std::string>& args) {
  auto cfg = resolve(o);
  if (o.epochs) cfg.train.bc_epochs = *o.epochs;
  const auto ds = load_demos(cfg);
  const fs::path out = o.common.out;
  fs::create_directories(out);
  const auto bc = train::bc_pretrain(ds, cfg.train, cfg.train.seed);
  const auto written = save_bc(out, bc);
  write_manifest(out, manifest_for("train-bc", args, cfg), {cfg.demos}, written);
  say(o, "holdout accuracy " + fmt("%.4f", bc.holdout_accuracy) + ", train loss " + fmt("%.4f", bc.final_train_loss));
  return 0;
}

int train_posterior(const Options& o, const std::vector<std::string>& args) {
  auto cfg = resolve(o);
  if (o.epochs) cfg.train.posterior_epochs = *o.epochs;
  if (cfg.bc_dir.empty()) throw ConfigError("missing BC encoder checkpoint: run phase 1 (train-bc) and pass --bc");
  const auto enc = load_bc_encoder(cfg.bc_dir);
  const auto ds = load_demos(cfg);
  const fs::path out = o.common.out;
  fs::create_directories(out);
  const auto post = train::posterior_pretrain(ds, enc, cfg.train, cfg.train.seed);
  const auto written = save_posterior(out, post);
  write_manifest(out, manifest_for("train-posterior", args, cfg), {cfg.demos, fs::path(cfg.bc_dir) / files::kBcEncoder},
                 written);
  std::string losses;
  for (double l : post.epoch_loss) losses += " " + fmt("%.4f", l);
  say(o, "epoch loss" + losses);
  return 0;
}

int train_run(const Options& o, const std::vector<std::string>& args) {
  const auto cfg = resolve(o);
  const auto pre = load_pretrained(cfg);
  const auto ds = load_demos(cfg);
  const fs::path out = o.common.out;
  fs::create_directories(out);
  train::TrainHooks hooks;
  if (!o.quiet)
    hooks.on_eval = [](const train::CurvePoint& p) {
      std::printf("step %7zu  score %8.2f +- %6.2f  disc_acc %.3f\n", p.step, p.score_mean, p.score_std, p.disc_acc);
      std::fflush(stdout);
    };
  auto result = train::train(cfg.train, ds, pre, hooks);
  const auto written = save_run(out, cfg, result);
  std::vector<fs::path> inputs{cfg.demos};
  if (pre.bc_encoder) inputs.push_back(fs::path(cfg.bc_dir) / files::kBcEncoder);
  if (pre.posterior) inputs.push_back(fs::path(cfg.posterior_dir) / files::kPosterior);
  write_manifest(out, manifest_for("train", args, cfg), inputs, written);
  const auto& r = result.report;
  say(o, "final " + fmt("%.2f", r.final_score) + ", meets -10 at " +
             (r.meets_step ? std::to_string(*r.meets_step) : std::string("-")));
  return 0;
}

fs::path require_run(const Options& o) {
  if (o.run.empty()) throw UsageError("--run is required");
  return o.run;
}

int eval_run(const Options& o, const std::vector<std::string>& args) {
  const fs::path run_dir = require_run(o);
  auto run = load_run(run_dir);
  const std::uint64_t seed = o.common.seed.value_or(run.config.train.seed);
  const std::size_t n = o.episodes ? o.episodes : run.config.train.final_eval_episodes;
  const bool greedy = run.config.train.eval_greedy && !o.sample;
  const auto rep =
      train::evaluate(*run.actor, *run.features, n, seed, run.posterior.get(), run.posterior_features.get(), greedy);
  const fs::path out = o.common.out;
  fs::create_directories(out);
  nlohmann::json j;
  j["episodes"] = n;
  j["seed"] = seed;
  j["greedy"] = greedy;
  j["score_mean"] = rep.mean;
  j["score_std"] = rep.std;
  j["success_rate"] = rep.success_rate;
  j["returns"] = rep.returns;
  j["lengths"] = rep.lengths;
  write_file(out / files::kEval, j.dump(2) + "\n");
  auto m = manifest_for("eval", args, run.config);
  m.seed = seed;
  write_manifest(out, m, {run_dir / files::kLinkage}, {files::kEval});
  say(o, "score " + fmt("%.2f", rep.mean) + " +- " + fmt("%.2f", rep.std) + ", success " + fmt("%.3f", rep.success_rate));
  return 0;
}

int export_emb(const Options& o, const std::vector<std::string>& args) {
  std::shared_ptr<const models::Encoder> enc;
  fs::path input;
  ExperimentConfig cfg = resolve(o);
  if (!o.run.empty()) {
    auto run = load_run(o.run);
    enc = run.features->encoder_ptr();
    input = fs::path(o.run) / files::kLinkage;
  } else if (!cfg.bc_dir.empty()) {
    enc = load_bc_encoder(cfg.bc_dir);
    input = fs::path(cfg.bc_dir) / files::kBcEncoder;
  } else {
    throw UsageError("export-embeddings needs --run or --bc");
  }
  const fs::path out = o.common.out;
  fs::create_directories(out);
  write_file(out / files::kEmbeddings, export_embeddings(*enc, o.states, cfg.train.seed));
  write_manifest(out, manifest_for("export-embeddings", args, cfg), {input}, {files::kEmbeddings});
  say(o, std::to_string(o.states) + " states -> " + (out / files::kEmbeddings).string());
  return 0;
}

int export_codes(const Options& o, const std::vector<std::string>& args) {
  const fs::path run_dir = require_run(o);
  auto run = load_run(run_dir);
  if (!run.posterior) throw ConfigError("export-code-stats needs a DI run; " + run_dir.string() + " has no posterior");
  const std::uint64_t seed = o.common.seed.value_or(run.config.train.seed);
  const std::size_t n = o.episodes ? o.episodes : run.config.train.final_eval_episodes;
  const auto stats = export_code_stats(*run.actor, *run.posterior, *run.posterior_features, n, seed);
  const fs::path out = o.common.out;
  fs::create_directories(out);
  write_file(out / files::kCodes, stats.codes_csv);
  write_file(out / files::kTrajectories, stats.trajectories_csv);
  write_file(out / files::kCodesSummary, code_summary_json(stats));
  auto m = manifest_for("export-code-stats", args, run.config);
  m.seed = seed;
  write_manifest(out, m, {run_dir / files::kLinkage}, {files::kCodes, files::kTrajectories, files::kCodesSummary});
  std::string props;
  for (double p : stats.proportions) props += " " + fmt("%.3f", p);
  say(o, "code proportions" + props);
  return 0;
}

int list_presets() {
  for (const auto& p : presets()) std::cout << p.name << "\t" << p.group << "\t" << p.description << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Demonstration-guided adversarial imitation on the key-car navigation task"};
  app.require_subcommand(1);
  Options o;
  app.add_flag("-q,--quiet", o.quiet, "Suppress progress output");

  auto* gen = app.add_subcommand("gen-demos", "Generate expert demonstrations");
  add_common(gen, o.common);
  gen->add_option("--pairs", o.pairs, "Number of state-action pairs")->check(CLI::PositiveNumber);

  auto* bc = app.add_subcommand("train-bc", "Phase 1: behaviour-cloning encoder pre-training");
  add_common(bc, o.common);
  bc->add_option("--demos", o.demos, "Demonstration file");
  bc->add_option("--epochs", o.epochs, "Training epochs");

  auto* post = app.add_subcommand("train-posterior", "Phase 2: code posterior pre-training on demonstrations");
  add_common(post, o.common);
  post->add_option("--demos", o.demos, "Demonstration file");
  post->add_option("--bc", o.bc, "Directory holding the phase-1 encoder");
  post->add_option("--epochs", o.epochs, "Training epochs");

  auto* tr = app.add_subcommand("train", "Phase 3: adversarial imitation");
  add_common(tr, o.common);
  tr->add_option("--preset", o.preset, "Named experiment preset (see list-presets)");
  tr->add_option("--demos", o.demos, "Demonstration file");
  tr->add_option("--bc", o.bc, "Directory holding the phase-1 encoder");
  tr->add_option("--posterior", o.posterior, "Directory holding the phase-2 posterior");
  tr->add_option("--steps", o.steps, "Total environment steps")->check(CLI::PositiveNumber);

  auto* ev = app.add_subcommand("eval", "Evaluate a trained run");
  add_common(ev, o.common);
  ev->add_option("--run", o.run, "Run directory written by train")->required();
  ev->add_option("--episodes", o.episodes, "Evaluation episodes");
  ev->add_flag("--sample", o.sample, "Sample actions instead of taking the most probable one");

  auto* emb = app.add_subcommand("export-embeddings", "Dump encoder features of sampled states");
  add_common(emb, o.common);
  emb->add_option("--run", o.run, "Run directory (uses the policy encoder)");
  emb->add_option("--bc", o.bc, "Phase-1 directory (uses the BC encoder)");
  emb->add_option("--states", o.states, "Number of states")->check(CLI::PositiveNumber);

  auto* codes = app.add_subcommand("export-code-stats", "Per-timestep code usage of a DI run");
  add_common(codes, o.common);
  codes->add_option("--run", o.run, "Run directory written by train")->required();
  codes->add_option("--episodes", o.episodes, "Episodes to roll out");

  auto* list = app.add_subcommand("list-presets", "Print the experiment presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageExit;
  }

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    diff::set_num_threads(o.common.threads);
    if (*list) return list_presets();
    if (*gen) return gen_demos(o, args);
    if (*bc) return train_bc(o, args);
    if (*post) return train_posterior(o, args);
    if (*tr) return train_run(o, args);
    if (*ev) return eval_run(o, args);
    if (*emb) return export_emb(o, args);
    if (*codes) return export_codes(o, args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsageExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailureExit;
  }
  return kUsageExit;
}
