#include "mail/train/report.hpp"

#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>

#include "mail/core/binary_io.hpp"
#include "mail/core/error.hpp"

namespace mail::train {

std::optional<std::size_t> meets_threshold(const std::vector<double>& scores, double threshold, std::size_t window) {
  if (scores.empty()) throw ConfigError("meets_threshold: empty curve");
  if (window == 0) throw ConfigError("meets_threshold: window must be positive");
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    sum += scores[i];
    if (i >= window) sum -= scores[i - window];
    const std::size_t n = std::min(window, i + 1);
    if (sum / static_cast<double>(n) >= threshold) return i;
  }
  return std::nullopt;
}

void summarize(TrainReport& report, double threshold, std::size_t window) {
  if (report.curve.empty()) return;
  std::vector<double> scores;
  for (const auto& p : report.curve) scores.push_back(p.score_mean);
  report.best_score = *std::max_element(scores.begin(), scores.end());
  const auto idx = meets_threshold(scores, threshold, window);
  report.meets_step.reset();
  report.after_meets_mean.reset();
  report.after_meets_std.reset();
  if (!idx) return;
  report.meets_step = report.curve[*idx].step;
  const std::size_t first = *idx + 1;
  if (first >= scores.size()) return;
  double m = 0.0;
  for (std::size_t i = first; i < scores.size(); ++i) m += scores[i];
  m /= static_cast<double>(scores.size() - first);
  double v = 0.0;
  for (std::size_t i = first; i < scores.size(); ++i) v += (scores[i] - m) * (scores[i] - m);
  report.after_meets_mean = m;
  report.after_meets_std = std::sqrt(v / static_cast<double>(scores.size() - first));
}

std::string report_csv(const TrainReport& report) {
  std::string out = "step,score_mean,score_std,disc_acc,reward_mean\n";
  char line[160];
  for (const auto& p : report.curve) {
    std::snprintf(line, sizeof line, "%zu,%.6f,%.6f,%.6f,%.6f\n", p.step, p.score_mean, p.score_std, p.disc_acc,
                  p.reward_mean);
    out += line;
  }
  return out;
}

std::string summary_json(const TrainReport& r) {
  nlohmann::json j;
  j["best_score"] = r.best_score;
  j["final_score"] = r.final_score;
  j["final_score_std"] = r.final_std;
  j["final_success_rate"] = r.final_success_rate;
  j["meets_-10_step"] = r.meets_step ? nlohmann::json(*r.meets_step) : nlohmann::json("-");
  if (r.after_meets_mean) {
    j["after_meets_stats"] = {{"mean", *r.after_meets_mean}, {"std", *r.after_meets_std}};
  } else {
    j["after_meets_stats"] = "-";
  }
  j["encoder_hash_start"] = r.encoder_hash_start;
  j["encoder_hash_end"] = r.encoder_hash_end;
  j["evaluations"] = r.curve.size();
  j["wall_seconds"] = r.wall_seconds;
  j["checkpoints"] = r.checkpoints;
  return j.dump(2) + "\n";
}

void write_report(const TrainReport& report, const std::filesystem::path& dir) {
  write_file(dir / "report.csv", report_csv(report));
  write_file(dir / "summary.json", summary_json(report));
}

}  // namespace mail::train
