#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mail::train {

struct CurvePoint {
  std::size_t step = 0;  // environment steps collected so far
  double score_mean = 0.0;
  double score_std = 0.0;
  double disc_acc = 0.0;
  double reward_mean = 0.0;
};

/// Index of the first point whose trailing rolling mean (over up to `window`
/// points) reaches `threshold`. Throws ConfigError on an empty curve.
std::optional<std::size_t> meets_threshold(const std::vector<double>& scores, double threshold = -10.0,
                                           std::size_t window = 10);

struct TrainReport {
  std::vector<CurvePoint> curve;
  std::optional<std::size_t> meets_step;  // env steps, "-" when never met
  double best_score = 0.0;
  double final_score = 0.0;
  double final_std = 0.0;
  double final_success_rate = 0.0;
  // mean and std of evaluations after the threshold was met
  std::optional<double> after_meets_mean;
  std::optional<double> after_meets_std;
  std::string encoder_hash_start;
  std::string encoder_hash_end;
  double wall_seconds = 0.0;
  std::vector<std::string> checkpoints;
};

/// Fixes after_meets_* and best_score from the curve.
void summarize(TrainReport& report, double threshold, std::size_t window);

/// step,score_mean,score_std,disc_acc,reward_mean with fixed 6-digit precision.
std::string report_csv(const TrainReport& report);
std::string summary_json(const TrainReport& report);
void write_report(const TrainReport& report, const std::filesystem::path& dir);

}  // namespace mail::train
