#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vmimo/behavior.hpp"
#include "vmimo/pipeline.hpp"

namespace vmimo {

/// +1 (willing) is the positive class throughout.
struct ConfusionCounts {
  long tp = 0;
  long fp = 0;
  long tn = 0;
  long fn = 0;

  long total() const { return tp + fp + tn + fn; }
  void add(int predicted, int truth);
  ConfusionCounts& operator+=(const ConfusionCounts& other);
};

ConfusionCounts confusion(std::span<const int> predictions,
                          std::span<const int> truths);

// Each metric returns nullopt when its denominator is zero.
std::optional<double> accuracy(const ConfusionCounts& c);
std::optional<double> precision(const ConfusionCounts& c);
/// TN/(TN+FN), exactly the formula printed in the source tables (this is
/// negative predictive value, not the textbook recall).
std::optional<double> recall_paper(const ConfusionCounts& c);
/// TP/(TP+FN), the textbook recall, reported alongside for honesty.
std::optional<double> recall_standard(const ConfusionCounts& c);

struct ReportRow {
  int n_users = 0;
  std::string classifier;
  double mse_pct = 0.0;  // squared decision error on the +-1 scale / span^2
  double accuracy_pct = 0.0;
  double precision_pct = 0.0;    // NaN when undefined
  double recall_paper_pct = 0.0;
  double recall_std_pct = 0.0;
};

struct ExperimentSettings {
  std::vector<int> user_counts{10, 15, 20, 25, 30};
  std::vector<UserProfile> profiles;  // profile-id order
  std::vector<double> profile_mix;    // fractions, sum 1
  int n_samples = 2000;
  double train_fraction = 0.7;
  ClassifierKind classifier = ClassifierKind::Mlp;
  ClassifierSettings settings;
  int threads = 0;  // 0 = hardware concurrency
};

/// Trains one model per user per count, scores the held-out contexts
/// against the noise-free rule, micro-averages pooled counts. Datasets are
/// derived from (seed, count, user) only, so both classifiers see identical
/// data under the same seed.
std::vector<ReportRow> experiment_report(const ExperimentSettings& settings,
                                         std::uint64_t seed);

void write_report_csv(const std::filesystem::path& path,
                      std::span<const ReportRow> rows);

}  // namespace vmimo
