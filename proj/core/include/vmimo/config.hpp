#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vmimo/behavior.hpp"
#include "vmimo/pipeline.hpp"
#include "vmimo/selection.hpp"
#include "vmimo/spatial.hpp"

namespace vmimo {

/// Everything a run needs, parsed from flat `section.key=value` lines.
/// Unknown keys are configuration errors; every value has a default, so an
/// empty file is a valid config.
struct RunConfig {
  std::uint64_t seed = 42;

  // scenario.*
  Rect region{1000.0, 1000.0};
  bool single_cell = true;
  double enb_intensity = 2e-6;
  double user_intensity = 1e-4;
  int n_inactive = -1;  // exact inactive-user count; -1 draws from the PPP
  int n_sus = 1;

  // profiles.*
  double mix_hh1 = 0.34;
  double mix_ou1 = 0.33;
  double mix_st2 = 0.33;
  double mix_custom = 0.0;
  double label_noise = 0.05;
  WillingnessRule custom_rule{0.0, {}, {1, 2, 3, 4, 5, 6, 7}, 0.0};

  // dataset.*
  int n_samples = 2000;
  double train_fraction = 0.7;

  // mlp.* / svm.*
  ClassifierSettings classifier_settings;

  // channel.* / selection.* / timing.*
  SelectionConfig selection;

  // simulate.* / evaluate.* / timing_sweep.* / runtime.*
  int simulate_rounds = 200;
  bool write_path_reports = true;
  std::vector<int> evaluate_user_counts{10, 15, 20, 25, 30};
  std::vector<ClassifierKind> evaluate_classifiers{ClassifierKind::Mlp,
                                                   ClassifierKind::Svm};
  std::vector<int> timing_sweep_user_counts{10, 20, 30, 40, 50};
  int threads = 0;

  /// Profile pool in profile-id order (HH1, OU1, ST2, then the custom
  /// profile when its fraction is positive), each with label_noise applied.
  std::vector<UserProfile> build_profiles() const;
  std::vector<double> mix_fractions() const;
  ScenarioConfig scenario_config() const;
};

RunConfig parse_run_config_text(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Post-parse cross-field checks (mix sum, eta ordering, ranges). Throws
/// ConfigError; called by the parsers, public for programmatic configs.
void validate_run_config(const RunConfig& config);

}  // namespace vmimo
