#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "vmimo/behavior.hpp"
#include "vmimo/channel.hpp"
#include "vmimo/metrics.hpp"
#include "vmimo/pipeline.hpp"
#include "vmimo/spatial.hpp"

namespace vmimo {

/// Modeled eNodeB wall-clock constants. Polling is a parallel window whose
/// duration scales with headcount. Defaults are calibrated so the Table-I
/// profile mix (willing fraction ~0.195 under uniform contexts) yields the
/// ~29% discovery-time reduction; all three are config keys.
struct TimingModel {
  double t_poll_per_user_ms = 10.0;
  double t_predict_per_user_ms = 5.0;
  double t_fixed_ms = 20.0;
};

struct SelectionConfig {
  int n_rx_antennas = 4;  // N; at most N-1 relays are selected
  ClassifierKind classifier = ClassifierKind::Mlp;
  long probe_seq_len = 10000;
  double ber_threshold = 1e-2;
  TimingModel timing;
  LinkParams link;
};

/// One round shares time/day/incentive across the VAA cell; battery is
/// per-user.
struct RoundContext {
  int time_zone = 1;
  int day = 1;
  double incentive = 0.0;
  std::map<int, double> battery_by_user;

  WillingnessContext for_user(int user_id) const;
};

RoundContext sample_round_context(std::span<const int> user_ids, RngStream& rng);

struct PredictionOutcome {
  std::vector<int> predicted;         // ascending user ids classified +1
  std::vector<int> actually_willing;  // ground truth incl. the noise flip
  ConfusionCounts confusion;
};

/// Classifies every user under the round context and scores against the
/// ground-truth willingness decision. Throws if a user lacks a model.
PredictionOutcome predict_willing(const std::map<int, UserModel>& models,
                                  std::span<const int> user_ids,
                                  const std::map<int, int>& profile_of_user,
                                  std::span<const UserProfile> profiles,
                                  const RoundContext& ctx, RngStream& rng);

struct SelectionResult {
  int su_id = 0;
  std::vector<int> vaa_members;
  std::vector<int> predicted_willing;
  std::vector<int> actually_willing;
  std::vector<int> probed;  // predicted users that actually forwarded
  std::vector<PathQuality> paths;    // one per probed user
  std::vector<int> selected_relays;  // ascending BER, at most N-1
  double time_with_prediction_ms = 0.0;
  double time_without_prediction_ms = 0.0;
  ConfusionCounts confusion;
  bool fallback_direct = false;  // SU talks to the eNB with no relays
  RoundContext context;
};

/// The four-step round: location filter, willingness prediction, probe of
/// the predicted users (silent reject from unwilling ones), BER ranking.
/// Empty selection sets fallback_direct.
SelectionResult run_selection(const Scenario& scenario, int su_id,
                              std::span<const UserProfile> profiles,
                              const std::map<int, UserModel>& models,
                              const SelectionConfig& config, RngStream& rng);

/// without prediction: t_fixed + t_poll * n_polled (everyone in the cell);
/// with prediction:    t_fixed + t_predict * n_polled + t_poll * n_predicted.
double discovery_time(int n_polled, int n_predicted, const TimingModel& timing,
                      bool with_prediction);

struct DiscoveryComparison {
  int rounds = 0;
  double mean_with_ms = 0.0;
  double mean_without_ms = 0.0;
  double std_with_ms = 0.0;
  double std_without_ms = 0.0;
  double reduction = 0.0;  // 1 - mean_with / mean_without
};

DiscoveryComparison compare_discovery(const Scenario& scenario, int su_id,
                                      std::span<const UserProfile> profiles,
                                      const std::map<int, UserModel>& models,
                                      const SelectionConfig& config,
                                      int n_rounds, RngStream& rng);

std::string selection_result_to_json_line(const SelectionResult& result,
                                          int round_index);

/// Per-round path report with the fixed column set
/// relay_id,snr1_db,snr2_db,snr_e2e_db,ber_emp,ber_theory,selected.
std::string path_report_csv(std::span<const PathQuality> paths,
                            std::span<const int> selected);

}  // namespace vmimo
