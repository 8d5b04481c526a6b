#include "vmimo/selection.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "vmimo/textio.hpp"

namespace vmimo {
namespace {

double to_db(double linear) { return 10.0 * std::log10(linear); }

}  // namespace

WillingnessContext RoundContext::for_user(int user_id) const {
  const auto it = battery_by_user.find(user_id);
  if (it == battery_by_user.end())
    throw std::invalid_argument("RoundContext: no battery for user " +
                                std::to_string(user_id));
  return {it->second, time_zone, day, incentive};
}

RoundContext sample_round_context(std::span<const int> user_ids,
                                  RngStream& rng) {
  RoundContext ctx;
  ctx.time_zone = rng.uniform_int(1, 10);
  ctx.day = rng.uniform_int(1, 7);
  ctx.incentive = rng.uniform01();
  for (int id : user_ids) ctx.battery_by_user[id] = rng.uniform01();
  return ctx;
}

PredictionOutcome predict_willing(const std::map<int, UserModel>& models,
                                  std::span<const int> user_ids,
                                  const std::map<int, int>& profile_of_user,
                                  std::span<const UserProfile> profiles,
                                  const RoundContext& ctx, RngStream& rng) {
  PredictionOutcome outcome;
  for (int id : user_ids) {
    const auto model_it = models.find(id);
    if (model_it == models.end())
      throw std::invalid_argument("predict_willing: no trained model for user " +
                                  std::to_string(id));
    const auto profile_it = profile_of_user.find(id);
    if (profile_it == profile_of_user.end() ||
        profile_it->second >= static_cast<int>(profiles.size()))
      throw std::invalid_argument("predict_willing: no profile for user " +
                                  std::to_string(id));
    const WillingnessContext user_ctx = ctx.for_user(id);
    const int predicted = model_it->second.predict(user_ctx);
    const int actual =
        decide_willingness(profiles[profile_it->second], user_ctx, rng);
    if (predicted == 1) outcome.predicted.push_back(id);
    if (actual == 1) outcome.actually_willing.push_back(id);
    outcome.confusion.add(predicted, actual);
  }
  return outcome;
}

double discovery_time(int n_polled, int n_predicted, const TimingModel& timing,
                      bool with_prediction) {
  if (n_polled < 0 || n_predicted < 0)
    throw std::invalid_argument("discovery_time: negative counts");
  if (timing.t_poll_per_user_ms < 0.0 || timing.t_predict_per_user_ms < 0.0 ||
      timing.t_fixed_ms < 0.0)
    throw std::invalid_argument("discovery_time: negative timing constants");
  if (!with_prediction)
    return timing.t_fixed_ms + timing.t_poll_per_user_ms * n_polled;
  return timing.t_fixed_ms + timing.t_predict_per_user_ms * n_polled +
         timing.t_poll_per_user_ms * n_predicted;
}

SelectionResult run_selection(const Scenario& scenario, int su_id,
                              std::span<const UserProfile> profiles,
                              const std::map<int, UserModel>& models,
                              const SelectionConfig& config, RngStream& rng) {
  if (config.n_rx_antennas < 1)
    throw std::invalid_argument("run_selection: N must be >= 1");

  SelectionResult result;
  result.su_id = su_id;
  result.vaa_members = filter_vaa_members(scenario, su_id);  // step A
  result.context = sample_round_context(result.vaa_members, rng);

  std::map<int, int> profile_of_user;
  std::map<int, Point2D> position_of_user;
  for (const auto& u : scenario.inactive_users) {
    profile_of_user[u.id] = u.profile_id;
    position_of_user[u.id] = u.position;
  }

  // Step B: willingness prediction at the eNB.
  auto outcome = predict_willing(models, result.vaa_members, profile_of_user,
                                 profiles, result.context, rng);
  result.predicted_willing = std::move(outcome.predicted);
  result.actually_willing = std::move(outcome.actually_willing);
  result.confusion = outcome.confusion;

  // Step C: probe broadcast to predicted users. Unwilling ones reject
  // silently; willing ones forward and get a BER measurement.
  const auto su_it =
      std::find(scenario.su_ids.begin(), scenario.su_ids.end(), su_id);
  const Point2D su_pos =
      scenario.su_positions[su_it - scenario.su_ids.begin()];
  const Point2D enb_pos = scenario.enbs[scenario.enb_assignment.at(su_id)];

  for (int id : result.predicted_willing) {
    const bool responds =
        std::binary_search(result.actually_willing.begin(),
                           result.actually_willing.end(), id);
    if (!responds) continue;
    result.probed.push_back(id);
    const Point2D relay_pos = position_of_user.at(id);
    PathQuality path;
    path.relay_id = id;
    path.snr_hop1 = sample_link_snr(distance(su_pos, relay_pos), config.link, rng);
    path.snr_hop2 = sample_link_snr(distance(relay_pos, enb_pos), config.link, rng);
    path.snr_e2e = af_equivalent_snr(path.snr_hop1, path.snr_hop2);
    path.ber = probe_ber(path.snr_e2e, config.probe_seq_len, rng);
    path.ber_theory = ber_theoretical(path.snr_e2e);
    result.paths.push_back(path);
  }

  // Step D terminal: at most N-1 relays by ascending measured BER.
  result.selected_relays = rank_relays(result.paths, config.n_rx_antennas - 1,
                                       config.ber_threshold);
  result.fallback_direct = result.selected_relays.empty();

  const int n_members = static_cast<int>(result.vaa_members.size());
  const int n_predicted = static_cast<int>(result.predicted_willing.size());
  result.time_without_prediction_ms =
      discovery_time(n_members, n_predicted, config.timing, false);
  result.time_with_prediction_ms =
      discovery_time(n_members, n_predicted, config.timing, true);
  return result;
}

DiscoveryComparison compare_discovery(const Scenario& scenario, int su_id,
                                      std::span<const UserProfile> profiles,
                                      const std::map<int, UserModel>& models,
                                      const SelectionConfig& config,
                                      int n_rounds, RngStream& rng) {
  if (n_rounds < 1)
    throw std::invalid_argument("compare_discovery: n_rounds must be >= 1");
  std::vector<double> with_ms, without_ms;
  with_ms.reserve(n_rounds);
  without_ms.reserve(n_rounds);
  for (int round = 0; round < n_rounds; ++round) {
    auto round_rng = rng.child(round);
    const auto result =
        run_selection(scenario, su_id, profiles, models, config, round_rng);
    with_ms.push_back(result.time_with_prediction_ms);
    without_ms.push_back(result.time_without_prediction_ms);
  }

  auto mean_of = [](const std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
  };
  auto std_of = [](const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double sum = 0.0;
    for (double x : v) sum += (x - mean) * (x - mean);
    return std::sqrt(sum / static_cast<double>(v.size() - 1));
  };

  DiscoveryComparison cmp;
  cmp.rounds = n_rounds;
  cmp.mean_with_ms = mean_of(with_ms);
  cmp.mean_without_ms = mean_of(without_ms);
  cmp.std_with_ms = std_of(with_ms, cmp.mean_with_ms);
  cmp.std_without_ms = std_of(without_ms, cmp.mean_without_ms);
  cmp.reduction = cmp.mean_without_ms > 0.0
                      ? 1.0 - cmp.mean_with_ms / cmp.mean_without_ms
                      : 0.0;
  return cmp;
}

std::string selection_result_to_json_line(const SelectionResult& result,
                                          int round_index) {
  nlohmann::json j;
  j["round"] = round_index;
  j["su_id"] = result.su_id;
  j["vaa_members"] = result.vaa_members;
  j["predicted_willing"] = result.predicted_willing;
  j["actually_willing"] = result.actually_willing;
  j["probed"] = result.probed;
  auto& paths = j["paths"] = nlohmann::json::array();
  for (const auto& p : result.paths)
    paths.push_back({{"relay_id", p.relay_id},
                     {"snr_hop1", p.snr_hop1},
                     {"snr_hop2", p.snr_hop2},
                     {"snr_e2e", p.snr_e2e},
                     {"ber", p.ber},
                     {"ber_theory", p.ber_theory}});
  j["selected_relays"] = result.selected_relays;
  j["time_with_prediction_ms"] = result.time_with_prediction_ms;
  j["time_without_prediction_ms"] = result.time_without_prediction_ms;
  j["confusion"] = {{"tp", result.confusion.tp},
                    {"fp", result.confusion.fp},
                    {"tn", result.confusion.tn},
                    {"fn", result.confusion.fn}};
  j["fallback_direct"] = result.fallback_direct;
  j["context"] = {{"time_zone", result.context.time_zone},
                  {"day", result.context.day},
                  {"incentive", result.context.incentive}};
  return j.dump();
}

std::string path_report_csv(std::span<const PathQuality> paths,
                            std::span<const int> selected) {
  std::ostringstream out;
  out << "relay_id,snr1_db,snr2_db,snr_e2e_db,ber_emp,ber_theory,selected\n";
  for (const auto& p : paths) {
    const bool chosen =
        std::find(selected.begin(), selected.end(), p.relay_id) != selected.end();
    out << p.relay_id << ',' << format_g6(to_db(p.snr_hop1)) << ','
        << format_g6(to_db(p.snr_hop2)) << ',' << format_g6(to_db(p.snr_e2e))
        << ',' << format_g6(p.ber) << ',' << format_g6(p.ber_theory) << ','
        << (chosen ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace vmimo
