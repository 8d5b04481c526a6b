#include "vmimo/commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "vmimo/errors.hpp"
#include "vmimo/metrics.hpp"
#include "vmimo/selection.hpp"
#include "vmimo/textio.hpp"

namespace vmimo {
namespace {

// RNG purpose tags under the run seed. Fixed forever; adding a tag never
// perturbs existing streams.
enum RngTag : std::uint64_t {
  kTagScenario = 1,
  kTagDatasets = 2,
  kTagTraining = 3,
  kTagRounds = 4,
  kTagSuChoice = 5,
  kTagEvaluate = 6,
  kTagSweep = 7,
};

int log_level() {
  static const int level = [] {
    const char* env = std::getenv("VMIMO_LOG");
    if (env == nullptr) return 0;
    const std::string value(env);
    if (value == "debug") return 2;
    if (value == "info") return 1;
    return 0;
  }();
  return level;
}

void log_info(const std::string& message) {
  if (log_level() >= 1) std::fprintf(stderr, "[vmimo] %s\n", message.c_str());
}

std::string user_tag(int user_id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "user_%04d", user_id);
  return buf;
}

std::string round_tag(int round) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "round_%04d", round);
  return buf;
}

Scenario make_scenario(const RunConfig& cfg) {
  const RngStream root(cfg.seed);
  return build_scenario(cfg.scenario_config(), root.child(kTagScenario).seed());
}

std::vector<Sample> user_dataset(const RunConfig& cfg, const UserProfile& profile,
                                 int user_id) {
  const RngStream root(cfg.seed);
  auto rng = root.child(kTagDatasets).child(static_cast<std::uint64_t>(user_id));
  return generate_dataset(profile, cfg.n_samples, rng);
}

/// Deterministic parallel training of one model per listed user; datasets
/// and training streams are keyed by user id, results collected in order.
std::map<int, UserModel> train_models(const RunConfig& cfg,
                                      const Scenario& scenario,
                                      std::span<const int> user_ids,
                                      std::vector<TrainingInfo>* infos) {
  const RngStream root(cfg.seed);
  const auto profiles = cfg.build_profiles();
  std::map<int, int> profile_of_user;
  for (const auto& u : scenario.inactive_users)
    profile_of_user[u.id] = u.profile_id;

  std::vector<UserModel> models(user_ids.size());
  std::vector<TrainingInfo> local_infos(user_ids.size());
  parallel_for(static_cast<int>(user_ids.size()), cfg.threads, [&](int i) {
    const int user_id = user_ids[i];
    const auto& profile = profiles.at(profile_of_user.at(user_id));
    const auto dataset = user_dataset(cfg, profile, user_id);
    auto train_rng =
        root.child(kTagTraining).child(static_cast<std::uint64_t>(user_id));
    models[i] = train_user_model(dataset, cfg.selection.classifier,
                                 cfg.classifier_settings, train_rng,
                                 &local_infos[i]);
  });

  std::map<int, UserModel> by_id;
  for (std::size_t i = 0; i < user_ids.size(); ++i)
    by_id.emplace(user_ids[i], std::move(models[i]));
  if (infos != nullptr) *infos = std::move(local_infos);
  return by_id;
}

int choose_su(const RunConfig& cfg, const Scenario& scenario) {
  const RngStream root(cfg.seed);
  auto rng = root.child(kTagSuChoice);
  const int pick = rng.uniform_int(0, static_cast<int>(scenario.su_ids.size()) - 1);
  return scenario.su_ids[pick];
}

std::string summary_csv_row(int rounds, int n_users,
                            const DiscoveryComparison& cmp) {
  std::ostringstream out;
  out << rounds << ',' << n_users << ',' << format_g6(cmp.mean_without_ms)
      << ',' << format_g6(cmp.mean_with_ms) << ',' << format_g6(cmp.reduction)
      << '\n';
  return out.str();
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir.string() +
                                   ": " + ec.message());
}

}  // namespace

void cmd_gen_data(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  ensure_dir(out_dir);
  ensure_dir(out_dir / "datasets");
  const auto scenario = make_scenario(cfg);
  const auto profiles = cfg.build_profiles();
  write_text_file(out_dir / "scenario.json", scenario_to_json(scenario));
  for (const auto& user : scenario.inactive_users) {
    const auto dataset =
        user_dataset(cfg, profiles.at(user.profile_id), user.id);
    write_dataset_csv(out_dir / "datasets" / (user_tag(user.id) + ".csv"),
                      dataset);
  }
  log_info("gen-data: wrote " + std::to_string(scenario.inactive_users.size()) +
           " datasets");
}

void cmd_train(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  ensure_dir(out_dir / "models");
  ensure_dir(out_dir / "traces");
  const auto scenario = make_scenario(cfg);
  std::vector<int> user_ids;
  for (const auto& u : scenario.inactive_users) user_ids.push_back(u.id);

  std::vector<TrainingInfo> infos;
  const auto models = train_models(cfg, scenario, user_ids, &infos);

  const std::string clf = to_string(cfg.selection.classifier);
  std::size_t i = 0;
  for (const auto& [user_id, model] : models) {
    const auto base = user_tag(user_id) + "_" + clf;
    if (model.kind == ClassifierKind::Mlp) {
      TrainResult summary;
      summary.mse_trace = infos[i].mse_trace;
      summary.converged = infos[i].converged;
      write_text_file(out_dir / "models" / (base + ".json"),
                      mlp_to_json(model.mlp, cfg.classifier_settings.rprop,
                                  &summary));
    } else {
      write_text_file(out_dir / "models" / (base + ".json"),
                      svm_to_json(model.svm));
    }
    nlohmann::json trace;
    trace["user"] = user_id;
    trace["classifier"] = clf;
    trace["converged"] = infos[i].converged;
    if (model.kind == ClassifierKind::Mlp) {
      trace["final_mse"] = infos[i].final_mse;
      trace["epochs"] = infos[i].epochs;
      trace["mse_trace"] = infos[i].mse_trace;
    } else {
      trace["best_c"] = infos[i].best_c;
      trace["best_gamma"] = infos[i].best_gamma;
      trace["cv_accuracy"] = infos[i].cv_accuracy;
      trace["cv_cell_accuracy"] = infos[i].cv_cell_accuracy;
    }
    write_text_file(out_dir / "traces" / (base + "_trace.json"), trace.dump(2));
    ++i;
  }
  log_info("train: wrote " + std::to_string(models.size()) + " " + clf +
           " models");
}

void cmd_evaluate(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  ensure_dir(out_dir);
  const RngStream root(cfg.seed);
  ExperimentSettings settings;
  settings.user_counts = cfg.evaluate_user_counts;
  settings.profiles = cfg.build_profiles();
  settings.profile_mix = cfg.mix_fractions();
  settings.n_samples = cfg.n_samples;
  settings.train_fraction = cfg.train_fraction;
  settings.settings = cfg.classifier_settings;
  settings.threads = cfg.threads;

  std::vector<ReportRow> rows;
  for (const auto classifier : cfg.evaluate_classifiers) {
    settings.classifier = classifier;
    // Same derived seed for every classifier: identical per-user datasets.
    const auto report =
        experiment_report(settings, root.child(kTagEvaluate).seed());
    rows.insert(rows.end(), report.begin(), report.end());
    log_info("evaluate: finished " + to_string(classifier) + " sweep");
  }
  write_report_csv(out_dir / "report.csv", rows);
}

void cmd_simulate(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  ensure_dir(out_dir);
  const auto scenario = make_scenario(cfg);
  const auto profiles = cfg.build_profiles();
  write_text_file(out_dir / "scenario.json", scenario_to_json(scenario));

  const int su_id = choose_su(cfg, scenario);
  const auto members = filter_vaa_members(scenario, su_id);
  const auto models = train_models(cfg, scenario, members, nullptr);
  log_info("simulate: SU " + std::to_string(su_id) + " with " +
           std::to_string(members.size()) + " VAA members");

  if (cfg.write_path_reports) ensure_dir(out_dir / "paths");
  const RngStream root(cfg.seed);
  std::ostringstream rounds_out;
  std::vector<double> with_ms, without_ms;
  for (int round = 0; round < cfg.simulate_rounds; ++round) {
    auto round_rng = root.child(kTagRounds).child(round);
    const auto result = run_selection(scenario, su_id, profiles, models,
                                      cfg.selection, round_rng);
    rounds_out << selection_result_to_json_line(result, round) << '\n';
    if (cfg.write_path_reports)
      write_text_file(out_dir / "paths" / (round_tag(round) + ".csv"),
                      path_report_csv(result.paths, result.selected_relays));
    with_ms.push_back(result.time_with_prediction_ms);
    without_ms.push_back(result.time_without_prediction_ms);
  }
  write_text_file(out_dir / "rounds.jsonl", rounds_out.str());

  DiscoveryComparison cmp;
  cmp.rounds = cfg.simulate_rounds;
  double sum_with = 0.0, sum_without = 0.0;
  for (double v : with_ms) sum_with += v;
  for (double v : without_ms) sum_without += v;
  cmp.mean_with_ms = sum_with / cfg.simulate_rounds;
  cmp.mean_without_ms = sum_without / cfg.simulate_rounds;
  cmp.reduction = cmp.mean_without_ms > 0.0
                      ? 1.0 - cmp.mean_with_ms / cmp.mean_without_ms
                      : 0.0;
  std::string summary = "rounds,n_users,mean_t_without,mean_t_with,reduction\n";
  summary += summary_csv_row(cfg.simulate_rounds,
                             static_cast<int>(members.size()), cmp);
  write_text_file(out_dir / "summary.csv", summary);
}

void cmd_compare_timing(const RunConfig& cfg,
                        const std::filesystem::path& out_dir) {
  ensure_dir(out_dir);
  const RngStream root(cfg.seed);
  std::string csv = "rounds,n_users,mean_t_without,mean_t_with,reduction\n";
  for (const int n_users : cfg.timing_sweep_user_counts) {
    if (n_users < 1) throw ConfigError("timing_sweep user counts must be >= 1");
    RunConfig sized = cfg;
    sized.n_inactive = n_users;
    sized.n_sus = 1;
    sized.seed = root.child(kTagSweep).child(n_users).seed();

    const auto scenario = make_scenario(sized);
    const auto profiles = sized.build_profiles();
    const int su_id = choose_su(sized, scenario);
    const auto members = filter_vaa_members(scenario, su_id);
    const auto models = train_models(sized, scenario, members, nullptr);

    const RngStream sized_root(sized.seed);
    auto rounds_rng = sized_root.child(kTagRounds);
    const auto cmp =
        compare_discovery(scenario, su_id, profiles, models, sized.selection,
                          sized.simulate_rounds, rounds_rng);
    csv += summary_csv_row(sized.simulate_rounds,
                           static_cast<int>(members.size()), cmp);
    log_info("compare-timing: n_users=" + std::to_string(n_users) +
             " reduction=" + format_g6(cmp.reduction));
  }
  write_text_file(out_dir / "timing.csv", csv);
}

}  // namespace vmimo
