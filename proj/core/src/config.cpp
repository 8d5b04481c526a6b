#include "vmimo/config.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "vmimo/errors.hpp"
#include "vmimo/textio.hpp"

namespace vmimo {
namespace {

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid number for " + key + ": '" + value + "'");
  }
}

long parse_long(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long v = std::stol(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid integer for " + key + ": '" + value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  return static_cast<int>(parse_long(key, value));
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("invalid bool for " + key + ": '" + value + "'");
}

std::vector<double> parse_double_list(const std::string& key,
                                      const std::string& value) {
  std::vector<double> out;
  if (trim(value).empty()) return out;
  for (const auto& field : split(value, ','))
    out.push_back(parse_double(key, trim(field)));
  return out;
}

std::vector<int> parse_int_list(const std::string& key,
                                const std::string& value) {
  std::vector<int> out;
  if (trim(value).empty()) return out;
  for (const auto& field : split(value, ','))
    out.push_back(parse_int(key, trim(field)));
  return out;
}

std::set<int> parse_int_set(const std::string& key, const std::string& value) {
  const auto list = parse_int_list(key, value);
  return {list.begin(), list.end()};
}

}  // namespace

std::vector<UserProfile> RunConfig::build_profiles() const {
  std::vector<UserProfile> profiles{hh1_profile(label_noise),
                                    ou1_profile(label_noise),
                                    st2_profile(label_noise)};
  if (mix_custom > 0.0) {
    UserProfile custom;
    custom.category = ProfileCategory::Custom;
    custom.name = "custom";
    custom.rules = {custom_rule};
    custom.label_noise = label_noise;
    profiles.push_back(custom);
  }
  return profiles;
}

std::vector<double> RunConfig::mix_fractions() const {
  std::vector<double> mix{mix_hh1, mix_ou1, mix_st2};
  if (mix_custom > 0.0) mix.push_back(mix_custom);
  return mix;
}

ScenarioConfig RunConfig::scenario_config() const {
  ScenarioConfig sc;
  sc.region = region;
  sc.single_cell = single_cell;
  sc.enb_intensity = enb_intensity;
  sc.user_intensity = user_intensity;
  sc.n_users_override = n_inactive >= 0 ? n_inactive + n_sus : -1;
  sc.n_sus = n_sus;
  sc.profile_mix = mix_fractions();
  return sc;
}

RunConfig parse_run_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        " is not key=value: '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_long(key, value));
    else if (key == "scenario.region_width") cfg.region.width = parse_double(key, value);
    else if (key == "scenario.region_height") cfg.region.height = parse_double(key, value);
    else if (key == "scenario.single_cell") cfg.single_cell = parse_bool(key, value);
    else if (key == "scenario.enb_intensity") cfg.enb_intensity = parse_double(key, value);
    else if (key == "scenario.user_intensity") cfg.user_intensity = parse_double(key, value);
    else if (key == "scenario.n_inactive") cfg.n_inactive = parse_int(key, value);
    else if (key == "scenario.n_sus") cfg.n_sus = parse_int(key, value);
    else if (key == "profiles.mix.hh1") cfg.mix_hh1 = parse_double(key, value);
    else if (key == "profiles.mix.ou1") cfg.mix_ou1 = parse_double(key, value);
    else if (key == "profiles.mix.st2") cfg.mix_st2 = parse_double(key, value);
    else if (key == "profiles.mix.custom") cfg.mix_custom = parse_double(key, value);
    else if (key == "profiles.label_noise") cfg.label_noise = parse_double(key, value);
    else if (key == "profiles.custom.battery_min")
      cfg.custom_rule.battery_min = parse_double(key, value);
    else if (key == "profiles.custom.unwilling_zones")
      cfg.custom_rule.unwilling_time_zones = parse_int_set(key, value);
    else if (key == "profiles.custom.willing_days")
      cfg.custom_rule.willing_days = parse_int_set(key, value);
    else if (key == "profiles.custom.incentive_min")
      cfg.custom_rule.incentive_min = parse_double(key, value);
    else if (key == "dataset.n_samples") cfg.n_samples = parse_int(key, value);
    else if (key == "dataset.train_fraction") cfg.train_fraction = parse_double(key, value);
    else if (key == "mlp.hidden") cfg.classifier_settings.mlp_hidden = parse_int(key, value);
    else if (key == "mlp.eta_plus") cfg.classifier_settings.rprop.eta_plus = parse_double(key, value);
    else if (key == "mlp.eta_minus") cfg.classifier_settings.rprop.eta_minus = parse_double(key, value);
    else if (key == "mlp.delta_init") cfg.classifier_settings.rprop.delta_init = parse_double(key, value);
    else if (key == "mlp.delta_min") cfg.classifier_settings.rprop.delta_min = parse_double(key, value);
    else if (key == "mlp.delta_max") cfg.classifier_settings.rprop.delta_max = parse_double(key, value);
    else if (key == "mlp.mse_threshold") cfg.classifier_settings.rprop.mse_threshold = parse_double(key, value);
    else if (key == "mlp.max_epochs") cfg.classifier_settings.rprop.max_epochs = parse_int(key, value);
    else if (key == "svm.kkt_tolerance") cfg.classifier_settings.smo.kkt_tolerance = parse_double(key, value);
    else if (key == "svm.max_passes") cfg.classifier_settings.smo.max_passes = parse_int(key, value);
    else if (key == "svm.max_steps_per_sample")
      cfg.classifier_settings.smo.max_steps_per_sample = parse_long(key, value);
    else if (key == "svm.c_grid") cfg.classifier_settings.grid.c_grid = parse_double_list(key, value);
    else if (key == "svm.gamma_grid") cfg.classifier_settings.grid.gamma_grid = parse_double_list(key, value);
    else if (key == "svm.folds") cfg.classifier_settings.grid.folds = parse_int(key, value);
    else if (key == "channel.path_loss_exponent")
      cfg.selection.link.path_loss_exponent = parse_double(key, value);
    else if (key == "channel.reference_snr_db")
      cfg.selection.link.reference_snr_db = parse_double(key, value);
    else if (key == "channel.rayleigh_fading")
      cfg.selection.link.rayleigh_fading = parse_bool(key, value);
    else if (key == "channel.ber_threshold")
      cfg.selection.ber_threshold = parse_double(key, value);
    else if (key == "channel.probe_seq_len")
      cfg.selection.probe_seq_len = parse_long(key, value);
    else if (key == "selection.n_rx_antennas")
      cfg.selection.n_rx_antennas = parse_int(key, value);
    else if (key == "selection.classifier")
      cfg.selection.classifier = classifier_from_string(value);
    else if (key == "timing.t_poll_ms")
      cfg.selection.timing.t_poll_per_user_ms = parse_double(key, value);
    else if (key == "timing.t_predict_ms")
      cfg.selection.timing.t_predict_per_user_ms = parse_double(key, value);
    else if (key == "timing.t_fixed_ms")
      cfg.selection.timing.t_fixed_ms = parse_double(key, value);
    else if (key == "simulate.rounds") cfg.simulate_rounds = parse_int(key, value);
    else if (key == "simulate.write_path_reports")
      cfg.write_path_reports = parse_bool(key, value);
    else if (key == "evaluate.user_counts")
      cfg.evaluate_user_counts = parse_int_list(key, value);
    else if (key == "evaluate.classifiers") {
      cfg.evaluate_classifiers.clear();
      for (const auto& name : split(value, ','))
        cfg.evaluate_classifiers.push_back(classifier_from_string(trim(name)));
    } else if (key == "timing_sweep.user_counts")
      cfg.timing_sweep_user_counts = parse_int_list(key, value);
    else if (key == "runtime.threads") cfg.threads = parse_int(key, value);
    else
      throw ConfigError("unknown config key '" + key + "' (line " +
                        std::to_string(line_no) + ")");
  }
  validate_run_config(cfg);
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return parse_run_config_text(text);
}

void validate_run_config(const RunConfig& cfg) {
  if (!(cfg.region.width > 0.0) || !(cfg.region.height > 0.0))
    throw ConfigError("scenario region must have positive dimensions");
  if (cfg.n_sus < 1) throw ConfigError("scenario.n_sus must be >= 1");
  const auto mix = cfg.mix_fractions();
  double sum = 0.0;
  for (double f : mix) {
    if (f < 0.0) throw ConfigError("profile mix fractions must be >= 0");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ConfigError("profile mix fractions must sum to 1");
  if (cfg.label_noise < 0.0 || cfg.label_noise > 0.2)
    throw ConfigError("profiles.label_noise must lie in [0, 0.2]");
  if (cfg.n_samples <= 0) throw ConfigError("dataset.n_samples must be > 0");
  if (cfg.train_fraction <= 0.0 || cfg.train_fraction >= 1.0)
    throw ConfigError("dataset.train_fraction must lie in (0, 1)");
  const auto& rp = cfg.classifier_settings.rprop;
  if (!(0.0 < rp.eta_minus && rp.eta_minus < 1.0 && 1.0 < rp.eta_plus))
    throw ConfigError("mlp eta values must satisfy 0 < eta_minus < 1 < eta_plus");
  if (!(rp.delta_min > 0.0 && rp.delta_min <= rp.delta_init &&
        rp.delta_init <= rp.delta_max))
    throw ConfigError("mlp delta values must satisfy 0 < delta_min <= delta_init <= delta_max");
  if (rp.max_epochs < 0) throw ConfigError("mlp.max_epochs must be >= 0");
  if (cfg.classifier_settings.mlp_hidden < 1)
    throw ConfigError("mlp.hidden must be >= 1");
  if (!(cfg.classifier_settings.smo.kkt_tolerance > 0.0))
    throw ConfigError("svm.kkt_tolerance must be > 0");
  if (cfg.classifier_settings.grid.folds < 2)
    throw ConfigError("svm.folds must be >= 2");
  if (cfg.classifier_settings.grid.c_grid.empty() ||
      cfg.classifier_settings.grid.gamma_grid.empty())
    throw ConfigError("svm grids must not be empty");
  for (double c : cfg.classifier_settings.grid.c_grid)
    if (!(c > 0.0)) throw ConfigError("svm.c_grid entries must be > 0");
  for (double g : cfg.classifier_settings.grid.gamma_grid)
    if (!(g > 0.0)) throw ConfigError("svm.gamma_grid entries must be > 0");
  if (cfg.selection.link.path_loss_exponent < 2.0)
    throw ConfigError("channel.path_loss_exponent must be >= 2");
  if (cfg.selection.probe_seq_len < 1000)
    throw ConfigError("channel.probe_seq_len must be >= 1000");
  if (!(cfg.selection.ber_threshold > 0.0))
    throw ConfigError("channel.ber_threshold must be > 0");
  if (cfg.selection.n_rx_antennas < 1)
    throw ConfigError("selection.n_rx_antennas must be >= 1");
  const auto& t = cfg.selection.timing;
  if (t.t_poll_per_user_ms < 0.0 || t.t_predict_per_user_ms < 0.0 ||
      t.t_fixed_ms < 0.0)
    throw ConfigError("timing constants must be >= 0");
  if (cfg.simulate_rounds < 1) throw ConfigError("simulate.rounds must be >= 1");
  if (cfg.evaluate_user_counts.empty())
    throw ConfigError("evaluate.user_counts must not be empty");
  if (cfg.evaluate_classifiers.empty())
    throw ConfigError("evaluate.classifiers must not be empty");
  if (cfg.threads < 0) throw ConfigError("runtime.threads must be >= 0");
}

}  // namespace vmimo
