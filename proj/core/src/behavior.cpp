#include "vmimo/behavior.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "vmimo/errors.hpp"
#include "vmimo/textio.hpp"

namespace vmimo {
namespace {

constexpr int kZoneCount = 10;
constexpr int kDayCount = 7;
constexpr int kMaxRedraws = 100000;

void check_profile(const UserProfile& profile) {
  if (profile.rules.empty())
    throw ConfigError("profile '" + profile.name + "' has no rules");
  if (profile.label_noise < 0.0 || profile.label_noise > 0.2)
    throw ConfigError("label_noise must lie in [0, 0.2]");
  for (const auto& rule : profile.rules) {
    if (rule.willing_days.empty())
      throw ConfigError("profile '" + profile.name + "' rule has empty willing_days");
    if (rule.battery_min < 0.0 || rule.battery_min > 1.0 ||
        rule.incentive_min < 0.0 || rule.incentive_min > 1.0)
      throw ConfigError("profile thresholds must lie in [0, 1]");
  }
}

// Positive-measure satisfiability under uniform context sampling.
bool rule_satisfiable(const WillingnessRule& rule) {
  return rule.battery_min < 1.0 && rule.incentive_min < 1.0 &&
         !rule.willing_days.empty() &&
         static_cast<int>(rule.unwilling_time_zones.size()) < kZoneCount;
}

std::set<int> day_range(int first, int last) {
  std::set<int> days;
  for (int d = first; d <= last; ++d) days.insert(d);
  return days;
}

}  // namespace

bool context_valid(const WillingnessContext& ctx) {
  return std::isfinite(ctx.battery) && ctx.battery >= 0.0 && ctx.battery <= 1.0 &&
         ctx.time_zone >= 1 && ctx.time_zone <= kZoneCount && ctx.day >= 1 &&
         ctx.day <= kDayCount && std::isfinite(ctx.incentive) &&
         ctx.incentive >= 0.0 && ctx.incentive <= 1.0;
}

UserProfile hh1_profile(double label_noise) {
  UserProfile p;
  p.category = ProfileCategory::HH;
  p.name = "HH1";
  p.rules = {{0.3, {3}, day_range(1, 5), 0.5}};
  p.label_noise = label_noise;
  return p;
}

UserProfile ou1_profile(double label_noise) {
  UserProfile p;
  p.category = ProfileCategory::OU;
  p.name = "OU1";
  p.rules = {{0.6, {3, 9}, day_range(1, 6), 0.6}};
  p.label_noise = label_noise;
  return p;
}

UserProfile st2_profile(double label_noise) {
  UserProfile p;
  p.category = ProfileCategory::ST;
  p.name = "ST2";
  // The only double-Yes row pair: weekday rule or the stricter weekend rule.
  p.rules = {{0.3, {4, 5}, day_range(1, 4), 0.3},
             {0.7, {3, 7, 8}, day_range(5, 7), 0.7}};
  p.label_noise = label_noise;
  return p;
}

int rule_label(const UserProfile& profile, const WillingnessContext& ctx) {
  if (!context_valid(ctx))
    throw std::invalid_argument("rule_label: context out of range");
  for (const auto& rule : profile.rules)
    if (rule.matches(ctx)) return +1;
  return -1;
}

int decide_willingness(const UserProfile& profile, const WillingnessContext& ctx,
                       RngStream& rng) {
  const int base = rule_label(profile, ctx);
  const bool flip = rng.bernoulli(profile.label_noise);
  return flip ? -base : base;
}

FeatureVector encode_features(const WillingnessContext& ctx) {
  if (!context_valid(ctx))
    throw std::invalid_argument("encode_features: context out of range");
  FeatureVector f{};
  f[0] = ctx.battery;
  f[1 + (ctx.time_zone - 1)] = 1.0;
  f[1 + kZoneCount + (ctx.day - 1)] = 1.0;
  f[kFeatureDim - 1] = ctx.incentive;
  return f;
}

std::pair<int, int> decode_discrete(const FeatureVector& features) {
  int zone = 0;
  int day = 0;
  for (int z = 0; z < kZoneCount; ++z)
    if (features[1 + z] == 1.0) zone = z + 1;
  for (int d = 0; d < kDayCount; ++d)
    if (features[1 + kZoneCount + d] == 1.0) day = d + 1;
  if (zone == 0 || day == 0)
    throw std::invalid_argument("decode_discrete: malformed one-hot blocks");
  return {zone, day};
}

WillingnessContext sample_context(RngStream& rng) {
  WillingnessContext ctx;
  ctx.battery = rng.uniform01();
  ctx.time_zone = rng.uniform_int(1, kZoneCount);
  ctx.day = rng.uniform_int(1, kDayCount);
  ctx.incentive = rng.uniform01();
  return ctx;
}

std::vector<Sample> generate_dataset(const UserProfile& profile, int n_samples,
                                     RngStream& rng) {
  if (n_samples <= 0) throw ConfigError("generate_dataset: n_samples must be > 0");
  check_profile(profile);
  if (std::none_of(profile.rules.begin(), profile.rules.end(), rule_satisfiable))
    throw ConfigError("profile '" + profile.name +
                      "' is unsatisfiable over the context space");

  auto draw = [&]() {
    Sample s;
    s.context = sample_context(rng);
    s.features = encode_features(s.context);
    s.label = decide_willingness(profile, s.context, rng);
    return s;
  };

  std::vector<Sample> dataset;
  dataset.reserve(n_samples);
  for (int i = 0; i < n_samples; ++i) dataset.push_back(draw());

  if (n_samples >= 50) {
    auto count_of = [&](int label) {
      return std::count_if(dataset.begin(), dataset.end(),
                           [&](const Sample& s) { return s.label == label; });
    };
    int redraws = 0;
    while (count_of(+1) == 0 || count_of(-1) == 0) {
      const int missing = count_of(+1) == 0 ? +1 : -1;
      // Replace majority samples from the back until the missing class shows.
      for (int i = n_samples - 1; i >= 0 && count_of(missing) == 0; --i) {
        dataset[i] = draw();
        if (++redraws > kMaxRedraws)
          throw ConfigError("profile '" + profile.name +
                            "' produced a single-class dataset; rule is degenerate");
      }
    }
  }
  return dataset;
}

Scaler Scaler::fit(std::span<const Sample> dataset) {
  std::vector<FeatureVector> features;
  features.reserve(dataset.size());
  for (const auto& s : dataset) features.push_back(s.features);
  return fit_vectors(features);
}

Scaler Scaler::fit_vectors(std::span<const FeatureVector> features) {
  if (features.empty()) throw std::invalid_argument("Scaler::fit: empty dataset");
  Scaler scaler;
  scaler.lo_ = features.front();
  scaler.hi_ = features.front();
  for (const auto& f : features)
    for (int i = 0; i < kFeatureDim; ++i) {
      scaler.lo_[i] = std::min(scaler.lo_[i], f[i]);
      scaler.hi_[i] = std::max(scaler.hi_[i], f[i]);
    }
  return scaler;
}

double Scaler::apply_component(int index, double value) const {
  const double lo = lo_[index];
  const double hi = hi_[index];
  if (lo == hi) return 0.0;
  return 2.0 * (value - lo) / (hi - lo) - 1.0;
}

double Scaler::invert_component(int index, double scaled) const {
  const double lo = lo_[index];
  const double hi = hi_[index];
  if (lo == hi)
    throw std::invalid_argument("Scaler: constant component is not invertible");
  return lo + (scaled + 1.0) / 2.0 * (hi - lo);
}

bool Scaler::component_constant(int index) const {
  return lo_[index] == hi_[index];
}

FeatureVector Scaler::apply(const FeatureVector& features) const {
  FeatureVector out{};
  for (int i = 0; i < kFeatureDim; ++i) out[i] = apply_component(i, features[i]);
  return out;
}

void write_dataset_csv(const std::filesystem::path& path,
                       std::span<const Sample> dataset) {
  std::ostringstream out;
  out << "battery,time_zone,day,incentive,label\n";
  for (const auto& s : dataset)
    out << format_g6(s.context.battery) << ',' << s.context.time_zone << ','
        << s.context.day << ',' << format_g6(s.context.incentive) << ','
        << s.label << '\n';
  write_text_file(path, out.str());
}

std::vector<int> allocate_profile_mix(int n, std::span<const double> fractions,
                                      RngStream& rng) {
  if (fractions.empty()) throw ConfigError("profile mix must not be empty");
  double sum = 0.0;
  for (double f : fractions) {
    if (f < 0.0) throw ConfigError("profile mix fractions must be >= 0");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ConfigError("profile mix fractions must sum to 1");

  std::vector<int> counts(fractions.size(), 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  int assigned = 0;
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    const double share = fractions[i] * n;
    counts[i] = static_cast<int>(std::floor(share));
    assigned += counts[i];
    remainders.emplace_back(share - counts[i], i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int k = 0; k < n - assigned; ++k) counts[remainders[k].second]++;

  std::vector<int> slots;
  slots.reserve(n);
  for (std::size_t i = 0; i < counts.size(); ++i)
    slots.insert(slots.end(), counts[i], static_cast<int>(i));
  rng.shuffle(slots);
  return slots;
}

std::vector<Sample> read_dataset_csv(const std::filesystem::path& path) {
  const auto text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "battery,time_zone,day,incentive,label")
    throw ConfigError("dataset CSV header mismatch in " + path.string());
  std::vector<Sample> dataset;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 5)
      throw ConfigError("dataset CSV row needs 5 fields in " + path.string());
    Sample s;
    s.context.battery = std::stod(fields[0]);
    s.context.time_zone = std::stoi(fields[1]);
    s.context.day = std::stoi(fields[2]);
    s.context.incentive = std::stod(fields[3]);
    s.label = std::stoi(fields[4]);
    if (s.label != 1 && s.label != -1)
      throw ConfigError("dataset CSV label must be +1 or -1");
    s.features = encode_features(s.context);
    dataset.push_back(s);
  }
  return dataset;
}

}  // namespace vmimo
