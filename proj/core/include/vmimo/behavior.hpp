#pragma once

#include <array>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "vmimo/rng.hpp"

namespace vmimo {

/// Query point for one willingness decision. Battery and incentive are
/// normalized to [0,1]; time is an opaque zone id 1..10; day 1..7, 1=Mon.
struct WillingnessContext {
  double battery = 0.0;
  int time_zone = 1;
  int day = 1;
  double incentive = 0.0;
};

bool context_valid(const WillingnessContext& ctx);

/// One Yes-row conjunction: willing iff battery and incentive clear their
/// thresholds, the zone is not blacklisted and the day is whitelisted.
struct WillingnessRule {
  double battery_min = 0.0;
  std::set<int> unwilling_time_zones;
  std::set<int> willing_days;
  double incentive_min = 0.0;

  bool matches(const WillingnessContext& ctx) const {
    return ctx.battery >= battery_min &&
           unwilling_time_zones.count(ctx.time_zone) == 0 &&
           willing_days.count(ctx.day) != 0 && ctx.incentive >= incentive_min;
  }
};

enum class ProfileCategory { HH, OU, ST, Custom };

/// Ground-truth behavior pattern of one user type. A user is willing iff
/// any rule matches (ST2 carries two rules, the others one); the final
/// label is flipped with probability label_noise.
struct UserProfile {
  ProfileCategory category = ProfileCategory::Custom;
  std::string name = "custom";
  std::vector<WillingnessRule> rules;
  double label_noise = 0.0;  // in [0, 0.2]
};

UserProfile hh1_profile(double label_noise = 0.0);
UserProfile ou1_profile(double label_noise = 0.0);
UserProfile st2_profile(double label_noise = 0.0);

/// Noise-free rule label: +1 willing, -1 unwilling.
int rule_label(const UserProfile& profile, const WillingnessContext& ctx);

/// Rule label with the profile's noise flip applied.
int decide_willingness(const UserProfile& profile, const WillingnessContext& ctx,
                       RngStream& rng);

// Feature layout: battery | one-hot zone (10) | one-hot day (7) | incentive.
inline constexpr int kFeatureDim = 19;
using FeatureVector = std::array<double, kFeatureDim>;

FeatureVector encode_features(const WillingnessContext& ctx);

/// Recovers (time_zone, day) from the one-hot blocks.
std::pair<int, int> decode_discrete(const FeatureVector& features);

struct Sample {
  FeatureVector features{};
  int label = -1;  // +1 willing, -1 unwilling
  WillingnessContext context;
};

WillingnessContext sample_context(RngStream& rng);

/// Uniform contexts labeled by decide_willingness. For n >= 50 both classes
/// are guaranteed present (offending samples are redrawn); a profile whose
/// rule admits only one class over the whole context space is an error.
std::vector<Sample> generate_dataset(const UserProfile& profile, int n_samples,
                                     RngStream& rng);

/// Per-component affine map to [-1, 1] fit on training data; constant
/// components map to 0. Values outside the training range may exceed
/// [-1, 1] when applied to unseen data.
class Scaler {
 public:
  static Scaler fit(std::span<const Sample> dataset);
  static Scaler fit_vectors(std::span<const FeatureVector> features);

  FeatureVector apply(const FeatureVector& features) const;
  double apply_component(int index, double value) const;
  double invert_component(int index, double scaled) const;
  bool component_constant(int index) const;

  const FeatureVector& minimums() const { return lo_; }
  const FeatureVector& maximums() const { return hi_; }

 private:
  FeatureVector lo_{};
  FeatureVector hi_{};
};

void write_dataset_csv(const std::filesystem::path& path,
                       std::span<const Sample> dataset);
std::vector<Sample> read_dataset_csv(const std::filesystem::path& path);

/// Deals n slots to the mix fractions (must sum to 1) by largest-remainder
/// apportionment, then shuffles which slot gets which profile id.
std::vector<int> allocate_profile_mix(int n, std::span<const double> fractions,
                                      RngStream& rng);

}  // namespace vmimo
