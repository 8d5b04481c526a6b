#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vmimo/geometry.hpp"
#include "vmimo/rng.hpp"

namespace vmimo {

struct ScenarioConfig {
  Rect region{1000.0, 1000.0};
  /// Single-cell mode places exactly one eNB at the region center;
  /// multi-cell mode draws eNB positions from a PPP with enb_intensity.
  bool single_cell = true;
  double enb_intensity = 2e-6;   // eNBs per m^2, multi-cell mode only
  double user_intensity = 1e-4;  // mobile users per m^2 (SUs are drawn from these)
  /// Exact total-user override; < 0 draws the count from the PPP.
  int n_users_override = -1;
  int n_sus = 1;
  /// Fraction of inactive users per profile id; must sum to 1.
  std::vector<double> profile_mix{1.0 / 3, 1.0 / 3, 1.0 / 3};
};

struct InactiveUser {
  int id = 0;
  Point2D position;
  int profile_id = 0;
};

/// Snapshot of one synthesized network. Voronoi cells are implicit:
/// membership is the nearest-site map, no polygon geometry is kept.
struct Scenario {
  Rect region;
  std::uint64_t rng_seed = 0;
  std::vector<Point2D> enbs;  // eNB id = index
  std::vector<int> su_ids;
  std::vector<Point2D> su_positions;         // aligned with su_ids
  std::vector<InactiveUser> inactive_users;  // ascending id
  std::map<int, int> enb_assignment;  // SU/user id -> nearest eNB index
  std::map<int, int> vaa_assignment;  // inactive user id -> nearest SU id
};

/// Homogeneous PPP on the region: Poisson(intensity * area) points,
/// i.i.d. uniform positions. Deterministic per stream.
std::vector<Point2D> sample_ppp(double intensity, const Rect& region,
                                RngStream& rng);

/// Nearest-site index per point (Euclidean); ties resolve to the lowest
/// site index. Throws if sites is empty.
std::vector<int> assign_nearest(std::span<const Point2D> points,
                                std::span<const Point2D> sites);

Scenario build_scenario(const ScenarioConfig& config, std::uint64_t seed);

/// Inactive-user ids in the VAA cell of su_id, ascending.
std::vector<int> filter_vaa_members(const Scenario& scenario, int su_id);

std::string scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const std::string& text);

}  // namespace vmimo
