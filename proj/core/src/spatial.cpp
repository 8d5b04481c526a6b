#include "vmimo/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

#include "vmimo/behavior.hpp"
#include "vmimo/errors.hpp"

namespace vmimo {

std::vector<Point2D> sample_ppp(double intensity, const Rect& region,
                                RngStream& rng) {
  if (!std::isfinite(intensity) || intensity < 0.0)
    throw ConfigError("PPP intensity must be finite and >= 0");
  if (!(region.area() > 0.0) || !std::isfinite(region.area()))
    throw ConfigError("PPP region must have positive finite area");

  const auto count = rng.poisson(intensity * region.area());
  std::vector<Point2D> points;
  points.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const double x = rng.uniform(0.0, region.width);
    const double y = rng.uniform(0.0, region.height);
    points.push_back({x, y});
  }
  return points;
}

std::vector<int> assign_nearest(std::span<const Point2D> points,
                                std::span<const Point2D> sites) {
  if (sites.empty())
    throw std::invalid_argument("assign_nearest: no sites available");
  std::vector<int> assignment(points.size(), 0);
  for (std::size_t p = 0; p < points.size(); ++p) {
    int best = 0;
    double best_d2 = squared_distance(points[p], sites[0]);
    for (std::size_t s = 1; s < sites.size(); ++s) {
      const double d2 = squared_distance(points[p], sites[s]);
      if (d2 < best_d2) {  // strict: equidistant keeps the lower index
        best_d2 = d2;
        best = static_cast<int>(s);
      }
    }
    assignment[p] = best;
  }
  return assignment;
}

Scenario build_scenario(const ScenarioConfig& config, std::uint64_t seed) {
  RngStream root(seed);
  Scenario scenario;
  scenario.region = config.region;
  scenario.rng_seed = seed;

  if (config.single_cell) {
    scenario.enbs = {config.region.center()};
  } else {
    auto enb_rng = root.child(1);
    scenario.enbs = sample_ppp(config.enb_intensity, config.region, enb_rng);
    if (scenario.enbs.empty())
      throw ConfigError("multi-cell scenario drew zero eNBs; raise enb_intensity");
  }

  auto user_rng = root.child(2);
  std::vector<Point2D> users;
  if (config.n_users_override >= 0) {
    users.reserve(config.n_users_override);
    for (int i = 0; i < config.n_users_override; ++i)
      users.push_back({user_rng.uniform(0.0, config.region.width),
                       user_rng.uniform(0.0, config.region.height)});
  } else {
    users = sample_ppp(config.user_intensity, config.region, user_rng);
  }
  const int n_users = static_cast<int>(users.size());
  if (config.n_sus < 1) throw ConfigError("n_sus must be >= 1");
  if (n_users < config.n_sus)
    throw ConfigError("scenario has fewer users than requested SUs");

  // Any user can become an SU: seeded draw without replacement.
  auto su_rng = root.child(3);
  std::vector<int> order(n_users);
  std::iota(order.begin(), order.end(), 0);
  su_rng.shuffle(order);
  std::vector<bool> is_su(n_users, false);
  for (int k = 0; k < config.n_sus; ++k) is_su[order[k]] = true;

  for (int id = 0; id < n_users; ++id) {
    if (is_su[id]) {
      scenario.su_ids.push_back(id);
      scenario.su_positions.push_back(users[id]);
    } else {
      scenario.inactive_users.push_back({id, users[id], 0});
    }
  }

  auto profile_rng = root.child(4);
  const auto profiles = allocate_profile_mix(
      static_cast<int>(scenario.inactive_users.size()), config.profile_mix,
      profile_rng);
  for (std::size_t i = 0; i < scenario.inactive_users.size(); ++i)
    scenario.inactive_users[i].profile_id = profiles[i];

  const auto enb_of_user = assign_nearest(users, scenario.enbs);
  for (int id = 0; id < n_users; ++id) scenario.enb_assignment[id] = enb_of_user[id];

  std::vector<Point2D> inactive_positions;
  inactive_positions.reserve(scenario.inactive_users.size());
  for (const auto& u : scenario.inactive_users)
    inactive_positions.push_back(u.position);
  const auto su_of_user = assign_nearest(inactive_positions, scenario.su_positions);
  for (std::size_t i = 0; i < scenario.inactive_users.size(); ++i)
    scenario.vaa_assignment[scenario.inactive_users[i].id] =
        scenario.su_ids[su_of_user[i]];

  return scenario;
}

std::vector<int> filter_vaa_members(const Scenario& scenario, int su_id) {
  if (std::find(scenario.su_ids.begin(), scenario.su_ids.end(), su_id) ==
      scenario.su_ids.end())
    throw std::invalid_argument("filter_vaa_members: unknown SU id " +
                                std::to_string(su_id));
  std::vector<int> members;
  for (const auto& [user_id, assigned_su] : scenario.vaa_assignment)
    if (assigned_su == su_id) members.push_back(user_id);
  // std::map iteration is already ascending by id.
  return members;
}

std::string scenario_to_json(const Scenario& scenario) {
  nlohmann::json j;
  j["region"] = {{"width", scenario.region.width},
                 {"height", scenario.region.height}};
  j["rng_seed"] = scenario.rng_seed;
  auto& enbs = j["enbs"] = nlohmann::json::array();
  for (std::size_t i = 0; i < scenario.enbs.size(); ++i)
    enbs.push_back({{"id", i}, {"x", scenario.enbs[i].x}, {"y", scenario.enbs[i].y}});
  auto& sus = j["sus"] = nlohmann::json::array();
  for (std::size_t i = 0; i < scenario.su_ids.size(); ++i)
    sus.push_back({{"id", scenario.su_ids[i]},
                   {"x", scenario.su_positions[i].x},
                   {"y", scenario.su_positions[i].y}});
  auto& users = j["inactive_users"] = nlohmann::json::array();
  for (const auto& u : scenario.inactive_users)
    users.push_back({{"id", u.id},
                     {"x", u.position.x},
                     {"y", u.position.y},
                     {"profile_id", u.profile_id}});
  auto& enb_map = j["enb_assignment"] = nlohmann::json::object();
  for (const auto& [id, enb] : scenario.enb_assignment)
    enb_map[std::to_string(id)] = enb;
  auto& vaa_map = j["vaa_assignment"] = nlohmann::json::object();
  for (const auto& [id, su] : scenario.vaa_assignment)
    vaa_map[std::to_string(id)] = su;
  return j.dump(2);
}

Scenario scenario_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  Scenario scenario;
  scenario.region = {j.at("region").at("width").get<double>(),
                     j.at("region").at("height").get<double>()};
  scenario.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  for (const auto& e : j.at("enbs"))
    scenario.enbs.push_back({e.at("x").get<double>(), e.at("y").get<double>()});
  for (const auto& s : j.at("sus")) {
    scenario.su_ids.push_back(s.at("id").get<int>());
    scenario.su_positions.push_back(
        {s.at("x").get<double>(), s.at("y").get<double>()});
  }
  for (const auto& u : j.at("inactive_users"))
    scenario.inactive_users.push_back({u.at("id").get<int>(),
                                       {u.at("x").get<double>(), u.at("y").get<double>()},
                                       u.at("profile_id").get<int>()});
  for (const auto& [key, value] : j.at("enb_assignment").items())
    scenario.enb_assignment[std::stoi(key)] = value.get<int>();
  for (const auto& [key, value] : j.at("vaa_assignment").items())
    scenario.vaa_assignment[std::stoi(key)] = value.get<int>();
  return scenario;
}

}  // namespace vmimo
