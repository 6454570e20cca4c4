// Copyright 2026 The DiffRoad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "diffroad/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "diffroad/error.hpp"
#include "diffroad/geometry.hpp"

namespace diffroad::terrain
{

using nlohmann::json;

void TerrainConfig::validate() const
{
  if (!(speed > 0.0) || !(mass > 0.0) || !(max_lateral_force > 0.0)) {
    throw Error(ErrorKind::kConfig, "terrain: speed, mass and lateral force must be positive");
  }
  if (!(rho_max > 0.0 && rho_max <= 0.15)) {
    throw Error(ErrorKind::kConfig, "terrain: rho_max must be in (0, 0.15]");
  }
  if (smoothing_window < 1 || smoothing_window % 2 == 0) {
    throw Error(ErrorKind::kConfig, "terrain: smoothing_window must be odd and positive");
  }
  if (!(flyover_clearance >= 0.0)) {
    throw Error(ErrorKind::kConfig, "terrain: flyover_clearance must be non-negative");
  }
}

json TerrainConfig::to_json() const
{
  return {{"speed", speed},
          {"mass", mass},
          {"max_lateral_force", max_lateral_force},
          {"rho_max", rho_max},
          {"smoothing_window", smoothing_window},
          {"flyover_clearance", flyover_clearance}};
}

TerrainConfig TerrainConfig::from_json(const json & j)
{
  TerrainConfig c;
  c.speed = j.value("speed", c.speed);
  c.mass = j.value("mass", c.mass);
  c.max_lateral_force = j.value("max_lateral_force", 0.3 * c.mass * kGravity);
  c.rho_max = j.value("rho_max", c.rho_max);
  c.smoothing_window = j.value("smoothing_window", c.smoothing_window);
  c.flyover_clearance = j.value("flyover_clearance", c.flyover_clearance);
  return c;
}

std::vector<double> menger_curvature(std::span<const Vec2> line)
{
  const std::size_t m = line.size();
  if (m < 2) {
    throw Error(ErrorKind::kInvalidArgument, "curvature: need at least 2 points");
  }
  for (std::size_t i = 0; i + 1 < m; ++i) {
    if (line[i] == line[i + 1]) {
      throw Error(ErrorKind::kInvalidArgument,
                  "curvature: duplicate consecutive points at index " + std::to_string(i));
    }
  }
  std::vector<double> kappa(m, 0.0);
  if (m < 3) {
    return kappa;
  }
  for (std::size_t i = 1; i + 1 < m; ++i) {
    const Vec2 a = line[i - 1];
    const Vec2 b = line[i];
    const Vec2 c = line[i + 1];
    const double chord = distance(a, c);
    if (chord == 0.0) {
      kappa[i] = std::numeric_limits<double>::infinity();  // the road doubles back on itself
      continue;
    }
    const double twice_area = std::abs(cross(b - a, c - a));
    kappa[i] = 2.0 * twice_area / (distance(a, b) * distance(b, c) * chord);
  }
  kappa[0] = kappa[1];
  kappa[m - 1] = kappa[m - 2];
  return kappa;
}

std::vector<double> slope_profile(std::span<const Vec2> line, const TerrainConfig & config)
{
  config.validate();
  const auto kappa = menger_curvature(line);
  const double denom = config.mass * config.speed * config.speed;
  std::vector<double> raw(kappa.size());
  for (std::size_t i = 0; i < kappa.size(); ++i) {
    const double c =
      kappa[i] == 0.0 ? 1.0 : std::clamp(config.max_lateral_force / (kappa[i] * denom), 0.0, 1.0);
    raw[i] = std::min(std::tan(std::acos(c)), config.rho_max);
  }
  const auto half = static_cast<std::ptrdiff_t>(config.smoothing_window / 2);
  const auto m = static_cast<std::ptrdiff_t>(raw.size());
  std::vector<double> rho(raw.size());
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - half);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(m - 1, i + half);
    double sum = 0.0;
    for (std::ptrdiff_t j = lo; j <= hi; ++j) {
      sum += raw[static_cast<std::size_t>(j)];
    }
    rho[static_cast<std::size_t>(i)] = std::min(sum / static_cast<double>(hi - lo + 1), config.rho_max);
  }
  return rho;
}

std::vector<double> elevation_profile(std::span<const double> rho, std::span<const Vec2> line)
{
  if (rho.size() != line.size()) {
    throw Error(ErrorKind::kInvalidArgument, "elevation: slope and polyline lengths differ");
  }
  std::vector<double> z(line.size(), 0.0);
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    z[i + 1] = z[i] + rho[i] * distance(line[i], line[i + 1]);
  }
  return z;
}

std::vector<double> ramp_profile(std::span<const Vec2> line, double clearance, double rho_max)
{
  std::vector<double> s(line.size(), 0.0);
  for (std::size_t i = 1; i < line.size(); ++i) {
    s[i] = s[i - 1] + distance(line[i - 1], line[i]);
  }
  const double total = s.empty() ? 0.0 : s.back();
  std::vector<double> z(line.size());
  for (std::size_t i = 0; i < line.size(); ++i) {
    z[i] = std::min({clearance, rho_max * s[i], rho_max * (total - s[i])});
  }
  return z;
}

Scenario3d lift_scenario(const MetricScenario & scenario, const TerrainConfig & config)
{
  config.validate();
  Scenario3d out;
  out.plan = scenario;
  std::size_t ramp_road = scenario.roads.size();
  if (scenario.type == ScenarioType::kFlyover && config.flyover_clearance > 0.0) {
    double longest = -1.0;
    for (std::size_t r = 0; r < scenario.roads.size(); ++r) {
      const double len = geometry::polyline_length(scenario.roads[r]);
      if (len > longest) {
        longest = len;
        ramp_road = r;
      }
    }
  }
  for (std::size_t r = 0; r < scenario.roads.size(); ++r) {
    const auto & line = scenario.roads[r];
    const auto rho = slope_profile(line, config);
    if (r != ramp_road) {
      out.elevation.push_back(elevation_profile(rho, line));
      continue;
    }
    const auto ramp = ramp_profile(line, config.flyover_clearance, config.rho_max);
    std::vector<double> z(line.size(), 0.0);
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
      const double ds = distance(line[i], line[i + 1]);
      const double dz = rho[i] * ds + (ramp[i + 1] - ramp[i]);
      z[i + 1] = z[i] + std::clamp(dz, -config.rho_max * ds, config.rho_max * ds);
    }
    out.elevation.push_back(std::move(z));
  }
  return out;
}

double max_gradient(const Scenario3d & scenario)
{
  double worst = 0.0;
  for (std::size_t r = 0; r < scenario.plan.roads.size(); ++r) {
    const auto & line = scenario.plan.roads[r];
    const auto & z = scenario.elevation.at(r);
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
      const double ds = distance(line[i], line[i + 1]);
      if (ds > 0.0) {
        worst = std::max(worst, std::abs(z[i + 1] - z[i]) / ds);
      }
    }
  }
  return worst;
}

}  // namespace diffroad::terrain
