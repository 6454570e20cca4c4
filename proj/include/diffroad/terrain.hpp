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

#ifndef DIFFROAD__TERRAIN_HPP_
#define DIFFROAD__TERRAIN_HPP_

#include <span>
#include <vector>

#include <json.hpp>

#include "diffroad/scenario.hpp"

/// Lifts planar roads to 3D: curvature-bounded gradients integrated along arc
/// length, with an optional ramp template for flyover scenarios.
namespace diffroad::terrain
{

inline constexpr double kGravity = 9.80665;

struct TerrainConfig
{
  double speed{22.22};                     // m/s
  double mass{1500.0};                     // kg
  double max_lateral_force{0.3 * 1500.0 * kGravity};  // N
  double rho_max{0.05};
  int smoothing_window{5};
  double flyover_clearance{5.5};           // m

  void validate() const;
  nlohmann::json to_json() const;
  static TerrainConfig from_json(const nlohmann::json & j);
};

/// Menger curvature at interior points; endpoints copy their neighbour.
/// Duplicate consecutive points are an error; a full reversal is infinite.
std::vector<double> menger_curvature(std::span<const Vec2> line);

/// Bounded gradient per point, smoothed by a centred moving average.
std::vector<double> slope_profile(std::span<const Vec2> line, const TerrainConfig & config);

/// z_0 = 0, z_{i+1} = z_i + rho_i * ds_i.
std::vector<double> elevation_profile(std::span<const double> rho, std::span<const Vec2> line);

/// Rise to clearance, hold, descend; every step's gradient stays within rho_max.
std::vector<double> ramp_profile(std::span<const Vec2> line, double clearance, double rho_max);

/// Elevation for every road. Flyover scenarios lift their longest road with a
/// ramp template added to the curvature-derived profile, then re-bounded.
Scenario3d lift_scenario(const MetricScenario & scenario, const TerrainConfig & config);

/// Largest |dz/ds| over all segments of a lifted scenario.
double max_gradient(const Scenario3d & scenario);

}  // namespace diffroad::terrain

#endif  // DIFFROAD__TERRAIN_HPP_
