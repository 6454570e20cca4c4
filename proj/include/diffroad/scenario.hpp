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

#ifndef DIFFROAD__SCENARIO_HPP_
#define DIFFROAD__SCENARIO_HPP_

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace diffroad
{

struct Vec2
{
  double x{0.0};
  double y{0.0};

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Vec2 &, const Vec2 &) = default;
};

inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

using Polyline = std::vector<Vec2>;

/// WGS84 position in degrees.
struct ShapePoint
{
  double lat{0.0};
  double lng{0.0};
  friend bool operator==(const ShapePoint &, const ShapePoint &) = default;
};

enum class ScenarioType { kIntersection = 0, kPudo = 1, kRoundabout = 2, kFlyover = 3 };

inline constexpr std::size_t kScenarioTypeCount = 4;
inline constexpr std::array<ScenarioType, kScenarioTypeCount> kAllScenarioTypes = {
  ScenarioType::kIntersection, ScenarioType::kPudo, ScenarioType::kRoundabout,
  ScenarioType::kFlyover};

std::string_view to_string(ScenarioType type) noexcept;
/// Accepts the canonical names ("Intersection", "PUDO", "Roundabout", "Flyover"),
/// case-insensitively. Throws Error(kParse) otherwise.
ScenarioType parse_scenario_type(std::string_view name);

/// Road attributes fed to the denoiser: type one-hot, scale, junction count.
struct ConditionVector
{
  static constexpr std::size_t kSize = kScenarioTypeCount + 2;
  static constexpr double kScaleReferenceMeters = 500.0;
  static constexpr double kJunctionReference = 8.0;

  std::array<double, kScenarioTypeCount> type_onehot{};
  double scale{0.0};
  double junction_count{0.0};

  static ConditionVector make(ScenarioType type, double half_extent_m, int junctions);

  ScenarioType type() const;
  std::array<double, kSize> flatten() const;
  /// Exactly one nonzero one-hot entry and all entries in [0, 1].
  bool valid() const;

  friend bool operator==(const ConditionVector &, const ConditionVector &) = default;
};

/// n roads x k points x 2 normalized coordinates, road-major.
struct RoadScenario
{
  std::size_t n{0};
  std::size_t k{0};
  std::vector<double> points;  // size n * k * 2
  std::vector<bool> valid;     // size n; false marks a zero-padded road
  ShapePoint origin{};
  double half_extent_m{0.0};
  ConditionVector condition{};
  std::string id;

  RoadScenario() = default;
  RoadScenario(std::size_t roads, std::size_t points_per_road)
  : n(roads), k(points_per_road), points(roads * points_per_road * 2, 0.0), valid(roads, false)
  {
  }

  Vec2 at(std::size_t road, std::size_t point) const
  {
    const std::size_t i = (road * k + point) * 2;
    return {points[i], points[i + 1]};
  }
  void set(std::size_t road, std::size_t point, Vec2 v)
  {
    const std::size_t i = (road * k + point) * 2;
    points[i] = v.x;
    points[i + 1] = v.y;
  }
  Polyline road(std::size_t index) const;
  std::size_t valid_count() const;
};

/// Roads of one scenario in local metric coordinates (meters about origin).
struct MetricScenario
{
  std::vector<Polyline> roads;
  ShapePoint origin{};
  ScenarioType type{ScenarioType::kIntersection};
  std::string id;
};

/// A metric scenario lifted to 3D: z per point, aligned with roads.
struct Scenario3d
{
  MetricScenario plan;
  std::vector<std::vector<double>> elevation;
};

}  // namespace diffroad

#endif  // DIFFROAD__SCENARIO_HPP_
