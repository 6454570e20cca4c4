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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "diffroad/error.hpp"
#include "diffroad/rng.hpp"
#include "diffroad/terrain.hpp"

using namespace diffroad;
using namespace diffroad::terrain;

namespace
{

Polyline circle_arc(double radius, int points, double sweep)
{
  Polyline out;
  for (int i = 0; i < points; ++i) {
    const double a = sweep * i / (points - 1);
    out.push_back({radius * std::cos(a), radius * std::sin(a)});
  }
  return out;
}

Polyline straight(double length, int points)
{
  Polyline out;
  for (int i = 0; i < points; ++i) {
    out.push_back({length * i / (points - 1), 0.0});
  }
  return out;
}

}  // namespace

TEST_CASE("Menger curvature")
{
  SUBCASE("collinear points")
  {
    for (double k : menger_curvature(straight(100.0, 11))) {
      CHECK(k == 0.0);
    }
  }
  SUBCASE("circle of radius 50 m")
  {
    for (double k : menger_curvature(circle_arc(50.0, 40, 2.0))) {
      CHECK(std::abs(k - 0.02) < 1e-6);
    }
  }
  SUBCASE("scaling by two halves curvature")
  {
    Polyline line = {{0, 0}, {3, 1}, {5, 4}, {6, 9}, {9, 10}};
    const auto k1 = menger_curvature(line);
    for (auto & p : line) {
      p = 2.0 * p;
    }
    const auto k2 = menger_curvature(line);
    for (std::size_t i = 0; i < k1.size(); ++i) {
      CHECK(k2[i] == doctest::Approx(k1[i] / 2.0).epsilon(1e-12));
    }
  }
  SUBCASE("endpoints copy their neighbour")
  {
    const Polyline line = {{0, 0}, {1, 0}, {2, 1}, {2, 3}};
    const auto k = menger_curvature(line);
    CHECK(k.front() == k[1]);
    CHECK(k.back() == k[2]);
  }
  SUBCASE("repeated points and reversals")
  {
    const Polyline dup = {{0, 0}, {1, 0}, {1, 0}, {2, 0}};
    CHECK_THROWS_AS(menger_curvature(dup), Error);
    const Polyline back = {{0, 0}, {1, 0}, {0, 0}};
    CHECK(std::isinf(menger_curvature(back)[1]));
  }
}

TEST_CASE("slope profile")
{
  const TerrainConfig cfg;
  SUBCASE("straight road is flat")
  {
    for (double r : slope_profile(straight(200.0, 21), cfg)) {
      CHECK(r == 0.0);
    }
  }
  SUBCASE("100 m radius hits the gradient cap")
  {
    const double c = cfg.max_lateral_force * 100.0 / (cfg.mass * cfg.speed * cfg.speed);
    CHECK(c == doctest::Approx(0.596).epsilon(1e-3));
    CHECK(std::tan(std::acos(c)) == doctest::Approx(1.35).epsilon(5e-3));
    for (double r : slope_profile(circle_arc(100.0, 30, 1.5), cfg)) {
      CHECK(r == doctest::Approx(0.05).epsilon(1e-12));
    }
  }
  SUBCASE("gentle curve is below the cap")
  {
    // tan(acos(c)) < 0.05 needs c > 0.99875, i.e. r > 1.99875 / (F / (m v^2))
    const double r = 2.0 * cfg.mass * cfg.speed * cfg.speed / cfg.max_lateral_force;
    const double c = cfg.max_lateral_force * r / (cfg.mass * cfg.speed * cfg.speed);
    const auto rho = slope_profile(circle_arc(r, 30, 0.3), cfg);
    CHECK(rho[15] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(c >= 1.0);
  }
  SUBCASE("default regulation values")
  {
    CHECK(cfg.rho_max == 0.05);
    CHECK(cfg.speed * 3.6 == doctest::Approx(80.0).epsilon(1e-3));
    CHECK(cfg.max_lateral_force == doctest::Approx(4414.5).epsilon(1e-3));
  }
}

TEST_CASE("elevation integration")
{
  const auto line = straight(100.0, 11);
  const std::vector<double> zero(11, 0.0);
  for (double z : elevation_profile(zero, line)) {
    CHECK(z == 0.0);
  }
  const std::vector<double> five(11, 0.05);
  const auto z = elevation_profile(five, line);
  CHECK(z.back() == doctest::Approx(5.0).epsilon(1e-12));
  CHECK_THROWS_AS(elevation_profile(std::vector<double>(3, 0.0), line), Error);
}

TEST_CASE("ramp template")
{
  const auto line = straight(400.0, 81);
  const auto z = ramp_profile(line, 5.5, 0.05);
  double top = 0.0;
  for (std::size_t i = 1; i < z.size(); ++i) {
    CHECK(std::abs(z[i] - z[i - 1]) <= 0.05 * 5.0 + 1e-12);
    top = std::max(top, z[i]);
  }
  CHECK(top == doctest::Approx(5.5).epsilon(1e-9));
  CHECK(z.front() == 0.0);
  CHECK(std::abs(z.back()) < 1e-9);
}

TEST_CASE("lifted scenarios respect the gradient bound")
{
  const TerrainConfig cfg;
  RandomStream rng(8);
  for (int s = 0; s < 50; ++s) {
    MetricScenario sc;
    sc.type = static_cast<ScenarioType>(s % 4);
    for (int r = 0; r < 4; ++r) {
      Polyline road;
      Vec2 p{rng.uniform() * 100.0 - 50.0, rng.uniform() * 100.0 - 50.0};
      double heading = rng.uniform() * 6.28;
      for (int i = 0; i < 40; ++i) {
        road.push_back(p);
        heading += (rng.uniform() - 0.5) * 0.6;
        const double step = 2.0 + 8.0 * rng.uniform();
        p = p + Vec2{step * std::cos(heading), step * std::sin(heading)};
      }
      sc.roads.push_back(road);
    }
    const auto lifted = lift_scenario(sc, cfg);
    REQUIRE(lifted.elevation.size() == 4);
    CHECK(max_gradient(lifted) <= cfg.rho_max + 1e-12);
  }

  MetricScenario flat;
  flat.type = ScenarioType::kIntersection;
  flat.roads = {straight(300.0, 61)};
  const auto lf = lift_scenario(flat, cfg);
  for (double z : lf.elevation[0]) {
    CHECK(z == 0.0);
  }

  MetricScenario fly = flat;
  fly.type = ScenarioType::kFlyover;
  fly.roads.push_back({{150.0, -100.0}, {150.0, 100.0}});
  const auto lfly = lift_scenario(fly, cfg);
  double top = 0.0;
  for (double z : lfly.elevation[0]) {
    top = std::max(top, z);
  }
  CHECK(top == doctest::Approx(cfg.flyover_clearance).epsilon(1e-9));
  CHECK(max_gradient(lfly) <= cfg.rho_max + 1e-12);
}

TEST_CASE("terrain config")
{
  TerrainConfig c;
  CHECK(TerrainConfig::from_json(c.to_json()).to_json() == c.to_json());
  c.rho_max = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = TerrainConfig{};
  c.smoothing_window = 4;
  CHECK_THROWS_AS(c.validate(), Error);
}
