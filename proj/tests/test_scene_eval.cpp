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

#include <algorithm>
#include <cmath>

#include "diffroad/error.hpp"
#include "diffroad/rng.hpp"
#include "diffroad/scene_eval.hpp"

using namespace diffroad;
using namespace diffroad::eval;

namespace
{

Polyline segment(Vec2 a, Vec2 b, int points)
{
  Polyline out;
  for (int i = 0; i < points; ++i) {
    const double u = static_cast<double>(i) / (points - 1);
    out.push_back(a + u * (b - a));
  }
  return out;
}

// Clothoid with curvature a*s, sampled every ds metres.
Polyline clothoid(double a, double length, double ds)
{
  Polyline out = {{0.0, 0.0}};
  Vec2 p{0.0, 0.0};
  const int fine = 200;
  const int n = static_cast<int>(std::round(length / ds));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < fine; ++j) {
      const double s = (i + (j + 0.5) / fine) * ds;
      const double theta = 0.5 * a * s * s;
      p = p + (ds / fine) * Vec2{std::cos(theta), std::sin(theta)};
    }
    out.push_back(p);
  }
  return out;
}

MetricScenario wavy_scenario(std::uint64_t seed)
{
  RandomStream rng(seed);
  MetricScenario s;
  for (int r = 0; r < 3; ++r) {
    Polyline road;
    const double off = 40.0 * r;
    const double amp = 2.0 + 6.0 * rng.uniform();
    for (int i = 0; i < 60; ++i) {
      road.push_back({-150.0 + 5.0 * i, off + amp * std::sin(0.05 * i)});
    }
    s.roads.push_back(road);
  }
  return s;
}

}  // namespace

TEST_CASE("curvature change rate")
{
  CHECK(curvature_change_rate({segment({0, 0}, {100, 0}, 20), segment({0, 10}, {0, 90}, 9)}) == 0.0);

  Polyline arc;
  for (int i = 0; i < 50; ++i) {
    arc.push_back({80.0 * std::cos(0.02 * i), 80.0 * std::sin(0.02 * i)});
  }
  CHECK(curvature_change_rate({arc}) < 1e-9);

  const double a = 1e-3;
  CHECK(curvature_change_rate({clothoid(a, 200.0, 2.0)}) == doctest::Approx(a).epsilon(0.02));

  CHECK_THROWS_AS(curvature_change_rate({segment({0, 0}, {1, 0}, 3)}), Error);
}

TEST_CASE("continuity metric")
{
  CHECK(continuity_metric(0.5, 0.5) == 0.0);
  CHECK(continuity_metric(1.1 * 0.02, 0.02) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(continuity_metric(3.0 * 0.02, 0.02) == 100.0);
  CHECK_THROWS_AS(continuity_metric(1.0, 0.0), Error);
}

TEST_CASE("overlap detection")
{
  const EvalConfig cfg;
  SUBCASE("perpendicular crossing is a junction, not an overlap")
  {
    const std::vector<Polyline> roads = {segment({-100, 0}, {100, 0}, 41), segment({0, -100}, {0, 100}, 41)};
    CHECK(overlapping_roads(roads, cfg).empty());
    CHECK(overlap_metric(roads, cfg) == 0.0);
  }
  SUBCASE("coincident roads both overlap")
  {
    const auto r = segment({-100, 0}, {100, 0}, 41);
    CHECK(overlap_metric({r, r}, cfg) == 100.0);
  }
  SUBCASE("one duplicate among ten roads")
  {
    std::vector<Polyline> roads;
    for (int i = 0; i < 9; ++i) {
      roads.push_back(segment({-100, 20.0 * i}, {100, 20.0 * i}, 41));
    }
    roads.push_back(roads[4]);
    CHECK(overlapping_roads(roads, cfg) == std::vector<std::size_t>{4, 9});
    CHECK(overlap_metric(roads, cfg) == doctest::Approx(20.0));
  }
  SUBCASE("close parallel roads overlap, distant ones do not")
  {
    const auto a = segment({-100, 0}, {100, 0}, 41);
    CHECK(overlap_metric({a, segment({-100, 2.0}, {100, 2.0}, 41)}, cfg) == 100.0);
    CHECK(overlap_metric({a, segment({-100, 8.0}, {100, 8.0}, 41)}, cfg) == 0.0);
  }
  SUBCASE("T junction arms meeting at an endpoint")
  {
    const std::vector<Polyline> roads = {segment({-100, 0}, {100, 0}, 41), segment({0, 0}, {0, 100}, 21)};
    CHECK(overlap_metric(roads, cfg) == 0.0);
  }
  SUBCASE("a self-intersecting road overlaps")
  {
    const Polyline loop = {{0, 0}, {50, 0}, {50, 50}, {25, -20}, {25, -60}};
    CHECK(overlapping_roads({loop, segment({-100, 200}, {100, 200}, 21)}, cfg) == std::vector<std::size_t>{0});
  }
}

TEST_CASE("scene score")
{
  CHECK(scene_score(0.0, 0.0, 1.0) == 100.0);
  CHECK(scene_score(2.5, 10.0, 1.0) == 87.5);
  CHECK(scene_score(100.0, 100.0, 1.0) == 0.0);
  CHECK(scene_score(10.0, 10.0, 0.5) == 85.0);
  CHECK_THROWS_AS(scene_score(0.0, 0.0, -1.0), Error);
}

TEST_CASE("score_scenario")
{
  const EvalConfig cfg;
  auto s = wavy_scenario(1);
  const double ref = curvature_change_rate(s.roads);
  const auto clean = score_scenario(s, ref, cfg);
  CHECK(clean.w1 == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(clean.w2 == 0.0);
  CHECK(clean.S == doctest::Approx(100.0));
  CHECK(clean.accepted);

  MetricScenario empty;
  const auto none = score_scenario(empty, ref, cfg);
  CHECK(none.w1 == 100.0);
  CHECK(none.w2 == 100.0);
  CHECK_FALSE(none.accepted);

  MetricScenario folded;
  folded.roads = {{{0, 0}, {10, 0}, {20, 0}, {10, 0}, {0, 0}, {-10, 5}}};
  CHECK_THROWS_AS(curvature_change_rate(folded.roads), Error);
  const auto reversed = score_scenario(folded, ref, cfg);
  CHECK(reversed.w1 == 100.0);
  CHECK_FALSE(reversed.accepted);
}

TEST_CASE("adding an overlapping road never raises the score")
{
  const EvalConfig cfg;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto s = wavy_scenario(seed);
    const double ref = curvature_change_rate(wavy_scenario(seed + 100).roads);
    const double before = score_scenario(s, ref, cfg).S;
    for (std::size_t r = 0; r < s.roads.size() && s.roads.size() < 8; ++r) {
      s.roads.push_back(s.roads[r]);
      const double after = score_scenario(s, ref, cfg).S;
      CHECK(after <= before);
    }
  }
}

TEST_CASE("filtering is monotone in the threshold")
{
  std::vector<data::LibraryRecord> lib;
  std::vector<data::LibraryRecord> train;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto ms = wavy_scenario(seed);
    data::LibraryRecord rec;
    rec.scenario = RoadScenario(4, 60);
    rec.scenario.half_extent_m = 200.0;
    rec.scenario.condition = ConditionVector::make(static_cast<ScenarioType>(seed % 4), 200.0, 0);
    for (std::size_t r = 0; r < ms.roads.size(); ++r) {
      rec.scenario.valid[r] = true;
      for (std::size_t p = 0; p < 60; ++p) {
        rec.scenario.set(r, p, (1.0 / 200.0) * ms.roads[r][p]);
      }
    }
    if (seed % 3 == 0) {
      rec.scenario.valid[3] = true;
      for (std::size_t p = 0; p < 60; ++p) {
        rec.scenario.set(3, p, rec.scenario.at(0, p));
      }
    }
    (seed <= 8 ? train : lib).push_back(rec);
  }
  const auto refs = reference_rates(train);
  for (double v : refs.by_type) {
    CHECK(v > 0.0);
  }
  std::vector<std::size_t> previous;
  bool first = true;
  for (double s_min : {0.0, 20.0, 50.0, 80.0, 90.0, 95.0, 99.0, 100.0}) {
    EvalConfig cfg;
    cfg.s_min = s_min;
    const auto res = score_and_filter(lib, refs, cfg);
    CHECK(res.scored.size() == lib.size());
    if (!first) {
      CHECK(std::includes(previous.begin(), previous.end(), res.accepted.begin(), res.accepted.end()));
    }
    previous = res.accepted;
    first = false;
    for (const auto & r : res.scored) {
      REQUIRE(r.score.has_value());
      CHECK(r.score->accepted == (r.score->S >= s_min));
    }
  }
  CHECK(ReferenceRates::from_json(refs.to_json()).by_type == refs.by_type);
}

TEST_CASE("eval config")
{
  EvalConfig c;
  CHECK(EvalConfig::from_json(c.to_json()).to_json() == c.to_json());
  c.lambda = -0.1;
  CHECK_THROWS_AS(c.validate(), Error);
}
