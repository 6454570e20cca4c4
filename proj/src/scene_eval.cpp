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

#include "diffroad/scene_eval.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "diffroad/error.hpp"
#include "diffroad/geo.hpp"
#include "diffroad/geometry.hpp"
#include "diffroad/terrain.hpp"

namespace diffroad::eval
{

using nlohmann::json;

void EvalConfig::validate() const
{
  if (!(lambda >= 0.0)) {
    throw Error(ErrorKind::kConfig, "evaluation: lambda must be >= 0");
  }
  if (!(s_min >= 0.0 && s_min <= 100.0)) {
    throw Error(ErrorKind::kConfig, "evaluation: s_min must be in [0, 100]");
  }
  if (!(d_min > 0.0) || tau < 1 || !(junction_radius >= 0.0)) {
    throw Error(ErrorKind::kConfig, "evaluation: overlap parameters must be positive");
  }
}

json EvalConfig::to_json() const
{
  return {{"lambda", lambda}, {"s_min", s_min}, {"d_min", d_min}, {"tau", tau},
          {"junction_radius", junction_radius}};
}

EvalConfig EvalConfig::from_json(const json & j)
{
  EvalConfig c;
  c.lambda = j.value("lambda", c.lambda);
  c.s_min = j.value("s_min", c.s_min);
  c.d_min = j.value("d_min", c.d_min);
  c.tau = j.value("tau", c.tau);
  c.junction_radius = j.value("junction_radius", c.junction_radius);
  return c;
}

namespace
{

std::optional<double> road_change_rate(const Polyline & line)
{
  if (line.size() < 4) {
    return std::nullopt;
  }
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    if (line[i] == line[i + 1]) {
      return std::nullopt;
    }
  }
  const auto kappa = terrain::menger_curvature(line);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 1; i + 2 < line.size(); ++i) {
    sum += std::abs(kappa[i + 1] - kappa[i]) / distance(line[i], line[i + 1]);
    ++count;
  }
  return sum / static_cast<double>(count);
}

}  // namespace

double curvature_change_rate(const std::vector<Polyline> & roads)
{
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto & road : roads) {
    if (const auto rate = road_change_rate(road)) {
      sum += *rate;
      ++count;
    }
  }
  if (count == 0) {
    throw Error(ErrorKind::kInvalidArgument,
                "curvature change rate: no road has 4 or more distinct points");
  }
  if (!std::isfinite(sum)) {
    throw Error(ErrorKind::kNumeric, "curvature change rate: a road reverses direction");
  }
  return sum / static_cast<double>(count);
}

double continuity_metric(double ccr, double ref_ccr)
{
  if (!(ref_ccr > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "continuity: reference rate must be positive");
  }
  return std::clamp(100.0 * std::abs(ccr - ref_ccr) / ref_ccr, 0.0, 100.0);
}

namespace
{

const double kMinCrossingSin = std::sin(20.0 * std::numbers::pi / 180.0);

}  // namespace

std::vector<std::size_t> overlapping_roads(const std::vector<Polyline> & roads,
                                           const EvalConfig & config)
{
  std::vector<Vec2> discs;
  for (const auto & c : geometry::find_crossings(roads)) {
    // copies of one road touch at shared vertices at grazing angles
    if (c.sin_angle >= kMinCrossingSin) {
      discs.push_back(c.point);
    }
  }
  for (const Vec2 j : geometry::detect_junctions(roads, geo::kJunctionRadiusM)) {
    discs.push_back(j);
  }
  // endpoints resting on another road (T-junctions, merges)
  for (std::size_t a = 0; a < roads.size(); ++a) {
    if (roads[a].empty()) {
      continue;
    }
    for (const Vec2 end : {roads[a].front(), roads[a].back()}) {
      for (std::size_t b = 0; b < roads.size(); ++b) {
        if (b != a && !roads[b].empty() && geometry::point_polyline_distance(end, roads[b]) <= config.d_min) {
          discs.push_back(end);
          break;
        }
      }
    }
  }
  const auto in_disc = [&](Vec2 p) {
    return std::any_of(discs.begin(), discs.end(),
                       [&](Vec2 d) { return distance(p, d) <= config.junction_radius; });
  };

  std::vector<std::size_t> out;
  for (std::size_t a = 0; a < roads.size(); ++a) {
    bool overlapping = roads[a].size() >= 4 && geometry::self_intersects(roads[a]);
    for (std::size_t b = 0; b < roads.size() && !overlapping; ++b) {
      if (b == a || roads[b].empty()) {
        continue;
      }
      int run = 0;
      for (const Vec2 p : roads[a]) {
        if (geometry::point_polyline_distance(p, roads[b]) <= config.d_min && !in_disc(p)) {
          if (++run >= config.tau) {
            overlapping = true;
            break;
          }
        } else {
          run = 0;
        }
      }
    }
    if (overlapping) {
      out.push_back(a);
    }
  }
  return out;
}

double overlap_metric(const std::vector<Polyline> & roads, const EvalConfig & config)
{
  if (roads.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "overlap: scenario has no roads");
  }
  return 100.0 * static_cast<double>(overlapping_roads(roads, config).size()) /
         static_cast<double>(roads.size());
}

double scene_score(double w1, double w2, double lambda)
{
  if (!(lambda >= 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "scene score: lambda must be >= 0");
  }
  return std::clamp(100.0 - (w1 + lambda * w2), 0.0, 100.0);
}

data::ScenarioScore score_scenario(const MetricScenario & scenario, double ref_ccr,
                                   const EvalConfig & config)
{
  data::ScenarioScore s;
  s.lambda = config.lambda;
  if (scenario.roads.empty()) {
    s.w1 = 100.0;
    s.w2 = 100.0;
  } else {
    double ccr = 0.0;
    try {
      ccr = curvature_change_rate(scenario.roads);
      s.w1 = continuity_metric(ccr, ref_ccr);
    } catch (const Error & e) {
      if (e.kind() != ErrorKind::kInvalidArgument && e.kind() != ErrorKind::kNumeric) {
        throw;
      }
      s.w1 = 100.0;
    }
    s.w2 = overlap_metric(scenario.roads, config);
  }
  s.S = scene_score(s.w1, s.w2, config.lambda);
  s.accepted = s.S >= config.s_min;
  return s;
}

json ReferenceRates::to_json() const
{
  json j = json::object();
  for (ScenarioType t : kAllScenarioTypes) {
    j[std::string(to_string(t))] = at(t);
  }
  return j;
}

ReferenceRates ReferenceRates::from_json(const json & j)
{
  ReferenceRates r;
  for (ScenarioType t : kAllScenarioTypes) {
    r.by_type[static_cast<std::size_t>(t)] = j.at(std::string(to_string(t))).get<double>();
  }
  return r;
}

ReferenceRates reference_rates(const std::vector<data::LibraryRecord> & dataset)
{
  std::array<double, kScenarioTypeCount> sum{};
  std::array<std::size_t, kScenarioTypeCount> count{};
  double all = 0.0;
  std::size_t all_count = 0;
  for (const auto & rec : dataset) {
    const MetricScenario m = geo::denormalize(rec.scenario);
    double rate = 0.0;
    try {
      rate = curvature_change_rate(m.roads);
    } catch (const Error &) {
      continue;
    }
    const auto t = static_cast<std::size_t>(rec.scenario.condition.type());
    sum[t] += rate;
    ++count[t];
    all += rate;
    ++all_count;
  }
  if (all_count == 0 || !(all > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument,
                "reference rates: the dataset has no curved road to calibrate against");
  }
  ReferenceRates r;
  for (std::size_t t = 0; t < kScenarioTypeCount; ++t) {
    const double mean = count[t] ? sum[t] / static_cast<double>(count[t]) : 0.0;
    r.by_type[t] = mean > 0.0 ? mean : all / static_cast<double>(all_count);
  }
  return r;
}

FilterResult score_and_filter(const std::vector<data::LibraryRecord> & library,
                              const ReferenceRates & refs, const EvalConfig & config)
{
  config.validate();
  FilterResult out;
  out.scored = library;
  for (std::size_t i = 0; i < out.scored.size(); ++i) {
    auto & rec = out.scored[i];
    const MetricScenario m = geo::denormalize(rec.scenario);
    rec.score = score_scenario(m, refs.at(rec.scenario.condition.type()), config);
    if (rec.score->accepted) {
      out.accepted.push_back(i);
    }
  }
  return out;
}

}  // namespace diffroad::eval
