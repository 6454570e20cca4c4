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

#ifndef DIFFROAD__SCENE_EVAL_HPP_
#define DIFFROAD__SCENE_EVAL_HPP_

#include <array>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "diffroad/dataset.hpp"
#include "diffroad/scenario.hpp"

/// Continuity and reasonableness scoring of generated scenarios.
namespace diffroad::eval
{

struct EvalConfig
{
  double lambda{1.0};
  double s_min{80.0};
  double d_min{3.5};          // m
  int tau{5};                 // consecutive samples
  double junction_radius{15.0};  // m

  void validate() const;
  nlohmann::json to_json() const;
  static EvalConfig from_json(const nlohmann::json & j);
};

/// Mean over roads of the mean |kappa_{i+1} - kappa_i| / ds_i, taken over
/// interior curvature samples. Roads with fewer than 4 points or repeated
/// points are skipped; if every road is skipped this is an error.
double curvature_change_rate(const std::vector<Polyline> & roads);

/// clamp(100 |ccr - ref| / ref, 0, 100). ref must be positive.
double continuity_metric(double ccr, double ref_ccr);

/// Indices of roads that run within d_min of another road for at least tau
/// consecutive samples outside every junction disc, plus self-intersecting roads.
std::vector<std::size_t> overlapping_roads(const std::vector<Polyline> & roads,
                                           const EvalConfig & config);
/// 100 * overlapping / total.
double overlap_metric(const std::vector<Polyline> & roads, const EvalConfig & config);

double scene_score(double w1, double w2, double lambda);

/// w1 is 100 when the curvature change rate is undefined (too few distinct
/// points, or a road that reverses onto itself).
data::ScenarioScore score_scenario(const MetricScenario & scenario, double ref_ccr,
                                   const EvalConfig & config);

/// Reference curvature change rate per scenario type from a training set; a
/// type with no usable scenario falls back to the mean over all types.
struct ReferenceRates
{
  std::array<double, kScenarioTypeCount> by_type{};

  double at(ScenarioType type) const { return by_type[static_cast<std::size_t>(type)]; }
  nlohmann::json to_json() const;
  static ReferenceRates from_json(const nlohmann::json & j);
};

ReferenceRates reference_rates(const std::vector<data::LibraryRecord> & dataset);

struct FilterResult
{
  std::vector<data::LibraryRecord> scored;
  std::vector<std::size_t> accepted;
};

/// Annotates every record with its score; accepted iff S >= s_min.
FilterResult score_and_filter(const std::vector<data::LibraryRecord> & library,
                              const ReferenceRates & refs, const EvalConfig & config);

}  // namespace diffroad::eval

#endif  // DIFFROAD__SCENE_EVAL_HPP_
