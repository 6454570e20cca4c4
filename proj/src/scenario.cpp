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

#include <algorithm>
#include <cctype>
#include <string>

#include "diffroad/error.hpp"
#include "diffroad/scenario.hpp"

namespace diffroad
{

const char * to_string(ErrorKind kind) noexcept
{
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kOutOfRange: return "out-of-range";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kNetwork: return "network";
    case ErrorKind::kVersion: return "version";
    case ErrorKind::kTruncated: return "truncated";
    case ErrorKind::kIntegrity: return "integrity";
    case ErrorKind::kNumeric: return "numeric";
    case ErrorKind::kContract: return "contract";
    case ErrorKind::kXmlSyntax: return "xml-syntax";
    case ErrorKind::kMissingAttribute: return "missing-attribute";
    case ErrorKind::kUnsupportedElement: return "unsupported-element";
    case ErrorKind::kContinuity: return "continuity";
    case ErrorKind::kStage: return "stage";
  }
  return "unknown";
}

std::string_view to_string(ScenarioType type) noexcept
{
  switch (type) {
    case ScenarioType::kIntersection: return "Intersection";
    case ScenarioType::kPudo: return "PUDO";
    case ScenarioType::kRoundabout: return "Roundabout";
    case ScenarioType::kFlyover: return "Flyover";
  }
  return "Intersection";
}

ScenarioType parse_scenario_type(std::string_view name)
{
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (ScenarioType type : kAllScenarioTypes) {
    std::string candidate(to_string(type));
    std::transform(candidate.begin(), candidate.end(), candidate.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (candidate == lower) {
      return type;
    }
  }
  throw Error(ErrorKind::kParse, "unknown scenario type '" + std::string(name) + "'");
}

ConditionVector ConditionVector::make(ScenarioType type, double half_extent_m, int junctions)
{
  ConditionVector c;
  c.type_onehot[static_cast<std::size_t>(type)] = 1.0;
  c.scale = std::clamp(half_extent_m / kScaleReferenceMeters, 0.0, 1.0);
  c.junction_count = std::clamp(static_cast<double>(junctions) / kJunctionReference, 0.0, 1.0);
  return c;
}

ScenarioType ConditionVector::type() const
{
  const auto it = std::max_element(type_onehot.begin(), type_onehot.end());
  return kAllScenarioTypes[static_cast<std::size_t>(it - type_onehot.begin())];
}

std::array<double, ConditionVector::kSize> ConditionVector::flatten() const
{
  std::array<double, kSize> out{};
  std::copy(type_onehot.begin(), type_onehot.end(), out.begin());
  out[kScenarioTypeCount] = scale;
  out[kScenarioTypeCount + 1] = junction_count;
  return out;
}

bool ConditionVector::valid() const
{
  int nonzero = 0;
  for (double v : flatten()) {
    if (!(v >= 0.0 && v <= 1.0)) {
      return false;
    }
  }
  for (double v : type_onehot) {
    nonzero += v != 0.0 ? 1 : 0;
  }
  return nonzero == 1;
}

Polyline RoadScenario::road(std::size_t index) const
{
  Polyline out;
  out.reserve(k);
  for (std::size_t p = 0; p < k; ++p) {
    out.push_back(at(index, p));
  }
  return out;
}

std::size_t RoadScenario::valid_count() const
{
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), true));
}

}  // namespace diffroad
