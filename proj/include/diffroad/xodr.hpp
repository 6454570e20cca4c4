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

#ifndef DIFFROAD__XODR_HPP_
#define DIFFROAD__XODR_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "diffroad/scenario.hpp"

/// OpenDRIVE 1.6 subset: line plan-view geometry, linear elevation records
/// and one lane section per road.
namespace diffroad::xodr
{

struct Header
{
  int rev_major{1};
  int rev_minor{6};
  std::string name;
  std::string geo_reference;
  std::string user_data;  // artifact stamp
};

struct LineGeometry
{
  double s{0.0};
  double x{0.0};
  double y{0.0};
  double hdg{0.0};
  double length{0.0};
};

struct ElevationRecord
{
  double s{0.0};
  double a{0.0};
  double b{0.0};
  double c{0.0};
  double d{0.0};
};

struct XodrRoad
{
  std::string id;
  std::string name;
  double length{0.0};
  std::vector<LineGeometry> plan_view;
  std::vector<ElevationRecord> elevation;
  double lane_width{3.5};
};

struct OpenDriveDocument
{
  Header header;
  std::vector<XodrRoad> roads;
};

inline constexpr double kDefaultLaneWidth = 3.5;

/// Zero-length segments are skipped and reported through `warnings`; a road
/// with no usable segment is an error.
OpenDriveDocument export_opendrive(const Scenario3d & scenario, const std::string & name,
                                   std::vector<std::string> * warnings = nullptr,
                                   double lane_width = kDefaultLaneWidth);

/// Throws Error(kContinuity) naming the road on any broken invariant.
void validate(const OpenDriveDocument & doc);

/// Refuses documents that fail validation.
std::string serialize(const OpenDriveDocument & doc);

/// Malformed XML -> kXmlSyntax; missing attribute -> kMissingAttribute;
/// arc/spiral/paramPoly3/poly3/junction -> kUnsupportedElement; broken
/// s-continuity -> kContinuity. Messages carry the element and line.
OpenDriveDocument parse_opendrive(std::string_view text);

/// Plan-view vertices with elevation, rebuilt from a parsed document.
Scenario3d to_scenario(const OpenDriveDocument & doc);

/// "<id>_<Type>.xodr" with path-unsafe characters replaced.
std::string file_name(const std::string & scenario_id, ScenarioType type);

}  // namespace diffroad::xodr

#endif  // DIFFROAD__XODR_HPP_
