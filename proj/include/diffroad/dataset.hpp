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

#ifndef DIFFROAD__DATASET_HPP_
#define DIFFROAD__DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "diffroad/scenario.hpp"

/// Line-delimited scenario files shared by the dataset, the generated
/// library and the scored library. One JSON object per line.
namespace diffroad::data
{

struct ScenarioScore
{
  double w1{0.0};
  double w2{0.0};
  double S{100.0};
  double lambda{1.0};
  bool accepted{true};
};

/// Identifies the configuration that produced an artifact.
struct Stamp
{
  std::string config_hash;
  std::uint64_t seed{0};
};

struct LibraryRecord
{
  RoadScenario scenario;
  std::optional<std::uint64_t> seed;
  std::optional<ScenarioScore> score;
  std::optional<Stamp> stamp;
};

nlohmann::json record_to_json(const LibraryRecord & record);
LibraryRecord record_from_json(const nlohmann::json & j);

std::string serialize_library(const std::vector<LibraryRecord> & records);
/// Errors name the offending line number.
std::vector<LibraryRecord> parse_library(std::string_view text);

void write_library(const std::filesystem::path & path, const std::vector<LibraryRecord> & records);
std::vector<LibraryRecord> read_library(const std::filesystem::path & path);

std::string read_text_file(const std::filesystem::path & path);
/// Writes through a temporary sibling and renames into place.
void write_text_file(const std::filesystem::path & path, std::string_view text);

}  // namespace diffroad::data

#endif  // DIFFROAD__DATASET_HPP_
