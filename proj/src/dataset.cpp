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

#include "diffroad/dataset.hpp"

#include <fstream>
#include <sstream>

#include "diffroad/error.hpp"

namespace diffroad::data
{

using nlohmann::json;

json record_to_json(const LibraryRecord & record)
{
  const RoadScenario & s = record.scenario;
  json points = json::array();
  for (std::size_t r = 0; r < s.n; ++r) {
    json road = json::array();
    for (std::size_t p = 0; p < s.k; ++p) {
      const Vec2 v = s.at(r, p);
      road.push_back({v.x, v.y});
    }
    points.push_back(std::move(road));
  }
  json mask = json::array();
  for (bool v : s.valid) {
    mask.push_back(v ? 1 : 0);
  }
  const auto c = s.condition.flatten();
  json j = {
    {"id", s.id},
    {"type", std::string(to_string(s.condition.type()))},
    {"half_extent_m", s.half_extent_m},
    {"origin", {{"lat", s.origin.lat}, {"lng", s.origin.lng}}},
    {"condition", std::vector<double>(c.begin(), c.end())},
    {"mask", mask},
    {"points", points},
  };
  if (record.seed) {
    j["seed"] = *record.seed;
  }
  if (record.score) {
    const auto & sc = *record.score;
    j["score"] = {{"w1", sc.w1}, {"w2", sc.w2}, {"S", sc.S}, {"lambda", sc.lambda},
                  {"accepted", sc.accepted}};
  }
  if (record.stamp) {
    j["stamp"] = {{"config_hash", record.stamp->config_hash}, {"seed", record.stamp->seed}};
  }
  return j;
}

LibraryRecord record_from_json(const json & j)
{
  LibraryRecord record;
  const json & points = j.at("points");
  const json & mask = j.at("mask");
  if (!points.is_array() || points.empty() || !points[0].is_array()) {
    throw Error(ErrorKind::kParse, "points must be a non-empty n x k x 2 array");
  }
  const std::size_t n = points.size();
  const std::size_t k = points[0].size();
  if (mask.size() != n) {
    throw Error(ErrorKind::kParse, "mask length differs from road count");
  }
  RoadScenario s(n, k);
  for (std::size_t r = 0; r < n; ++r) {
    if (points[r].size() != k) {
      throw Error(ErrorKind::kParse, "road " + std::to_string(r) + " has a different point count");
    }
    for (std::size_t p = 0; p < k; ++p) {
      const json & pt = points[r][p];
      if (!pt.is_array() || pt.size() != 2) {
        throw Error(ErrorKind::kParse, "point entries must be [x, y] pairs");
      }
      s.set(r, p, {pt[0].get<double>(), pt[1].get<double>()});
    }
    s.valid[r] = mask[r].get<int>() != 0;
  }
  s.id = j.value("id", std::string());
  s.half_extent_m = j.at("half_extent_m").get<double>();
  s.origin = {j.at("origin").at("lat").get<double>(), j.at("origin").at("lng").get<double>()};
  const ScenarioType type = parse_scenario_type(j.at("type").get<std::string>());
  if (j.contains("condition")) {
    const auto c = j.at("condition").get<std::vector<double>>();
    if (c.size() != ConditionVector::kSize) {
      throw Error(ErrorKind::kParse, "condition must have 6 entries");
    }
    for (std::size_t i = 0; i < kScenarioTypeCount; ++i) {
      s.condition.type_onehot[i] = c[i];
    }
    s.condition.scale = c[4];
    s.condition.junction_count = c[5];
    if (!s.condition.valid() || s.condition.type() != type) {
      throw Error(ErrorKind::kParse, "condition vector inconsistent with type");
    }
  } else {
    s.condition = ConditionVector::make(type, s.half_extent_m, 0);
  }
  if (j.contains("seed")) {
    record.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("score")) {
    const json & sc = j.at("score");
    record.score = ScenarioScore{sc.at("w1").get<double>(), sc.at("w2").get<double>(),
                                 sc.at("S").get<double>(), sc.value("lambda", 1.0),
                                 sc.at("accepted").get<bool>()};
  }
  if (j.contains("stamp")) {
    record.stamp = Stamp{j.at("stamp").at("config_hash").get<std::string>(),
                         j.at("stamp").at("seed").get<std::uint64_t>()};
  }
  record.scenario = std::move(s);
  return record;
}

std::string serialize_library(const std::vector<LibraryRecord> & records)
{
  std::string out;
  for (const auto & r : records) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

std::vector<LibraryRecord> parse_library(std::string_view text)
{
  std::vector<LibraryRecord> records;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    ++line_no;
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      continue;
    }
    try {
      records.push_back(record_from_json(json::parse(line)));
    } catch (const json::exception & e) {
      throw Error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error & e) {
      throw Error(e.kind(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

void write_library(const std::filesystem::path & path, const std::vector<LibraryRecord> & records)
{
  write_text_file(path, serialize_library(records));
}

std::vector<LibraryRecord> read_library(const std::filesystem::path & path)
{
  try {
    return parse_library(read_text_file(path));
  } catch (const Error & e) {
    if (e.kind() == ErrorKind::kParse) {
      throw Error(ErrorKind::kParse, path.string() + ": " + e.what());
    }
    throw;
  }
}

std::string read_text_file(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::kIo, "cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path & path, std::string_view text)
{
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorKind::kIo, "cannot write " + tmp.string());
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) {
      throw Error(ErrorKind::kIo, "short write to " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace diffroad::data
