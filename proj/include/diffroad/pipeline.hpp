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

#ifndef DIFFROAD__PIPELINE_HPP_
#define DIFFROAD__PIPELINE_HPP_

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "diffroad/dataset.hpp"
#include "diffroad/road_unet.hpp"
#include "diffroad/sampling.hpp"
#include "diffroad/scene_eval.hpp"
#include "diffroad/terrain.hpp"
#include "diffroad/trainer.hpp"

namespace diffroad::pipeline
{

enum class Stage { kIngest, kTrain, kSample, kTerrain, kEvaluate, kMetrics, kExport };

inline constexpr std::array<Stage, 7> kAllStages = {Stage::kIngest, Stage::kTrain, Stage::kSample,
                                                    Stage::kTerrain, Stage::kEvaluate,
                                                    Stage::kMetrics, Stage::kExport};

const char * to_string(Stage stage) noexcept;
/// Throws Error(kConfig) for unknown names.
Stage parse_stage(std::string_view name);

struct ScenarioCenter
{
  std::string id;
  ShapePoint center{};
  ScenarioType type{ScenarioType::kIntersection};
};

struct IngestConfig
{
  std::string source{"geojson"};  // or "overpass"
  std::filesystem::path geojson;
  std::set<std::string> highway_classes{"motorway", "trunk", "primary", "secondary", "tertiary",
                                        "unclassified", "residential", "motorway_link",
                                        "trunk_link", "primary_link", "secondary_link",
                                        "tertiary_link"};
  double half_extent_m{200.0};
  std::vector<ScenarioCenter> centers;  // overpass source only
  std::string endpoint{"http://overpass-api.de/api/interpreter"};
  std::filesystem::path cache_dir;
  bool offline{false};
  int timeout_s{60};
};

struct Paths
{
  std::filesystem::path output_dir{"diffroad-out"};
  std::filesystem::path dataset;
  std::filesystem::path checkpoint;
  std::filesystem::path checkpoint_dir;
  std::filesystem::path loss_trace;
  std::filesystem::path library;
  std::filesystem::path terrain;
  std::filesystem::path scored;
  std::filesystem::path report_dir;
  std::filesystem::path xodr_dir;
  std::filesystem::path manifest;

  /// Fills unset paths from output_dir.
  void resolve();
};

struct PipelineConfig
{
  std::uint64_t seed{0};
  std::vector<Stage> stages{kAllStages.begin(), kAllStages.end()};
  Paths paths;
  IngestConfig ingest;
  nn::ArchConfig model;
  train::TrainingConfig training;
  sampling::SamplerConfig sampler;
  terrain::TerrainConfig terrain;
  eval::EvalConfig evaluation;
  bool histograms{true};
  bool export_accepted_only{true};
  double lane_width{3.5};

  /// Range checks and stage ordering. Throws Error(kConfig).
  void validate() const;
  nlohmann::json to_json() const;
  /// Unknown keys are rejected. Seeds of sub-configs default to `seed`.
  static PipelineConfig from_json(const nlohmann::json & j);

  /// FNV-1a over the canonical JSON, excluding stage selection.
  std::string hash() const;
};

/// Structured log record sink.
using LogSink = std::function<void(const nlohmann::json &)>;

class Pipeline
{
public:
  explicit Pipeline(PipelineConfig config, int jobs = 1, LogSink log = {});

  const PipelineConfig & config() const { return config_; }

  /// Runs the configured stages in order. Errors carry kStage with the stage name.
  void run();
  void run_stage(Stage stage);

  /// Set after a failed run_stage.
  std::optional<Stage> failed_stage() const { return failed_; }

private:
  void ingest();
  void train();
  void sample();
  void lift();
  void evaluate();
  void report();
  void export_xodr();

  data::Stamp stamp() const;
  void log(nlohmann::json record) const;
  void require_input(const std::filesystem::path & path) const;
  void record_output(const std::filesystem::path & path);

  PipelineConfig config_;
  int jobs_;
  LogSink log_;
  std::chrono::steady_clock::time_point start_;
  Stage current_{Stage::kIngest};
  std::optional<Stage> failed_;
};

/// 3D scenario library: one JSON object per line with roads as [x, y, z] lists.
std::string serialize_terrain(const std::vector<Scenario3d> & scenarios, const data::Stamp & stamp);
std::vector<Scenario3d> parse_terrain(std::string_view text);

/// Ingest raw scenario centres into normalized records.
std::vector<data::LibraryRecord> ingest_scenarios(const IngestConfig & config, std::size_t roads,
                                                  std::size_t points);

}  // namespace diffroad::pipeline

#endif  // DIFFROAD__PIPELINE_HPP_
