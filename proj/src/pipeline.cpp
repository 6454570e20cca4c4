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

#include "diffroad/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>

#include "diffroad/checkpoint.hpp"
#include "diffroad/error.hpp"
#include "diffroad/geo.hpp"
#include "diffroad/metrics.hpp"
#include "diffroad/rng.hpp"
#include "diffroad/xodr.hpp"

namespace diffroad::pipeline
{

using nlohmann::json;
namespace fs = std::filesystem;

const char * to_string(Stage stage) noexcept
{
  switch (stage) {
    case Stage::kIngest: return "ingest";
    case Stage::kTrain: return "train";
    case Stage::kSample: return "sample";
    case Stage::kTerrain: return "terrain";
    case Stage::kEvaluate: return "evaluate";
    case Stage::kMetrics: return "metrics";
    case Stage::kExport: return "export";
  }
  return "unknown";
}

Stage parse_stage(std::string_view name)
{
  for (Stage s : kAllStages) {
    if (name == to_string(s)) {
      return s;
    }
  }
  throw Error(ErrorKind::kConfig, "unknown stage '" + std::string(name) + "'");
}

void Paths::resolve()
{
  const auto fill = [this](fs::path & p, const char * name) {
    if (p.empty()) {
      p = output_dir / name;
    }
  };
  fill(dataset, "dataset.jsonl");
  fill(checkpoint, "model.drck");
  fill(checkpoint_dir, "checkpoints");
  fill(loss_trace, "loss.csv");
  fill(library, "library.jsonl");
  fill(terrain, "terrain.jsonl");
  fill(scored, "scored.jsonl");
  fill(report_dir, "report");
  fill(xodr_dir, "xodr");
  fill(manifest, "manifest.json");
}

namespace
{

void check_keys(const json & j, std::initializer_list<const char *> allowed, const std::string & section)
{
  if (!j.is_object()) {
    throw Error(ErrorKind::kConfig, "config section '" + section + "' must be an object");
  }
  for (const auto & [key, value] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char * a) { return key == a; })) {
      throw Error(ErrorKind::kConfig, "unknown config key '" + section + (section.empty() ? "" : ".") + key + "'");
    }
  }
}

json paths_to_json(const Paths & p)
{
  return {{"output_dir", p.output_dir.string()},
          {"dataset", p.dataset.string()},
          {"checkpoint", p.checkpoint.string()},
          {"checkpoint_dir", p.checkpoint_dir.string()},
          {"loss_trace", p.loss_trace.string()},
          {"library", p.library.string()},
          {"terrain", p.terrain.string()},
          {"scored", p.scored.string()},
          {"report_dir", p.report_dir.string()},
          {"xodr_dir", p.xodr_dir.string()},
          {"manifest", p.manifest.string()}};
}

Paths paths_from_json(const json & j)
{
  check_keys(j, {"output_dir", "dataset", "checkpoint", "checkpoint_dir", "loss_trace", "library",
                 "terrain", "scored", "report_dir", "xodr_dir", "manifest"},
             "paths");
  Paths p;
  const auto get = [&](const char * key, fs::path & dst) {
    if (j.contains(key)) {
      dst = j.at(key).get<std::string>();
    }
  };
  get("output_dir", p.output_dir);
  get("dataset", p.dataset);
  get("checkpoint", p.checkpoint);
  get("checkpoint_dir", p.checkpoint_dir);
  get("loss_trace", p.loss_trace);
  get("library", p.library);
  get("terrain", p.terrain);
  get("scored", p.scored);
  get("report_dir", p.report_dir);
  get("xodr_dir", p.xodr_dir);
  get("manifest", p.manifest);
  p.resolve();
  return p;
}

json ingest_to_json(const IngestConfig & c)
{
  json centers = json::array();
  for (const auto & s : c.centers) {
    centers.push_back({{"id", s.id}, {"lat", s.center.lat}, {"lng", s.center.lng},
                       {"type", std::string(to_string(s.type))}});
  }
  return {{"source", c.source},
          {"geojson", c.geojson.string()},
          {"highway_classes", c.highway_classes},
          {"half_extent_m", c.half_extent_m},
          {"centers", centers},
          {"endpoint", c.endpoint},
          {"cache_dir", c.cache_dir.string()},
          {"offline", c.offline},
          {"timeout_s", c.timeout_s}};
}

IngestConfig ingest_from_json(const json & j)
{
  check_keys(j, {"source", "geojson", "highway_classes", "half_extent_m", "centers", "endpoint",
                 "cache_dir", "offline", "timeout_s"},
             "ingest");
  IngestConfig c;
  c.source = j.value("source", c.source);
  if (j.contains("geojson")) {
    c.geojson = j.at("geojson").get<std::string>();
  }
  c.highway_classes = j.value("highway_classes", c.highway_classes);
  c.half_extent_m = j.value("half_extent_m", c.half_extent_m);
  if (j.contains("centers")) {
    for (const auto & e : j.at("centers")) {
      c.centers.push_back({e.at("id").get<std::string>(),
                           {e.at("lat").get<double>(), e.at("lng").get<double>()},
                           parse_scenario_type(e.at("type").get<std::string>())});
    }
  }
  c.endpoint = j.value("endpoint", c.endpoint);
  if (j.contains("cache_dir")) {
    c.cache_dir = j.at("cache_dir").get<std::string>();
  }
  c.offline = j.value("offline", c.offline);
  c.timeout_s = j.value("timeout_s", c.timeout_s);
  return c;
}

std::string hex64(std::uint64_t v)
{
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string file_hash(const fs::path & path)
{
  const std::string bytes = data::read_text_file(path);
  return hex64(fnv1a64(bytes.data(), bytes.size()));
}

Polyline drop_repeated_points(const Polyline & line)
{
  Polyline out;
  for (const Vec2 p : line) {
    if (out.empty() || !(out.back() == p)) {
      out.push_back(p);
    }
  }
  return out;
}

MetricScenario clean(MetricScenario s)
{
  std::vector<Polyline> roads;
  for (const auto & r : s.roads) {
    auto line = drop_repeated_points(r);
    if (line.size() >= 2) {
      roads.push_back(std::move(line));
    }
  }
  s.roads = std::move(roads);
  return s;
}

}  // namespace

void PipelineConfig::validate() const
{
  model.validate();
  training.validate();
  sampler.validate(training.diffusion_steps);
  terrain.validate();
  evaluation.validate();
  if (!(ingest.half_extent_m > 0.0)) {
    throw Error(ErrorKind::kConfig, "ingest: half_extent_m must be positive");
  }
  if (ingest.source == "geojson") {
    if (ingest.geojson.empty()) {
      throw Error(ErrorKind::kConfig, "ingest: geojson source needs ingest.geojson");
    }
  } else if (ingest.source == "overpass") {
    if (ingest.centers.empty()) {
      throw Error(ErrorKind::kConfig, "ingest: overpass source needs at least one centre");
    }
    if (ingest.timeout_s < 1) {
      throw Error(ErrorKind::kConfig, "ingest: timeout_s must be >= 1");
    }
  } else {
    throw Error(ErrorKind::kConfig, "ingest: source must be 'geojson' or 'overpass'");
  }
  if (!(lane_width > 0.0)) {
    throw Error(ErrorKind::kConfig, "export: lane_width must be positive");
  }
  if (stages.empty()) {
    throw Error(ErrorKind::kConfig, "stages: at least one stage is required");
  }
  for (std::size_t i = 1; i < stages.size(); ++i) {
    if (static_cast<int>(stages[i]) != static_cast<int>(stages[i - 1]) + 1) {
      throw Error(ErrorKind::kConfig,
                  "stages must be a contiguous run in pipeline order (ingest, train, sample, "
                  "terrain, evaluate, metrics, export)");
    }
  }
}

json PipelineConfig::to_json() const
{
  json stage_names = json::array();
  for (Stage s : stages) {
    stage_names.push_back(to_string(s));
  }
  return {{"seed", seed},
          {"stages", stage_names},
          {"paths", paths_to_json(paths)},
          {"ingest", ingest_to_json(ingest)},
          {"model", model.to_json()},
          {"training", training.to_json()},
          {"sampler", sampler.to_json()},
          {"terrain", terrain.to_json()},
          {"evaluation", evaluation.to_json()},
          {"metrics", {{"histograms", histograms}}},
          {"export", {{"accepted_only", export_accepted_only}, {"lane_width", lane_width}}}};
}

PipelineConfig PipelineConfig::from_json(const json & j)
{
  PipelineConfig c;
  try {
    check_keys(j, {"seed", "stages", "paths", "ingest", "model", "training", "sampler", "terrain",
                   "evaluation", "metrics", "export"},
               "");
    c.seed = j.value("seed", c.seed);
    if (j.contains("stages")) {
      c.stages.clear();
      for (const auto & s : j.at("stages")) {
        c.stages.push_back(parse_stage(s.get<std::string>()));
      }
    }
    c.paths = paths_from_json(j.value("paths", json::object()));
    c.ingest = ingest_from_json(j.value("ingest", json::object()));
    if (c.ingest.cache_dir.empty()) {
      if (const char * env = std::getenv("DIFFROAD_CACHE"); env && *env) {
        c.ingest.cache_dir = env;
      }
    }
    const json model = j.value("model", json::object());
    check_keys(model, {"roads", "points", "base_channels", "channel_mult", "res_blocks",
                       "attention_stages", "mid_attention", "max_groups", "cond_hidden"},
               "model");
    c.model = nn::ArchConfig::from_json(model);

    json training = j.value("training", json::object());
    check_keys(training, {"learning_rate", "batch_size", "omega", "T", "beta_min", "beta_max",
                          "max_steps", "seed", "condition_dropout", "optimizer", "lr_schedule", "grad_clip",
                          "checkpoint_interval"},
               "training");
    if (!training.contains("seed")) {
      training["seed"] = c.seed;
    }
    c.training = train::TrainingConfig::from_json(training);

    json sampler = j.value("sampler", json::object());
    check_keys(sampler, {"stride", "freeu_enabled", "freeu", "seed", "count"}, "sampler");
    if (sampler.contains("freeu")) {
      check_keys(sampler.at("freeu"), {"backbone", "skip", "r_thresh"}, "sampler.freeu");
    }
    if (!sampler.contains("seed")) {
      sampler["seed"] = c.seed;
    }
    c.sampler = sampling::SamplerConfig::from_json(sampler);

    const json terrain = j.value("terrain", json::object());
    check_keys(terrain, {"speed", "mass", "max_lateral_force", "rho_max", "smoothing_window",
                         "flyover_clearance"},
               "terrain");
    c.terrain = terrain::TerrainConfig::from_json(terrain);

    const json evaluation = j.value("evaluation", json::object());
    check_keys(evaluation, {"lambda", "s_min", "d_min", "tau", "junction_radius"}, "evaluation");
    c.evaluation = eval::EvalConfig::from_json(evaluation);

    const json metrics = j.value("metrics", json::object());
    check_keys(metrics, {"histograms"}, "metrics");
    c.histograms = metrics.value("histograms", c.histograms);

    const json exp = j.value("export", json::object());
    check_keys(exp, {"accepted_only", "lane_width"}, "export");
    c.export_accepted_only = exp.value("accepted_only", c.export_accepted_only);
    c.lane_width = exp.value("lane_width", c.lane_width);
  } catch (const json::exception & e) {
    throw Error(ErrorKind::kConfig, std::string("config: ") + e.what());
  } catch (const Error & e) {
    throw Error(ErrorKind::kConfig, e.what());
  }
  return c;
}

std::string PipelineConfig::hash() const
{
  json j = to_json();
  j.erase("stages");
  j.erase("paths");
  j["ingest"].erase("cache_dir");
  j["ingest"].erase("offline");
  const std::string text = j.dump();
  return hex64(fnv1a64(text.data(), text.size()));
}

std::string serialize_terrain(const std::vector<Scenario3d> & scenarios, const data::Stamp & stamp)
{
  std::string out;
  for (const auto & s : scenarios) {
    json roads = json::array();
    for (std::size_t r = 0; r < s.plan.roads.size(); ++r) {
      json road = json::array();
      for (std::size_t i = 0; i < s.plan.roads[r].size(); ++i) {
        road.push_back({s.plan.roads[r][i].x, s.plan.roads[r][i].y, s.elevation[r][i]});
      }
      roads.push_back(std::move(road));
    }
    const json line = {{"id", s.plan.id},
                       {"type", std::string(to_string(s.plan.type))},
                       {"origin", {{"lat", s.plan.origin.lat}, {"lng", s.plan.origin.lng}}},
                       {"roads", roads},
                       {"stamp", {{"config_hash", stamp.config_hash}, {"seed", stamp.seed}}}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::vector<Scenario3d> parse_terrain(std::string_view text)
{
  std::vector<Scenario3d> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
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
      const json j = json::parse(line);
      Scenario3d s;
      s.plan.id = j.at("id").get<std::string>();
      s.plan.type = parse_scenario_type(j.at("type").get<std::string>());
      s.plan.origin = {j.at("origin").at("lat").get<double>(), j.at("origin").at("lng").get<double>()};
      for (const auto & road : j.at("roads")) {
        Polyline pl;
        std::vector<double> z;
        for (const auto & p : road) {
          pl.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
          z.push_back(p.at(2).get<double>());
        }
        s.plan.roads.push_back(std::move(pl));
        s.elevation.push_back(std::move(z));
      }
      out.push_back(std::move(s));
    } catch (const json::exception & e) {
      throw Error(ErrorKind::kParse, "terrain line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<data::LibraryRecord> ingest_scenarios(const IngestConfig & config, std::size_t roads,
                                                  std::size_t points)
{
  std::vector<data::LibraryRecord> out;
  const auto add = [&](const geo::RawScenario & raw) {
    data::LibraryRecord rec;
    rec.scenario = geo::normalize_scenario(raw, roads, points, config.half_extent_m);
    out.push_back(std::move(rec));
  };
  if (config.source == "geojson") {
    const auto input = geo::read_geojson_file(config.geojson);
    std::vector<geo::RawRoad> kept;
    for (const auto & r : input.roads) {
      if (config.highway_classes.empty() || config.highway_classes.count(r.highway_class)) {
        kept.push_back(r);
      }
    }
    if (input.seeds.empty()) {
      throw Error(ErrorKind::kInvalidArgument,
                  config.geojson.string() + ": no Point features with a scenario_type");
    }
    for (const auto & seed : input.seeds) {
      auto raw = geo::extract_scenario(kept, seed.center, roads, seed.type);
      raw.id = seed.id;
      add(raw);
    }
    return out;
  }
  geo::OverpassOptions options;
  options.endpoint = config.endpoint;
  options.cache_dir = config.cache_dir;
  options.offline = config.offline;
  options.timeout = std::chrono::seconds(config.timeout_s);
  for (const auto & c : config.centers) {
    const double dlat = config.half_extent_m / geo::kEarthRadiusM * 180.0 / std::numbers::pi;
    const double dlng = dlat / std::cos(c.center.lat * std::numbers::pi / 180.0);
    const geo::BoundingBox bbox{c.center.lat - dlat, c.center.lng - dlng, c.center.lat + dlat,
                                c.center.lng + dlng};
    const auto fetched = geo::fetch_osm_roads(bbox, config.highway_classes, options);
    if (fetched.empty()) {
      throw Error(ErrorKind::kInvalidArgument, "ingest: no roads around centre '" + c.id + "'");
    }
    auto raw = geo::extract_scenario(fetched, c.center, roads, c.type);
    raw.id = c.id;
    add(raw);
  }
  return out;
}

Pipeline::Pipeline(PipelineConfig config, int jobs, LogSink log)
: config_(std::move(config)), jobs_(std::max(1, jobs)), log_(std::move(log)),
  start_(std::chrono::steady_clock::now())
{
  config_.paths.resolve();
  config_.validate();
}

void Pipeline::log(json record) const
{
  if (!log_) {
    return;
  }
  record["stage"] = to_string(current_);
  record["wall_s"] =
    std::round(std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count() * 1000.0) / 1000.0;
  log_(record);
}

data::Stamp Pipeline::stamp() const
{
  return {config_.hash(), config_.seed};
}

void Pipeline::require_input(const fs::path & path) const
{
  if (!fs::exists(path)) {
    throw Error(ErrorKind::kIo, "missing input " + path.string());
  }
  if (!fs::exists(config_.paths.manifest)) {
    return;
  }
  const json manifest = json::parse(data::read_text_file(config_.paths.manifest));
  const auto & artifacts = manifest.at("artifacts");
  if (artifacts.contains(path.string())) {
    const auto & entry = artifacts.at(path.string());
    if (entry.at("fnv1a64").get<std::string>() != file_hash(path)) {
      throw Error(ErrorKind::kIntegrity, "input " + path.string() + " changed since stage '" +
                                           entry.at("stage").get<std::string>() + "' wrote it");
    }
  }
}

void Pipeline::record_output(const fs::path & path)
{
  json manifest = {{"artifacts", json::object()}};
  if (fs::exists(config_.paths.manifest)) {
    manifest = json::parse(data::read_text_file(config_.paths.manifest));
  }
  manifest["artifacts"][path.string()] = {{"fnv1a64", file_hash(path)}, {"stage", to_string(current_)}};
  data::write_text_file(config_.paths.manifest, manifest.dump(2) + "\n");
}

void Pipeline::run()
{
  for (Stage s : config_.stages) {
    run_stage(s);
  }
}

void Pipeline::run_stage(Stage stage)
{
  current_ = stage;
  failed_.reset();
  log({{"event", "start"}});
  try {
    fs::create_directories(config_.paths.output_dir);
    switch (stage) {
      case Stage::kIngest: ingest(); break;
      case Stage::kTrain: train(); break;
      case Stage::kSample: sample(); break;
      case Stage::kTerrain: lift(); break;
      case Stage::kEvaluate: evaluate(); break;
      case Stage::kMetrics: report(); break;
      case Stage::kExport: export_xodr(); break;
    }
  } catch (const Error & e) {
    failed_ = stage;
    log({{"event", "failed"}, {"kind", diffroad::to_string(e.kind())}, {"error", e.what()}});
    throw Error(ErrorKind::kStage, std::string("stage '") + to_string(stage) + "' failed (" +
                                     diffroad::to_string(e.kind()) + "): " + e.what());
  } catch (const std::exception & e) {
    failed_ = stage;
    log({{"event", "failed"}, {"error", e.what()}});
    throw Error(ErrorKind::kStage, std::string("stage '") + to_string(stage) + "' failed: " + e.what());
  }
  log({{"event", "done"}});
}

void Pipeline::ingest()
{
  if (config_.ingest.source == "geojson") {
    require_input(config_.ingest.geojson);
  }
  auto records = ingest_scenarios(config_.ingest, static_cast<std::size_t>(config_.model.roads),
                                  static_cast<std::size_t>(config_.model.points));
  const auto st = stamp();
  for (auto & r : records) {
    r.stamp = st;
    if (r.scenario.valid_count() == 0) {
      log({{"event", "warning"}, {"message", "scenario '" + r.scenario.id + "' has no road inside its window"}});
    }
  }
  data::write_library(config_.paths.dataset, records);
  record_output(config_.paths.dataset);
  log({{"event", "wrote"}, {"path", config_.paths.dataset.string()}, {"scenarios", records.size()}});
}

void Pipeline::train()
{
  require_input(config_.paths.dataset);
  const auto records = data::read_library(config_.paths.dataset);
  auto examples = train::make_examples(records, config_.model);
  train::Trainer trainer(config_.model, config_.training, std::move(examples), jobs_);
  const json normalization = {{"roads", config_.model.roads},
                              {"points", config_.model.points},
                              {"half_extent_m", config_.ingest.half_extent_m}};
  fs::remove(config_.paths.loss_trace);
  train::LossTrace trace(config_.paths.loss_trace);
  const int every = std::max(1, config_.training.max_steps / 20);
  train::TrainCallbacks callbacks;
  callbacks.on_step = [&](const train::StepStats & s) {
    trace.append(s);
    if (s.step % every == 0 || s.step == 1) {
      log({{"event", "step"}, {"step", s.step}, {"L_mse", s.mse}, {"L_s", s.smooth}, {"L", s.total},
           {"grad_norm", s.grad_norm}});
    }
  };
  callbacks.on_checkpoint = [&](const train::Checkpoint & ck) {
    if (ck.step < config_.training.max_steps) {
      char name[32];
      std::snprintf(name, sizeof(name), "step-%08lld.drck", static_cast<long long>(ck.step));
      const fs::path path = config_.paths.checkpoint_dir / name;
      train::save_checkpoint(ck, path);
      record_output(path);
      log({{"event", "checkpoint"}, {"step", ck.step}, {"path", path.string()}});
    }
  };
  const auto final_ck = train::train(trainer, callbacks, normalization);
  train::save_checkpoint(final_ck, config_.paths.checkpoint);
  record_output(config_.paths.checkpoint);
  record_output(config_.paths.loss_trace);
  log({{"event", "wrote"}, {"path", config_.paths.checkpoint.string()}, {"step", final_ck.step}});
}

void Pipeline::sample()
{
  require_input(config_.paths.checkpoint);
  require_input(config_.paths.dataset);
  const auto ck = train::load_checkpoint(config_.paths.checkpoint);
  const auto model = train::model_from_checkpoint(ck);
  const auto schedule = diffusion::build_schedule(ck.diffusion_steps, ck.beta_min, ck.beta_max);
  const auto dataset = data::read_library(config_.paths.dataset);
  const auto requests = sampling::requests_from_dataset(dataset, config_.sampler.count);
  auto library = sampling::generate_library(model, schedule, requests, config_.sampler, 0, jobs_);
  const auto st = stamp();
  for (auto & r : library) {
    r.stamp = st;
  }
  data::write_library(config_.paths.library, library);
  record_output(config_.paths.library);
  log({{"event", "wrote"}, {"path", config_.paths.library.string()}, {"scenarios", library.size()}});
}

void Pipeline::lift()
{
  require_input(config_.paths.library);
  const auto library = data::read_library(config_.paths.library);
  std::vector<Scenario3d> lifted;
  double worst = 0.0;
  for (const auto & rec : library) {
    const auto plan = clean(geo::denormalize(rec.scenario));
    lifted.push_back(terrain::lift_scenario(plan, config_.terrain));
    worst = std::max(worst, terrain::max_gradient(lifted.back()));
  }
  data::write_text_file(config_.paths.terrain, serialize_terrain(lifted, stamp()));
  record_output(config_.paths.terrain);
  log({{"event", "wrote"}, {"path", config_.paths.terrain.string()}, {"scenarios", lifted.size()},
       {"max_gradient", worst}});
}

void Pipeline::evaluate()
{
  require_input(config_.paths.dataset);
  require_input(config_.paths.library);
  const auto dataset = data::read_library(config_.paths.dataset);
  const auto library = data::read_library(config_.paths.library);
  const auto refs = eval::reference_rates(dataset);
  auto result = eval::score_and_filter(library, refs, config_.evaluation);
  const auto st = stamp();
  for (auto & r : result.scored) {
    r.stamp = st;
  }
  data::write_library(config_.paths.scored, result.scored);
  record_output(config_.paths.scored);
  log({{"event", "wrote"}, {"path", config_.paths.scored.string()}, {"scenarios", result.scored.size()},
       {"accepted", result.accepted.size()}, {"reference_ccr", refs.to_json()}});
}

void Pipeline::report()
{
  require_input(config_.paths.dataset);
  require_input(config_.paths.library);
  std::vector<MetricScenario> real;
  for (const auto & r : data::read_library(config_.paths.dataset)) {
    real.push_back(clean(geo::denormalize(r.scenario)));
  }
  std::vector<MetricScenario> gen;
  for (const auto & r : data::read_library(config_.paths.library)) {
    gen.push_back(clean(geo::denormalize(r.scenario)));
  }
  const auto rep = metrics::build_report(real, gen);
  const fs::path text = config_.paths.report_dir / "report.txt";
  const fs::path js = config_.paths.report_dir / "report.json";
  data::write_text_file(text, rep.to_text());
  json j = rep.to_json();
  j["stamp"] = {{"config_hash", stamp().config_hash}, {"seed", stamp().seed}};
  data::write_text_file(js, j.dump(2) + "\n");
  record_output(text);
  record_output(js);
  if (config_.histograms) {
    std::vector<Polyline> real_roads;
    std::vector<Polyline> gen_roads;
    for (const auto & s : real) {
      real_roads.insert(real_roads.end(), s.roads.begin(), s.roads.end());
    }
    for (const auto & s : gen) {
      gen_roads.insert(gen_roads.end(), s.roads.begin(), s.roads.end());
    }
    const fs::path rl = config_.paths.report_dir / "road_length.svg";
    const fs::path cpd = config_.paths.report_dir / "control_point_distance.svg";
    data::write_text_file(rl, metrics::histogram_svg("Road length (m)", metrics::road_lengths(real_roads),
                                                     metrics::road_lengths(gen_roads)));
    data::write_text_file(cpd, metrics::histogram_svg("Control-point distance (m)",
                                                      metrics::control_point_distances(real_roads),
                                                      metrics::control_point_distances(gen_roads)));
    record_output(rl);
    record_output(cpd);
  }
  log({{"event", "report"}, {"rows", j.at("rows")}});
}

void Pipeline::export_xodr()
{
  require_input(config_.paths.terrain);
  const auto scenarios = parse_terrain(data::read_text_file(config_.paths.terrain));
  std::set<std::string> accepted;
  if (config_.export_accepted_only) {
    require_input(config_.paths.scored);
    for (const auto & r : data::read_library(config_.paths.scored)) {
      if (r.score && r.score->accepted) {
        accepted.insert(r.scenario.id);
      }
    }
  }
  fs::create_directories(config_.paths.xodr_dir);
  for (const auto & entry : fs::directory_iterator(config_.paths.xodr_dir)) {
    if (entry.path().extension() == ".xodr") {
      fs::remove(entry.path());
    }
  }
  const auto st = stamp();
  std::size_t written = 0;
  for (const auto & s : scenarios) {
    if (config_.export_accepted_only && !accepted.count(s.plan.id)) {
      continue;
    }
    if (s.plan.roads.empty()) {
      log({{"event", "warning"}, {"message", "scenario '" + s.plan.id + "' has no roads; skipped"}});
      continue;
    }
    std::vector<std::string> warnings;
    auto doc = xodr::export_opendrive(s, s.plan.id, &warnings, config_.lane_width);
    doc.header.user_data = st.config_hash + ":" + std::to_string(st.seed);
    for (const auto & w : warnings) {
      log({{"event", "warning"}, {"message", s.plan.id + ": " + w}});
    }
    const fs::path path = config_.paths.xodr_dir / xodr::file_name(s.plan.id, s.plan.type);
    data::write_text_file(path, xodr::serialize(doc));
    record_output(path);
    ++written;
  }
  log({{"event", "wrote"}, {"path", config_.paths.xodr_dir.string()}, {"files", written}});
}

}  // namespace diffroad::pipeline
