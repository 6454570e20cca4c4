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

#include <cstdio>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "diffroad/diffroad.h"

namespace
{

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

using nlohmann::json;

struct Options
{
  std::string config_path;
  int jobs{1};
  bool offline{false};
  bool print_config_only{false};
  std::vector<std::string> sets;

  std::optional<std::uint64_t> seed;
  std::string output_dir;
  std::string geojson;
  std::string cache_dir;
  std::optional<int> max_steps;
  std::optional<double> learning_rate;
  std::optional<int> batch_size;
  std::optional<double> omega;
  std::optional<int> stride;
  std::optional<int> count;
  std::optional<bool> freeu;
  std::optional<double> lambda;
  std::optional<double> s_min;
};

void log_line(const char * record, void *)
{
  std::fprintf(stderr, "%s\n", record);
  std::fflush(stderr);
}

void config_error(const std::string & message)
{
  std::fprintf(stderr, "%s\n", json{{"level", "error"}, {"kind", "config"}, {"error", message}}.dump().c_str());
}

// key.path=value; the value is read as JSON when it parses, else as a string.
void apply_set(json & config, const std::string & assignment)
{
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw std::invalid_argument("--set expects key.path=value, got '" + assignment + "'");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) {
    value = text;
  }
  json * node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) {
      throw std::invalid_argument("--set: empty key in '" + path + "'");
    }
    if (!node->is_object()) {
      *node = json::object();
    }
    node = &(*node)[key];
    if (dot == std::string::npos) {
      break;
    }
    start = dot + 1;
  }
  *node = std::move(value);
}

json build_config(const Options & o, const std::vector<std::string> & stages)
{
  json config = json::object();
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) {
      throw std::invalid_argument("cannot open config file " + o.config_path);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    config = json::parse(buffer.str());
    if (!config.is_object()) {
      throw std::invalid_argument("config file must hold a JSON object");
    }
  }
  const auto set = [&config](const char * section, const char * key, json value) {
    if (section == nullptr) {
      config[key] = std::move(value);
    } else {
      config[section][key] = std::move(value);
    }
  };
  if (o.seed) set(nullptr, "seed", *o.seed);
  if (!o.output_dir.empty()) set("paths", "output_dir", o.output_dir);
  if (!o.geojson.empty()) set("ingest", "geojson", o.geojson);
  if (!o.cache_dir.empty()) set("ingest", "cache_dir", o.cache_dir);
  if (o.offline) set("ingest", "offline", true);
  if (o.max_steps) set("training", "max_steps", *o.max_steps);
  if (o.learning_rate) set("training", "learning_rate", *o.learning_rate);
  if (o.batch_size) set("training", "batch_size", *o.batch_size);
  if (o.omega) set("training", "omega", *o.omega);
  if (o.stride) set("sampler", "stride", *o.stride);
  if (o.count) set("sampler", "count", *o.count);
  if (o.freeu) set("sampler", "freeu_enabled", *o.freeu);
  if (o.lambda) set("evaluation", "lambda", *o.lambda);
  if (o.s_min) set("evaluation", "s_min", *o.s_min);
  for (const auto & s : o.sets) {
    apply_set(config, s);
  }
  if (!stages.empty()) {
    config["stages"] = stages;
  }
  return config;
}

int run(const Options & o, const std::vector<std::string> & stages)
{
  json config;
  try {
    config = build_config(o, stages);
  } catch (const std::exception & e) {
    config_error(e.what());
    return kExitConfig;
  }

  dr_pipeline * p = nullptr;
  if (dr_pipeline_create(config.dump().c_str(), &p) != DR_OK) {
    config_error(dr_last_error());
    return kExitConfig;
  }
  char * effective = nullptr;
  char * hash = nullptr;
  if (dr_pipeline_effective_config(p, &effective) == DR_OK && dr_pipeline_config_hash(p, &hash) == DR_OK) {
    json record = {{"level", "info"}, {"event", "config"}, {"config_hash", hash},
                   {"config", json::parse(effective)}};
    if (o.print_config_only) {
      std::printf("%s\n", effective);
    } else {
      std::fprintf(stderr, "%s\n", record.dump().c_str());
    }
  }
  dr_string_free(effective);
  dr_string_free(hash);
  if (o.print_config_only) {
    dr_pipeline_destroy(p);
    return kExitOk;
  }

  dr_pipeline_set_jobs(p, o.jobs);
  dr_pipeline_set_log_callback(p, log_line, nullptr);
  const dr_status status = dr_pipeline_run(p);
  int code = kExitOk;
  if (status != DR_OK) {
    const char * failed = dr_pipeline_failed_stage(p);
    std::fprintf(stderr, "%s\n",
                 json{{"level", "error"},
                      {"kind", dr_status_name(status)},
                      {"stage", failed ? failed : ""},
                      {"error", dr_last_error()}}
                   .dump()
                   .c_str());
    code = status == DR_ERR_CONFIG ? kExitConfig : kExitStage;
  }
  dr_pipeline_destroy(p);
  return code;
}

void add_common(CLI::App & app, Options & o)
{
  app.add_option("-c,--config", o.config_path, "JSON config file");
  app.add_option("-j,--jobs", o.jobs, "Worker thread cap")->check(CLI::PositiveNumber);
  app.add_flag("--offline", o.offline, "Serve Overpass queries from the cache only");
  app.add_flag("--print-config", o.print_config_only, "Print the effective config and exit");
  app.add_option("--set", o.sets, "Override any config key: section.key=value");
  app.add_option("--seed", o.seed, "Global seed");
  app.add_option("-o,--output-dir", o.output_dir, "Artifact directory");
  app.add_option("--geojson", o.geojson, "GeoJSON source for ingest");
  app.add_option("--cache-dir", o.cache_dir, "Overpass response cache");
  app.add_option("--steps", o.max_steps, "training.max_steps");
  app.add_option("--lr", o.learning_rate, "training.learning_rate");
  app.add_option("--batch", o.batch_size, "training.batch_size");
  app.add_option("--omega", o.omega, "training.omega");
  app.add_option("--stride", o.stride, "sampler.stride");
  app.add_option("--count", o.count, "sampler.count");
  app.add_option("--freeu", o.freeu, "sampler.freeu_enabled (true/false)");
  app.add_option("--lambda", o.lambda, "evaluation.lambda");
  app.add_option("--s-min", o.s_min, "evaluation.s_min");
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"DiffRoad road scenario generator"};
  app.set_version_flag("--version", std::string(dr_version()));
  app.require_subcommand(1);

  Options options;
  std::vector<std::string> stages;
  const std::vector<std::pair<const char *, const char *>> single = {
    {"ingest", "Extract normalized scenarios from GeoJSON or Overpass"},
    {"train", "Train the denoiser on the ingested dataset"},
    {"sample", "Generate a scenario library from a checkpoint"},
    {"terrain", "Add elevation profiles to generated scenarios"},
    {"evaluate", "Score and filter generated scenarios"},
    {"metrics", "Compare generated and real scenarios"},
    {"export", "Write OpenDRIVE files"},
  };
  for (const auto & [name, help] : single) {
    CLI::App * sub = app.add_subcommand(name, help);
    add_common(*sub, options);
    sub->callback([&stages, n = std::string(name)] { stages = {n}; });
  }
  CLI::App * all = app.add_subcommand("pipeline", "Run the stages listed in the config (default: all)");
  add_common(*all, options);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  return run(options, stages);
}
