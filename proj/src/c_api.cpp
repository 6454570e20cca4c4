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

#include "diffroad/diffroad.h"

#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "diffroad/error.hpp"
#include "diffroad/metrics.hpp"
#include "diffroad/pipeline.hpp"

struct dr_pipeline
{
  diffroad::pipeline::PipelineConfig config;
  int jobs{1};
  dr_log_fn log_fn{nullptr};
  void * log_user{nullptr};
  std::optional<diffroad::pipeline::Stage> failed;
};

namespace
{

thread_local std::string g_last_error;

dr_status status_of(diffroad::ErrorKind kind)
{
  using diffroad::ErrorKind;
  switch (kind) {
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kOutOfRange:
    case ErrorKind::kContract: return DR_ERR_INVALID_ARGUMENT;
    case ErrorKind::kConfig: return DR_ERR_CONFIG;
    case ErrorKind::kStage: return DR_ERR_STAGE;
    case ErrorKind::kIo: return DR_ERR_IO;
    case ErrorKind::kParse:
    case ErrorKind::kXmlSyntax:
    case ErrorKind::kMissingAttribute: return DR_ERR_PARSE;
    case ErrorKind::kNetwork: return DR_ERR_NETWORK;
    case ErrorKind::kVersion: return DR_ERR_VERSION;
    case ErrorKind::kTruncated: return DR_ERR_TRUNCATED;
    case ErrorKind::kIntegrity:
    case ErrorKind::kContinuity: return DR_ERR_INTEGRITY;
    case ErrorKind::kNumeric: return DR_ERR_NUMERIC;
    case ErrorKind::kUnsupportedElement: return DR_ERR_UNSUPPORTED;
  }
  return DR_ERR_INTERNAL;
}

template <typename F>
dr_status guarded(F && f)
{
  try {
    g_last_error.clear();
    f();
    return DR_OK;
  } catch (const diffroad::Error & e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const nlohmann::json::exception & e) {
    g_last_error = e.what();
    return DR_ERR_CONFIG;
  } catch (const std::bad_alloc &) {
    g_last_error = "out of memory";
    return DR_ERR_INTERNAL;
  } catch (const std::exception & e) {
    g_last_error = e.what();
    return DR_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return DR_ERR_INTERNAL;
  }
}

dr_status invalid(const char * message)
{
  g_last_error = message;
  return DR_ERR_INVALID_ARGUMENT;
}

char * copy_string(const std::string & s)
{
  char * out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

diffroad::pipeline::Pipeline make_pipeline(dr_pipeline * h)
{
  diffroad::pipeline::LogSink sink;
  if (h->log_fn != nullptr) {
    sink = [fn = h->log_fn, user = h->log_user](const nlohmann::json & record) {
      const std::string line = record.dump();
      fn(line.c_str(), user);
    };
  }
  return diffroad::pipeline::Pipeline(h->config, h->jobs, std::move(sink));
}

std::vector<diffroad::Vec2> points_of(const double * xy, size_t count)
{
  std::vector<diffroad::Vec2> out(count);
  for (size_t i = 0; i < count; ++i) {
    out[i] = {xy[2 * i], xy[2 * i + 1]};
  }
  return out;
}

}  // namespace

extern "C" {

const char * dr_version(void)
{
  return "0.1.0";
}

const char * dr_last_error(void)
{
  return g_last_error.c_str();
}

const char * dr_status_name(dr_status status)
{
  switch (status) {
    case DR_OK: return "ok";
    case DR_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case DR_ERR_CONFIG: return "config";
    case DR_ERR_STAGE: return "stage";
    case DR_ERR_IO: return "io";
    case DR_ERR_PARSE: return "parse";
    case DR_ERR_NETWORK: return "network";
    case DR_ERR_VERSION: return "version";
    case DR_ERR_TRUNCATED: return "truncated";
    case DR_ERR_INTEGRITY: return "integrity";
    case DR_ERR_NUMERIC: return "numeric";
    case DR_ERR_UNSUPPORTED: return "unsupported";
    case DR_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

dr_status dr_pipeline_create(const char * config_json, dr_pipeline ** out)
{
  if (config_json == nullptr || out == nullptr) {
    return invalid("dr_pipeline_create: null argument");
  }
  *out = nullptr;
  return guarded([&] {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::parse_error & e) {
      throw diffroad::Error(diffroad::ErrorKind::kConfig, std::string("config is not valid JSON: ") + e.what());
    }
    auto h = std::make_unique<dr_pipeline>();
    h->config = diffroad::pipeline::PipelineConfig::from_json(j);
    h->config.paths.resolve();
    h->config.validate();
    *out = h.release();
  });
}

void dr_pipeline_destroy(dr_pipeline * pipeline)
{
  delete pipeline;
}

dr_status dr_pipeline_set_jobs(dr_pipeline * pipeline, int jobs)
{
  if (pipeline == nullptr || jobs < 1) {
    return invalid("dr_pipeline_set_jobs: need a pipeline and jobs >= 1");
  }
  pipeline->jobs = jobs;
  return DR_OK;
}

dr_status dr_pipeline_set_log_callback(dr_pipeline * pipeline, dr_log_fn fn, void * user)
{
  if (pipeline == nullptr) {
    return invalid("dr_pipeline_set_log_callback: null pipeline");
  }
  pipeline->log_fn = fn;
  pipeline->log_user = user;
  return DR_OK;
}

dr_status dr_pipeline_effective_config(const dr_pipeline * pipeline, char ** out_json)
{
  if (pipeline == nullptr || out_json == nullptr) {
    return invalid("dr_pipeline_effective_config: null argument");
  }
  return guarded([&] { *out_json = copy_string(pipeline->config.to_json().dump(2)); });
}

dr_status dr_pipeline_config_hash(const dr_pipeline * pipeline, char ** out_hash)
{
  if (pipeline == nullptr || out_hash == nullptr) {
    return invalid("dr_pipeline_config_hash: null argument");
  }
  return guarded([&] { *out_hash = copy_string(pipeline->config.hash()); });
}

dr_status dr_pipeline_run(dr_pipeline * pipeline)
{
  if (pipeline == nullptr) {
    return invalid("dr_pipeline_run: null pipeline");
  }
  pipeline->failed.reset();
  auto p = make_pipeline(pipeline);
  const dr_status s = guarded([&] { p.run(); });
  pipeline->failed = p.failed_stage();
  return s;
}

dr_status dr_pipeline_run_stage(dr_pipeline * pipeline, const char * stage)
{
  if (pipeline == nullptr || stage == nullptr) {
    return invalid("dr_pipeline_run_stage: null argument");
  }
  pipeline->failed.reset();
  diffroad::pipeline::Stage parsed{};
  if (const dr_status s = guarded([&] { parsed = diffroad::pipeline::parse_stage(stage); }); s != DR_OK) {
    return s;
  }
  auto p = make_pipeline(pipeline);
  const dr_status s = guarded([&] { p.run_stage(parsed); });
  pipeline->failed = p.failed_stage();
  return s;
}

const char * dr_pipeline_failed_stage(const dr_pipeline * pipeline)
{
  if (pipeline == nullptr || !pipeline->failed) {
    return nullptr;
  }
  return diffroad::pipeline::to_string(*pipeline->failed);
}

void dr_string_free(char * str)
{
  delete[] str;
}

dr_status dr_hausdorff(const double * a, size_t a_count, const double * b, size_t b_count, double * out)
{
  if (a == nullptr || b == nullptr || out == nullptr) {
    return invalid("dr_hausdorff: null argument");
  }
  return guarded([&] {
    const auto pa = points_of(a, a_count);
    const auto pb = points_of(b, b_count);
    *out = diffroad::metrics::hausdorff(pa, pb);
  });
}

dr_status dr_jsd(const double * p, const double * q, size_t bins, double * out)
{
  if (p == nullptr || q == nullptr || out == nullptr) {
    return invalid("dr_jsd: null argument");
  }
  return guarded([&] {
    const auto hp = diffroad::metrics::Histogram::from_probabilities(std::vector<double>(p, p + bins));
    const auto hq = diffroad::metrics::Histogram::from_probabilities(std::vector<double>(q, q + bins));
    *out = diffroad::metrics::jsd(hp, hq);
  });
}

}  // extern "C"
