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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "diffroad/diffroad.h"

namespace fs = std::filesystem;

namespace
{

std::string config(const fs::path & out, const char * stages)
{
  nlohmann::json j = {
    {"seed", 3},
    {"stages", nlohmann::json::parse(stages)},
    {"paths", {{"output_dir", out.string()}}},
    {"ingest", {{"geojson", std::string(DIFFROAD_TEST_DATA) + "/toy_city.geojson"}}},
    {"model", {{"roads", 4}, {"points", 32}, {"base_channels", 8}, {"channel_mult", {1, 2}},
               {"res_blocks", 1}, {"attention_stages", 1}, {"cond_hidden", 8}}},
    {"training", {{"batch_size", 4}, {"max_steps", 3}, {"T", 100}, {"beta_max", 0.1}}},
    {"sampler", {{"stride", 50}, {"count", 2}}},
  };
  return j.dump();
}

void count_records(const char * record, void * user)
{
  const auto j = nlohmann::json::parse(record);
  if (j.contains("stage")) {
    ++*static_cast<int *>(user);
  }
}

}  // namespace

TEST_CASE("status names and version")
{
  CHECK(std::strlen(dr_version()) > 0);
  CHECK(std::string(dr_status_name(DR_OK)) == "ok");
  CHECK(std::string(dr_status_name(DR_ERR_CONFIG)) == "config");
  CHECK(std::string(dr_status_name(static_cast<dr_status>(55))) == "unknown");
}

TEST_CASE("create rejects bad configs")
{
  dr_pipeline * p = nullptr;
  CHECK(dr_pipeline_create("{not json", &p) == DR_ERR_CONFIG);
  CHECK(p == nullptr);
  CHECK(std::strlen(dr_last_error()) > 0);
  CHECK(dr_pipeline_create("{\"bogus\": 1}", &p) == DR_ERR_CONFIG);
  CHECK(std::string(dr_last_error()).find("bogus") != std::string::npos);
  CHECK(dr_pipeline_create(nullptr, &p) == DR_ERR_INVALID_ARGUMENT);
  CHECK(dr_pipeline_create("{}", nullptr) == DR_ERR_INVALID_ARGUMENT);
  CHECK(dr_pipeline_create("{\"stages\": [\"train\", \"export\"]}", &p) == DR_ERR_CONFIG);
}

TEST_CASE("pipeline handle")
{
  const fs::path out = fs::temp_directory_path() / "diffroad_test_c_api";
  fs::remove_all(out);
  dr_pipeline * p = nullptr;
  REQUIRE(dr_pipeline_create(config(out, R"(["ingest", "train", "sample"])").c_str(), &p) == DR_OK);

  char * effective = nullptr;
  REQUIRE(dr_pipeline_effective_config(p, &effective) == DR_OK);
  const auto j = nlohmann::json::parse(effective);
  dr_string_free(effective);
  CHECK(j.at("seed") == 3);
  CHECK(j.at("training").at("seed") == 3);
  CHECK(j.at("paths").at("library") == (out / "library.jsonl").string());

  char * hash = nullptr;
  REQUIRE(dr_pipeline_config_hash(p, &hash) == DR_OK);
  CHECK(std::strlen(hash) == 16);
  dr_string_free(hash);

  CHECK(dr_pipeline_set_jobs(p, 0) == DR_ERR_INVALID_ARGUMENT);
  CHECK(dr_pipeline_set_jobs(p, 2) == DR_OK);
  int records = 0;
  CHECK(dr_pipeline_set_log_callback(p, count_records, &records) == DR_OK);

  CHECK(dr_pipeline_failed_stage(p) == nullptr);
  CHECK(dr_pipeline_run(p) == DR_OK);
  CHECK(records > 0);
  CHECK(fs::exists(out / "library.jsonl"));

  CHECK(dr_pipeline_run_stage(p, "varnish") == DR_ERR_CONFIG);
  CHECK(dr_pipeline_run_stage(p, "metrics") == DR_OK);
  CHECK(fs::exists(out / "report" / "report.json"));

  fs::remove(out / "library.jsonl");
  CHECK(dr_pipeline_run_stage(p, "terrain") == DR_ERR_STAGE);
  REQUIRE(dr_pipeline_failed_stage(p) != nullptr);
  CHECK(std::string(dr_pipeline_failed_stage(p)) == "terrain");
  CHECK(std::string(dr_last_error()).find("terrain") != std::string::npos);

  dr_pipeline_destroy(p);
  dr_pipeline_destroy(nullptr);
  fs::remove_all(out);
}

TEST_CASE("metric helpers")
{
  const double a[] = {0.0, 0.0};
  const double b[] = {3.0, 4.0, 0.0, 0.0};
  double d = -1.0;
  CHECK(dr_hausdorff(a, 1, b, 2, &d) == DR_OK);
  CHECK(d == 5.0);
  CHECK(dr_hausdorff(a, 0, b, 2, &d) == DR_ERR_INVALID_ARGUMENT);
  CHECK(dr_hausdorff(nullptr, 1, b, 2, &d) == DR_ERR_INVALID_ARGUMENT);

  const double p[] = {1.0, 0.0};
  const double q[] = {0.0, 1.0};
  CHECK(dr_jsd(p, q, 2, &d) == DR_OK);
  CHECK(std::abs(d - std::log(2.0)) <= 1e-12);
  CHECK(dr_jsd(p, p, 2, &d) == DR_OK);
  CHECK(d == 0.0);
  const double bad[] = {0.7, 0.7};
  CHECK(dr_jsd(p, bad, 2, &d) == DR_ERR_INVALID_ARGUMENT);
  CHECK(dr_jsd(p, q, 0, &d) == DR_ERR_INVALID_ARGUMENT);
}
