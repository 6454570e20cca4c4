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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "diffroad/error.hpp"
#include "diffroad/geo.hpp"
#include "diffroad/rng.hpp"

using namespace diffroad;
using namespace diffroad::geo;

namespace
{

const std::filesystem::path kData = DIFFROAD_TEST_DATA;

std::string slurp(const std::filesystem::path & p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RawRoad straight_road(const std::string & id, ShapePoint origin, double x0, double y0, double x1, double y1)
{
  const Polyline local = {{x0, y0}, {x1, y1}};
  RawRoad r;
  r.id = id;
  r.highway_class = "primary";
  r.points = unproject_from_local(local, origin);
  return r;
}

std::filesystem::path fresh_dir(const std::string & name)
{
  const auto dir = std::filesystem::temp_directory_path() / ("diffroad_test_geo_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("projection matches the equirectangular formula")
{
  const ShapePoint origin{0.0, 0.0};
  const std::vector<ShapePoint> self = {origin};
  const auto o = project_to_local(self, origin);
  CHECK(o[0].x == 0.0);
  CHECK(o[0].y == 0.0);

  const std::vector<ShapePoint> east = {{0.0, 0.001}};
  const auto e = project_to_local(east, origin);
  CHECK(e[0].x == doctest::Approx(111.195).epsilon(1e-5));
  CHECK(e[0].y == 0.0);

  const ShapePoint north60{60.0, 10.0};
  const std::vector<ShapePoint> east60 = {{60.0, 10.001}};
  const auto e60 = project_to_local(east60, north60);
  CHECK(e60[0].x == doctest::Approx(55.597).epsilon(1e-4));
  CHECK(std::abs(e60[0].y) < 1e-9);
}

TEST_CASE("unproject inverts project")
{
  const ShapePoint origin{1.3, 103.8};
  const Polyline local = {{-150.0, 20.0}, {0.0, 0.0}, {199.0, -180.5}};
  const auto back = project_to_local(unproject_from_local(local, origin), origin);
  for (std::size_t i = 0; i < local.size(); ++i) {
    CHECK(back[i].x == doctest::Approx(local[i].x).epsilon(1e-9));
    CHECK(back[i].y == doctest::Approx(local[i].y).epsilon(1e-9));
  }
}

TEST_CASE("haversine of one millidegree of latitude")
{
  const double d = haversine_m({0.0, 0.0}, {0.001, 0.0});
  CHECK(d == doctest::Approx(kEarthRadiusM * 0.001 * std::numbers::pi / 180.0).epsilon(1e-9));
}

TEST_CASE("resample_road")
{
  SUBCASE("straight segment")
  {
    const Polyline line = {{0, 0}, {10, 0}};
    const auto r = resample_road(line, 3);
    REQUIRE(r.size() == 3);
    CHECK(r[0] == Vec2{0, 0});
    CHECK(r[1].x == doctest::Approx(5.0));
    CHECK(r[2] == Vec2{10, 0});
  }
  SUBCASE("L shape at arc lengths 0, 5, 10, 15, 20")
  {
    const Polyline line = {{0, 0}, {10, 0}, {10, 10}};
    const auto r = resample_road(line, 5);
    const std::vector<Vec2> expect = {{0, 0}, {5, 0}, {10, 0}, {10, 5}, {10, 10}};
    REQUIRE(r.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(distance(r[i], expect[i]) < 1e-12);
    }
  }
  SUBCASE("equal spacing is a fixed point")
  {
    Polyline line;
    for (int i = 0; i < 9; ++i) {
      line.push_back({1.5 * i, -2.0 * i});
    }
    const auto r = resample_road(line, line.size());
    for (std::size_t i = 0; i < line.size(); ++i) {
      CHECK(distance(r[i], line[i]) < 1e-12);
    }
  }
  SUBCASE("zero length is rejected")
  {
    const Polyline line = {{1, 1}, {1, 1}};
    CHECK_THROWS_AS(resample_road(line, 4), Error);
  }
}

TEST_CASE("clip_to_window keeps the piece through the centre")
{
  const Polyline line = {{-400, 0}, {0, 0}, {400, 0}};
  const auto c = clip_to_window(line, 200.0);
  REQUIRE(c.size() >= 2);
  CHECK(c.front().x == doctest::Approx(-200.0));
  CHECK(c.back().x == doctest::Approx(200.0));
  const Polyline outside = {{300, 300}, {400, 300}};
  CHECK(clip_to_window(outside, 200.0).empty());
}

TEST_CASE("extract_scenario")
{
  const ShapePoint c{1.30, 103.80};
  SUBCASE("fewer roads than requested")
  {
    const std::vector<RawRoad> roads = {straight_road("a", c, 10, 0, 50, 0)};
    CHECK(extract_scenario(roads, c, 12).roads.size() == 1);
  }
  SUBCASE("the innermost n of 20 roads")
  {
    std::vector<RawRoad> roads;
    std::vector<std::pair<double, std::string>> oracle;
    RandomStream rng(5);
    for (int i = 0; i < 20; ++i) {
      const double radius = 10.0 + 170.0 * rng.uniform();
      const double a = 2.0 * std::numbers::pi * rng.uniform();
      const Vec2 p{radius * std::cos(a), radius * std::sin(a)};
      const Vec2 q = p + Vec2{30.0 * std::cos(a), 30.0 * std::sin(a)};
      const std::string id = "road" + std::to_string(i);
      roads.push_back(straight_road(id, c, p.x, p.y, q.x, q.y));
      double dmin = 1e300;
      for (const auto & v : project_to_local(roads.back().points, c)) {
        dmin = std::min(dmin, norm(v));
      }
      oracle.emplace_back(dmin, id);
    }
    std::sort(oracle.begin(), oracle.end());
    const auto s = extract_scenario(roads, c, 12);
    REQUIRE(s.roads.size() == 12);
    for (std::size_t i = 0; i < 12; ++i) {
      CHECK(s.roads[i].id == oracle[i].second);
    }
  }
  SUBCASE("ties broken by id")
  {
    const std::vector<RawRoad> roads = {straight_road("zeta", c, 50, 0, 90, 0),
                                        straight_road("alpha", c, -50, 0, -90, 0),
                                        straight_road("mid", c, 0, 70, 0, 100)};
    const auto s = extract_scenario(roads, c, 2);
    REQUIRE(s.roads.size() == 2);
    CHECK(s.roads[0].id == "alpha");
    CHECK(s.roads[1].id == "zeta");
  }
}

TEST_CASE("normalize_scenario")
{
  const ShapePoint c{1.30, 103.80};
  RawScenario raw;
  raw.center = c;
  raw.scenario_type = ScenarioType::kRoundabout;
  raw.roads.push_back(straight_road("east", c, 0, 0, 200, 0));
  raw.roads.push_back(straight_road("long", c, 0, 50, 400, 50));
  for (int i = 0; i < 3; ++i) {
    raw.roads.push_back(straight_road("n" + std::to_string(i), c, -150.0 + 40 * i, -100, -150.0 + 40 * i, 100));
  }
  const auto s = normalize_scenario(raw, 12, 16, 200.0);
  CHECK(s.n == 12);
  CHECK(s.k == 16);
  CHECK(s.valid_count() == 5);
  CHECK(std::count(s.valid.begin(), s.valid.end(), false) == 7);
  CHECK(s.condition.type() == ScenarioType::kRoundabout);
  CHECK(s.condition.valid());

  const auto east = s.road(0);
  CHECK(std::abs(east.back().x - 1.0) < 1e-6);
  CHECK(std::abs(east.back().y) < 1e-6);
  const auto clamped = s.road(1);
  CHECK(std::abs(clamped.back().x - 1.0) < 1e-6);
  for (double v : s.points) {
    CHECK(std::isfinite(v));
    CHECK(std::abs(v) <= 1.0);
  }
  for (std::size_t r = 5; r < 12; ++r) {
    for (std::size_t p = 0; p < 16; ++p) {
      CHECK(s.at(r, p) == Vec2{0, 0});
    }
  }

  SUBCASE("denormalize scales to meters and drops padding")
  {
    const auto m = denormalize(s);
    REQUIRE(m.roads.size() == 5);
    CHECK(m.roads[0].back().x == doctest::Approx(200.0));
    CHECK(m.type == ScenarioType::kRoundabout);
    for (std::size_t p = 0; p < 16; ++p) {
      const Vec2 a = s.at(2, p);
      const Vec2 b = m.roads[2][p];
      CHECK(std::abs(b.x / 200.0 - a.x) < 1e-9);
      CHECK(std::abs(b.y / 200.0 - a.y) < 1e-9);
    }
  }
}

TEST_CASE("GeoJSON input")
{
  const auto in = read_geojson_file(kData / "toy_city.geojson");
  CHECK(in.seeds.size() == 8);
  std::size_t footways = 0;
  for (const auto & r : in.roads) {
    footways += r.highway_class == "footway";
  }
  CHECK(footways == 8);
  CHECK_THROWS_AS(parse_geojson("{\"type\": \"Feature\"}"), Error);
  CHECK_THROWS_AS(parse_geojson("not json"), Error);
}

TEST_CASE("Overpass response parsing")
{
  const std::string body = slurp(kData / "overpass_fixture.json");
  const BoundingBox bbox{1.29, 103.84, 1.30, 103.85};

  SUBCASE("class filter keeps two of three ways")
  {
    const auto roads = parse_overpass_response(body, bbox, {"primary", "secondary"});
    REQUIRE(roads.size() == 2);
    for (const auto & r : roads) {
      CHECK(r.highway_class == "primary");
    }
  }
  SUBCASE("returned points lie inside the box or one segment from it")
  {
    const auto roads = parse_overpass_response(body, bbox, {"primary"});
    for (const auto & r : roads) {
      double seg = 0.0;
      for (std::size_t i = 1; i < r.points.size(); ++i) {
        seg = std::max(seg, haversine_m(r.points[i - 1], r.points[i]));
      }
      for (const auto & p : r.points) {
        const ShapePoint nearest{std::clamp(p.lat, bbox.south, bbox.north),
                                 std::clamp(p.lng, bbox.west, bbox.east)};
        CHECK(haversine_m(p, nearest) <= seg + 1e-6);
      }
    }
  }
  SUBCASE("ways outside the box are dropped")
  {
    const BoundingBox far{1.0, 103.0, 1.01, 103.01};
    CHECK(parse_overpass_response(body, far, {"primary"}).empty());
  }
  SUBCASE("malformed responses name the element")
  {
    CHECK_THROWS_AS(parse_overpass_response("{}", bbox, {"primary"}), Error);
    const std::string bad =
      R"({"elements":[{"type":"way","id":77,"tags":{"highway":"primary"},"geometry":[{"lat":"x","lon":1}]}]})";
    try {
      parse_overpass_response(bad, bbox, {"primary"});
      FAIL("expected a parse error");
    } catch (const Error & e) {
      CHECK(e.kind() == ErrorKind::kParse);
      CHECK(std::string(e.what()).find("way/77") != std::string::npos);
    }
  }
}

TEST_CASE("Overpass query text")
{
  const auto q = build_overpass_query({1.29, 103.84, 1.30, 103.85}, {"primary"}, std::chrono::seconds(30));
  CHECK(q.find("[out:json]") != std::string::npos);
  CHECK(q.find("primary") != std::string::npos);
  CHECK(q.find("1.29") != std::string::npos);
}

TEST_CASE("fetch_osm_roads against a local server")
{
  const std::string body = slurp(kData / "overpass_fixture.json");
  const BoundingBox bbox{1.29, 103.84, 1.30, 103.85};
  const std::set<std::string> classes = {"primary"};

  std::atomic<int> hits{0};
  std::atomic<int> fail_with{0};
  httplib::Server server;
  server.Post("/api/interpreter", [&](const httplib::Request & req, httplib::Response & res) {
    ++hits;
    if (fail_with != 0) {
      res.status = fail_with;
      return;
    }
    if (req.body.rfind("data=", 0) != 0) {
      res.status = 400;
      return;
    }
    res.set_content(body, "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  OverpassOptions opt;
  opt.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/api/interpreter";
  opt.cache_dir = fresh_dir("cache");
  opt.timeout = std::chrono::seconds(5);

  const auto first = fetch_osm_roads(bbox, classes, opt);
  CHECK(first.size() == 2);
  CHECK(hits == 1);
  const auto cache_file =
    overpass_cache_path(opt.cache_dir, build_overpass_query(bbox, classes, opt.timeout));
  CHECK(std::filesystem::exists(cache_file));

  const auto second = fetch_osm_roads(bbox, classes, opt);
  CHECK(second.size() == 2);
  CHECK(hits == 1);

  fail_with = 503;
  OverpassOptions uncached = opt;
  uncached.cache_dir.clear();
  try {
    fetch_osm_roads(bbox, classes, uncached);
    FAIL("expected a network error");
  } catch (const Error & e) {
    CHECK(e.kind() == ErrorKind::kNetwork);
    CHECK(e.retryable());
  }

  server.stop();
  worker.join();

  OverpassOptions offline = opt;
  offline.offline = true;
  CHECK(fetch_osm_roads(bbox, classes, offline).size() == 2);
  offline.cache_dir = fresh_dir("empty");
  try {
    fetch_osm_roads(bbox, classes, offline);
    FAIL("expected an offline cache miss");
  } catch (const Error & e) {
    CHECK(e.kind() == ErrorKind::kNetwork);
  }
}

TEST_CASE("zero-area bounding box returns nothing")
{
  OverpassOptions opt;
  opt.offline = true;
  CHECK(fetch_osm_roads({1.29, 103.84, 1.29, 103.85}, {"primary"}, opt).empty());
  CHECK_THROWS_AS(fetch_osm_roads({1.30, 103.84, 1.29, 103.85}, {"primary"}, opt), Error);
}
