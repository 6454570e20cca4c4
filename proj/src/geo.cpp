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

#include "diffroad/geo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "diffroad/error.hpp"
#include "diffroad/geometry.hpp"
#include "diffroad/rng.hpp"

namespace diffroad::geo
{

namespace
{

using nlohmann::json;

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::vector<ShapePoint> dedupe(std::vector<ShapePoint> points)
{
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

bool valid_point(ShapePoint p)
{
  return p.lat >= -90.0 && p.lat <= 90.0 && p.lng >= -180.0 && p.lng <= 180.0;
}

std::string read_text(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::kIo, "cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string id_of(const json & feature, const json & props, std::size_t index)
{
  if (props.contains("id")) {
    return props["id"].is_string() ? props["id"].get<std::string>() : props["id"].dump();
  }
  if (feature.contains("id")) {
    return feature["id"].is_string() ? feature["id"].get<std::string>() : feature["id"].dump();
  }
  return "feature-" + std::to_string(index);
}

}  // namespace

OfflineInput parse_geojson(std::string_view text)
{
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error & e) {
    throw Error(ErrorKind::kParse, std::string("GeoJSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
      !doc.contains("features") || !doc["features"].is_array()) {
    throw Error(ErrorKind::kParse, "GeoJSON: expected a FeatureCollection with a features array");
  }

  OfflineInput out;
  std::size_t index = 0;
  for (const auto & feature : doc["features"]) {
    const std::string where = "GeoJSON feature " + std::to_string(index);
    try {
      const json props = feature.value("properties", json::object());
      const json & geom = feature.at("geometry");
      const std::string gtype = geom.at("type").get<std::string>();
      const json & coords = geom.at("coordinates");
      if (gtype == "LineString" && props.contains("highway")) {
        RawRoad road;
        road.id = id_of(feature, props, index);
        road.highway_class = props["highway"].get<std::string>();
        for (const auto & c : coords) {
          ShapePoint p{c.at(1).get<double>(), c.at(0).get<double>()};
          if (!valid_point(p)) {
            throw Error(ErrorKind::kParse, where + ": coordinate out of WGS84 range");
          }
          road.points.push_back(p);
        }
        road.points = dedupe(std::move(road.points));
        if (road.points.size() >= 2) {
          out.roads.push_back(std::move(road));
        }
      } else if (gtype == "Point" && props.contains("scenario_type")) {
        ScenarioSeed seed;
        seed.id = id_of(feature, props, index);
        seed.center = {coords.at(1).get<double>(), coords.at(0).get<double>()};
        seed.type = parse_scenario_type(props["scenario_type"].get<std::string>());
        if (!valid_point(seed.center)) {
          throw Error(ErrorKind::kParse, where + ": coordinate out of WGS84 range");
        }
        out.seeds.push_back(std::move(seed));
      }
    } catch (const json::exception & e) {
      throw Error(ErrorKind::kParse, where + ": " + e.what());
    }
    ++index;
  }
  return out;
}

OfflineInput read_geojson_file(const std::filesystem::path & path)
{
  return parse_geojson(read_text(path));
}

std::string build_overpass_query(const BoundingBox & bbox, const std::set<std::string> & classes,
                                 std::chrono::seconds timeout)
{
  std::string alternation;
  for (const auto & c : classes) {
    if (!alternation.empty()) {
      alternation += '|';
    }
    alternation += c;
  }
  char box[160];
  std::snprintf(box, sizeof(box), "(%.7f,%.7f,%.7f,%.7f)", bbox.south, bbox.west, bbox.north,
                bbox.east);
  std::ostringstream q;
  q << "[out:json][timeout:" << timeout.count() << "];\n"
    << "(\n  way[\"highway\"~\"^(" << alternation << ")$\"]" << box << ";\n);\n"
    << "out geom;\n";
  return q.str();
}

std::vector<RawRoad> parse_overpass_response(std::string_view text, const BoundingBox & bbox,
                                             const std::set<std::string> & classes)
{
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error & e) {
    throw Error(ErrorKind::kParse, std::string("Overpass response: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("elements") || !doc["elements"].is_array()) {
    throw Error(ErrorKind::kParse, "Overpass response: missing 'elements' array");
  }

  std::vector<RawRoad> roads;
  for (const auto & element : doc["elements"]) {
    const std::string type = element.value("type", "");
    const std::string name =
      type + "/" + (element.contains("id") ? element["id"].dump() : std::string("?"));
    if (type != "way") {
      continue;
    }
    try {
      const json tags = element.value("tags", json::object());
      if (!tags.contains("highway")) {
        continue;
      }
      const auto cls = tags["highway"].get<std::string>();
      if (classes.count(cls) == 0) {
        continue;
      }
      if (!element.contains("geometry")) {
        throw Error(ErrorKind::kParse, "Overpass element " + name + ": missing 'geometry'");
      }
      RawRoad road;
      road.id = element.at("id").dump();
      road.highway_class = cls;
      for (const auto & node : element.at("geometry")) {
        ShapePoint p{node.at("lat").get<double>(), node.at("lon").get<double>()};
        if (!valid_point(p)) {
          throw Error(ErrorKind::kParse, "Overpass element " + name + ": coordinate out of range");
        }
        road.points.push_back(p);
      }
      road.points = dedupe(std::move(road.points));
      const bool touches = std::any_of(road.points.begin(), road.points.end(),
                                       [&](ShapePoint p) { return bbox.contains(p); });
      if (road.points.size() >= 2 && touches) {
        roads.push_back(std::move(road));
      }
    } catch (const json::exception & e) {
      throw Error(ErrorKind::kParse, "Overpass element " + name + ": " + e.what());
    }
  }
  return roads;
}

std::filesystem::path overpass_cache_path(const std::filesystem::path & cache_dir,
                                          std::string_view query)
{
  char name[32];
  std::snprintf(name, sizeof(name), "%016llx.json",
                static_cast<unsigned long long>(fnv1a64(query.data(), query.size())));
  return cache_dir / name;
}

double haversine_m(ShapePoint a, ShapePoint b)
{
  const double dlat = (b.lat - a.lat) * kDegToRad;
  const double dlng = (b.lng - a.lng) * kDegToRad;
  const double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(a.lat * kDegToRad) * std::cos(b.lat * kDegToRad) *
                     std::sin(dlng / 2) * std::sin(dlng / 2);
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

RawScenario extract_scenario(std::span<const RawRoad> roads, ShapePoint center, std::size_t n,
                             ScenarioType type)
{
  if (roads.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "extract_scenario: empty road list");
  }
  if (n == 0) {
    throw Error(ErrorKind::kInvalidArgument, "extract_scenario: n must be >= 1");
  }
  struct Ranked
  {
    double dist;
    const RawRoad * road;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(roads.size());
  for (const auto & road : roads) {
    double best = INFINITY;
    for (const auto & p : road.points) {
      best = std::min(best, haversine_m(center, p));
    }
    ranked.push_back({best, &road});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked & a, const Ranked & b) {
    return a.dist != b.dist ? a.dist < b.dist : a.road->id < b.road->id;
  });

  RawScenario out;
  out.center = center;
  out.scenario_type = type;
  for (std::size_t i = 0; i < std::min(n, ranked.size()); ++i) {
    out.roads.push_back(*ranked[i].road);
  }
  return out;
}

Polyline project_to_local(std::span<const ShapePoint> points, ShapePoint origin)
{
  const double coslat = std::cos(origin.lat * kDegToRad);
  Polyline out;
  out.reserve(points.size());
  for (const auto & p : points) {
    if (std::abs(p.lat - origin.lat) > 1.0 || std::abs(p.lng - origin.lng) > 1.0) {
      throw Error(ErrorKind::kOutOfRange, "project_to_local: point beyond 1 degree of origin");
    }
    out.push_back({(p.lng - origin.lng) * coslat * kDegToRad * kEarthRadiusM,
                   (p.lat - origin.lat) * kDegToRad * kEarthRadiusM});
  }
  return out;
}

std::vector<ShapePoint> unproject_from_local(std::span<const Vec2> points, ShapePoint origin)
{
  const double coslat = std::cos(origin.lat * kDegToRad);
  std::vector<ShapePoint> out;
  out.reserve(points.size());
  for (const auto & p : points) {
    out.push_back({origin.lat + p.y / (kDegToRad * kEarthRadiusM),
                   origin.lng + p.x / (coslat * kDegToRad * kEarthRadiusM)});
  }
  return out;
}

Polyline resample_road(std::span<const Vec2> polyline, std::size_t k)
{
  if (k < 2) {
    throw Error(ErrorKind::kInvalidArgument, "resample_road: k must be >= 2");
  }
  if (polyline.size() < 2) {
    throw Error(ErrorKind::kInvalidArgument, "resample_road: need at least 2 points");
  }
  std::vector<double> cumulative(polyline.size(), 0.0);
  for (std::size_t i = 1; i < polyline.size(); ++i) {
    cumulative[i] = cumulative[i - 1] + distance(polyline[i - 1], polyline[i]);
  }
  const double total = cumulative.back();
  if (!(total > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "resample_road: zero-length polyline");
  }

  Polyline out;
  out.reserve(k);
  out.push_back(polyline.front());
  std::size_t seg = 1;
  for (std::size_t j = 1; j + 1 < k; ++j) {
    const double s = total * static_cast<double>(j) / static_cast<double>(k - 1);
    while (seg + 1 < polyline.size() && cumulative[seg] < s) {
      ++seg;
    }
    const double len = cumulative[seg] - cumulative[seg - 1];
    const double t = len > 0.0 ? (s - cumulative[seg - 1]) / len : 0.0;
    out.push_back(polyline[seg - 1] + t * (polyline[seg] - polyline[seg - 1]));
  }
  out.push_back(polyline.back());
  return out;
}

Polyline clip_to_window(std::span<const Vec2> polyline, double h)
{
  std::vector<Polyline> runs;
  Polyline current;
  bool open = false;
  for (std::size_t i = 1; i < polyline.size(); ++i) {
    const Vec2 a = polyline[i - 1];
    const Vec2 d = polyline[i] - a;
    // Liang-Barsky against the square [-h, h]^2.
    double t0 = 0.0;
    double t1 = 1.0;
    bool visible = true;
    const double p[4] = {-d.x, d.x, -d.y, d.y};
    const double q[4] = {a.x + h, h - a.x, a.y + h, h - a.y};
    for (int e = 0; e < 4 && visible; ++e) {
      if (p[e] == 0.0) {
        visible = q[e] >= 0.0;
      } else {
        const double r = q[e] / p[e];
        if (p[e] < 0.0) {
          t0 = std::max(t0, r);
        } else {
          t1 = std::min(t1, r);
        }
        visible = t0 <= t1;
      }
    }
    if (!visible) {
      if (open) {
        runs.push_back(std::move(current));
        current.clear();
        open = false;
      }
      continue;
    }
    if (!(open && t0 == 0.0)) {
      if (open) {
        runs.push_back(std::move(current));
        current.clear();
      }
      current.push_back(t0 == 0.0 ? a : a + t0 * d);
      open = true;
    }
    current.push_back(t1 == 1.0 ? polyline[i] : a + t1 * d);
    if (t1 < 1.0) {
      runs.push_back(std::move(current));
      current.clear();
      open = false;
    }
  }
  if (open) {
    runs.push_back(std::move(current));
  }

  Polyline best;
  double best_dist = INFINITY;
  for (auto & run : runs) {
    run.erase(std::unique(run.begin(), run.end()), run.end());
    if (run.size() < 2) {
      continue;
    }
    const double d = geometry::point_polyline_distance({0.0, 0.0}, run);
    if (d < best_dist) {
      best_dist = d;
      best = std::move(run);
    }
  }
  return best;
}

std::vector<Polyline> metric_roads(const RawScenario & raw, std::size_t k, double half_extent_m)
{
  std::vector<Polyline> out;
  for (const auto & road : raw.roads) {
    const Polyline local = project_to_local(road.points, raw.center);
    const Polyline clipped = clip_to_window(local, half_extent_m);
    if (clipped.size() < 2 || !(geometry::polyline_length(clipped) > 0.0)) {
      continue;
    }
    out.push_back(resample_road(clipped, k));
  }
  return out;
}

RoadScenario normalize_scenario(const RawScenario & raw, std::size_t n, std::size_t k,
                                double half_extent_m)
{
  if (!(half_extent_m > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "normalize_scenario: half_extent_m must be > 0");
  }
  std::vector<Polyline> roads = metric_roads(raw, k, half_extent_m);
  if (roads.size() > n) {
    roads.resize(n);
  }

  RoadScenario out(n, k);
  out.origin = raw.center;
  out.half_extent_m = half_extent_m;
  out.id = raw.id;
  for (std::size_t r = 0; r < roads.size(); ++r) {
    out.valid[r] = true;
    for (std::size_t p = 0; p < k; ++p) {
      const Vec2 v = roads[r][p];
      out.set(r, p,
              {std::clamp(v.x / half_extent_m, -1.0, 1.0), std::clamp(v.y / half_extent_m, -1.0, 1.0)});
    }
  }
  const auto junctions = geometry::detect_junctions(roads, kJunctionRadiusM);
  out.condition =
    ConditionVector::make(raw.scenario_type, half_extent_m, static_cast<int>(junctions.size()));
  return out;
}

MetricScenario denormalize(const RoadScenario & scenario)
{
  if (!(scenario.half_extent_m > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "denormalize: scenario has no half_extent_m");
  }
  if (scenario.valid.size() != scenario.n || scenario.points.size() != scenario.n * scenario.k * 2) {
    throw Error(ErrorKind::kInvalidArgument, "denormalize: inconsistent scenario shape");
  }
  MetricScenario out;
  out.origin = scenario.origin;
  out.type = scenario.condition.type();
  out.id = scenario.id;
  for (std::size_t r = 0; r < scenario.n; ++r) {
    if (!scenario.valid[r]) {
      continue;
    }
    Polyline road = scenario.road(r);
    for (auto & p : road) {
      p = scenario.half_extent_m * p;
    }
    out.roads.push_back(std::move(road));
  }
  return out;
}

}  // namespace diffroad::geo
