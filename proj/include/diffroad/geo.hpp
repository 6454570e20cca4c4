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

#ifndef DIFFROAD__GEO_HPP_
#define DIFFROAD__GEO_HPP_

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "diffroad/scenario.hpp"

/// Map-data ingestion: acquire road polylines, cut them into fixed-size
/// scenario tensors and label them with condition attributes.
namespace diffroad::geo
{

inline constexpr double kEarthRadiusM = 6371000.0;

struct BoundingBox
{
  double south{0.0};
  double west{0.0};
  double north{0.0};
  double east{0.0};

  bool well_formed() const { return south < north && west < east; }
  bool contains(ShapePoint p) const
  {
    return p.lat >= south && p.lat <= north && p.lng >= west && p.lng <= east;
  }
};

struct RawRoad
{
  std::string id;
  std::vector<ShapePoint> points;
  std::string highway_class;
};

struct RawScenario
{
  ShapePoint center{};
  std::vector<RawRoad> roads;
  ScenarioType scenario_type{ScenarioType::kIntersection};
  std::string id;
};

/// A scenario centre declared in an offline input file.
struct ScenarioSeed
{
  std::string id;
  ShapePoint center{};
  ScenarioType type{ScenarioType::kIntersection};
};

struct OfflineInput
{
  std::vector<RawRoad> roads;
  std::vector<ScenarioSeed> seeds;
};

/// Reads a GeoJSON FeatureCollection. LineString features with a `highway`
/// property become roads; Point features with a `scenario_type` property
/// become scenario centres.
OfflineInput parse_geojson(std::string_view text);
OfflineInput read_geojson_file(const std::filesystem::path & path);

struct OverpassOptions
{
  std::string endpoint{"http://overpass-api.de/api/interpreter"};
  std::filesystem::path cache_dir;  // empty: no cache
  bool offline{false};
  std::chrono::seconds timeout{60};
};

std::string build_overpass_query(const BoundingBox & bbox, const std::set<std::string> & classes,
                                 std::chrono::seconds timeout);

/// Parses an Overpass JSON response (`out geom`) and keeps ways whose class is
/// requested and that have at least one vertex inside bbox.
std::vector<RawRoad> parse_overpass_response(std::string_view json, const BoundingBox & bbox,
                                             const std::set<std::string> & classes);

/// Cache file used for a query: <cache_dir>/<fnv1a64(query) hex>.json.
std::filesystem::path overpass_cache_path(const std::filesystem::path & cache_dir,
                                          std::string_view query);

/// POSTs an Overpass-QL query, or replays a cached response. With
/// options.offline a cache miss is an error.
std::vector<RawRoad> fetch_osm_roads(const BoundingBox & bbox,
                                     const std::set<std::string> & classes,
                                     const OverpassOptions & options);

/// The n roads closest to centre (minimum vertex distance), nearest first;
/// ties broken by id.
RawScenario extract_scenario(std::span<const RawRoad> roads, ShapePoint center, std::size_t n,
                             ScenarioType type = ScenarioType::kIntersection);

double haversine_m(ShapePoint a, ShapePoint b);

/// Equirectangular projection about origin, in meters.
Polyline project_to_local(std::span<const ShapePoint> points, ShapePoint origin);
std::vector<ShapePoint> unproject_from_local(std::span<const Vec2> points, ShapePoint origin);

/// k points at equal arc-length spacing; endpoints preserved.
Polyline resample_road(std::span<const Vec2> polyline, std::size_t k);

/// The contiguous piece of a polyline inside the square [-h, h]^2 that
/// contains the vertex closest to the origin, with boundary crossings
/// interpolated. Empty when the polyline never enters the window.
Polyline clip_to_window(std::span<const Vec2> polyline, double half_extent_m);

inline constexpr double kJunctionRadiusM = 10.0;

/// Project, clip and resample every road of a raw scenario (meters).
std::vector<Polyline> metric_roads(const RawScenario & raw, std::size_t k, double half_extent_m);

RoadScenario normalize_scenario(const RawScenario & raw, std::size_t n, std::size_t k,
                                double half_extent_m);

/// Scale a normalized scenario back to meters; padded roads are dropped.
MetricScenario denormalize(const RoadScenario & scenario);

}  // namespace diffroad::geo

#endif  // DIFFROAD__GEO_HPP_
