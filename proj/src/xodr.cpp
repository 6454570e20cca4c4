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

#include "diffroad/xodr.hpp"

#include <charconv>
#include <cmath>
#include <set>

#include "diffroad/error.hpp"
#include "diffroad/xml.hpp"

namespace diffroad::xodr
{

namespace
{

constexpr double kSTolerance = 1e-9;
constexpr double kEndpointTolerance = 1e-6;
constexpr double kElevationTolerance = 1e-9;

std::string where(const xml::Element & e)
{
  return "<" + e.name + "> at line " + std::to_string(e.line);
}

const std::string & required(const xml::Element & e, std::string_view key)
{
  const std::string * v = e.attribute(key);
  if (!v) {
    throw Error(ErrorKind::kMissingAttribute,
                "missing attribute '" + std::string(key) + "' on " + where(e));
  }
  return *v;
}

double number(const xml::Element & e, std::string_view key)
{
  const std::string & text = required(e, key);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw Error(ErrorKind::kParse,
                "attribute '" + std::string(key) + "' on " + where(e) + " is not a finite number");
  }
  return v;
}

int integer(const xml::Element & e, std::string_view key)
{
  const std::string & text = required(e, key);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorKind::kParse,
                "attribute '" + std::string(key) + "' on " + where(e) + " is not an integer");
  }
  return v;
}

[[noreturn]] void unsupported(const xml::Element & e)
{
  throw Error(ErrorKind::kUnsupportedElement, "unsupported element '" + e.name + "' (" + where(e) + ")");
}

bool is_unsupported(const std::string & name)
{
  static const std::set<std::string> names{"arc", "spiral", "paramPoly3", "poly3", "junction"};
  return names.count(name) > 0;
}

std::string sanitize(std::string s)
{
  for (char & c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) {
      c = '_';
    }
  }
  return s;
}

}  // namespace

OpenDriveDocument export_opendrive(const Scenario3d & scenario, const std::string & name,
                                   std::vector<std::string> * warnings, double lane_width)
{
  const auto & roads = scenario.plan.roads;
  if (roads.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "export: scenario has no roads");
  }
  if (scenario.elevation.size() != roads.size()) {
    throw Error(ErrorKind::kInvalidArgument, "export: elevation profiles do not match roads");
  }
  OpenDriveDocument doc;
  doc.header.name = name;
  char geo[200];
  std::snprintf(geo, sizeof(geo), "+proj=eqc +lat_ts=%.12g +lat_0=%.12g +lon_0=%.12g +R=6371000 +units=m",
                scenario.plan.origin.lat, scenario.plan.origin.lat, scenario.plan.origin.lng);
  doc.header.geo_reference = geo;
  for (std::size_t r = 0; r < roads.size(); ++r) {
    const auto & line = roads[r];
    const auto & z = scenario.elevation[r];
    if (line.size() < 2 || z.size() != line.size()) {
      throw Error(ErrorKind::kInvalidArgument,
                  "export: road " + std::to_string(r) + " needs >= 2 points with elevation");
    }
    XodrRoad road;
    road.id = std::to_string(r + 1);
    road.name = name + "/" + std::to_string(r);
    road.lane_width = lane_width;
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
      const Vec2 a = line[i];
      const Vec2 b = line[i + 1];
      if (!std::isfinite(a.x) || !std::isfinite(a.y) || !std::isfinite(z[i]) ||
          !std::isfinite(b.x) || !std::isfinite(b.y) || !std::isfinite(z[i + 1])) {
        throw Error(ErrorKind::kInvalidArgument, "export: non-finite coordinate on road " + road.id);
      }
      const double len = distance(a, b);
      if (!(len > 0.0)) {
        if (warnings) {
          warnings->push_back("road " + road.id + ": skipped zero-length segment " + std::to_string(i));
        }
        continue;
      }
      road.plan_view.push_back({s, a.x, a.y, std::atan2(b.y - a.y, b.x - a.x), len});
      road.elevation.push_back({s, z[i], (z[i + 1] - z[i]) / len, 0.0, 0.0});
      s += len;
    }
    if (road.plan_view.empty()) {
      throw Error(ErrorKind::kInvalidArgument, "export: road " + road.id + " has zero length");
    }
    road.length = s;
    doc.roads.push_back(std::move(road));
  }
  validate(doc);
  return doc;
}

void validate(const OpenDriveDocument & doc)
{
  if (doc.roads.empty()) {
    throw Error(ErrorKind::kContinuity, "document has no roads");
  }
  std::set<std::string> ids;
  for (const auto & road : doc.roads) {
    const std::string ctx = "road " + road.id + ": ";
    if (!ids.insert(road.id).second) {
      throw Error(ErrorKind::kContinuity, ctx + "duplicate road id");
    }
    if (!(road.length > 0.0) || road.plan_view.empty()) {
      throw Error(ErrorKind::kContinuity, ctx + "road length must be positive");
    }
    double expected_s = 0.0;
    for (std::size_t i = 0; i < road.plan_view.size(); ++i) {
      const auto & g = road.plan_view[i];
      if (!(g.length > 0.0)) {
        throw Error(ErrorKind::kContinuity, ctx + "geometry " + std::to_string(i) + " has non-positive length");
      }
      if (std::abs(g.s - expected_s) > kSTolerance) {
        throw Error(ErrorKind::kContinuity, ctx + "geometry " + std::to_string(i) + " starts at s=" +
                                              xml::format_double(g.s) + ", expected " +
                                              xml::format_double(expected_s));
      }
      if (i > 0) {
        const auto & p = road.plan_view[i - 1];
        const double ex = p.x + p.length * std::cos(p.hdg);
        const double ey = p.y + p.length * std::sin(p.hdg);
        if (std::hypot(ex - g.x, ey - g.y) > kEndpointTolerance) {
          throw Error(ErrorKind::kContinuity,
                      ctx + "geometry " + std::to_string(i) + " does not start where the previous one ends");
        }
      }
      expected_s = g.s + g.length;
    }
    if (std::abs(expected_s - road.length) > kSTolerance) {
      throw Error(ErrorKind::kContinuity, ctx + "segment lengths do not sum to the road length");
    }
    for (std::size_t i = 0; i < road.elevation.size(); ++i) {
      const auto & e = road.elevation[i];
      if (i == 0 && std::abs(e.s) > kSTolerance) {
        throw Error(ErrorKind::kContinuity, ctx + "elevation profile does not start at s=0");
      }
      if (i + 1 < road.elevation.size()) {
        const auto & n = road.elevation[i + 1];
        const double ds = n.s - e.s;
        if (!(ds > 0.0)) {
          throw Error(ErrorKind::kContinuity, ctx + "elevation records are not increasing in s");
        }
        const double end = e.a + ds * (e.b + ds * (e.c + ds * e.d));
        if (std::abs(end - n.a) > kElevationTolerance) {
          throw Error(ErrorKind::kContinuity,
                      ctx + "elevation jumps at s=" + xml::format_double(n.s));
        }
      } else if (e.s >= road.length) {
        throw Error(ErrorKind::kContinuity, ctx + "elevation record beyond the road end");
      }
    }
  }
}

std::string serialize(const OpenDriveDocument & doc)
{
  validate(doc);
  const auto f = xml::format_double;
  xml::Writer w;
  w.open("OpenDRIVE");
  w.open("header", {{"revMajor", std::to_string(doc.header.rev_major)},
                    {"revMinor", std::to_string(doc.header.rev_minor)},
                    {"name", doc.header.name},
                    {"version", "1.00"}});
  w.cdata("geoReference", doc.header.geo_reference);
  if (!doc.header.user_data.empty()) {
    w.empty("userData", {{"code", "diffroad"}, {"value", doc.header.user_data}});
  }
  w.close();
  for (const auto & road : doc.roads) {
    w.open("road", {{"name", road.name}, {"length", f(road.length)}, {"id", road.id}, {"junction", "-1"}});
    w.open("planView");
    for (const auto & g : road.plan_view) {
      w.open("geometry", {{"s", f(g.s)}, {"x", f(g.x)}, {"y", f(g.y)}, {"hdg", f(g.hdg)}, {"length", f(g.length)}});
      w.empty("line");
      w.close();
    }
    w.close();
    w.open("elevationProfile");
    for (const auto & e : road.elevation) {
      w.empty("elevation", {{"s", f(e.s)}, {"a", f(e.a)}, {"b", f(e.b)}, {"c", f(e.c)}, {"d", f(e.d)}});
    }
    w.close();
    const std::vector<std::pair<std::string, std::string>> width = {
      {"sOffset", "0"}, {"a", f(road.lane_width)}, {"b", "0"}, {"c", "0"}, {"d", "0"}};
    w.open("lanes").open("laneSection", {{"s", "0"}});
    w.open("left").open("lane", {{"id", "1"}, {"type", "driving"}, {"level", "false"}});
    w.empty("width", width).close().close();
    w.open("center").empty("lane", {{"id", "0"}, {"type", "none"}, {"level", "false"}}).close();
    w.open("right").open("lane", {{"id", "-1"}, {"type", "driving"}, {"level", "false"}});
    w.empty("width", width).close().close();
    w.close().close();
    w.close();
  }
  w.close();
  return w.str();
}

namespace
{

void reject_unsupported(const xml::Element & e)
{
  if (is_unsupported(e.name)) {
    unsupported(e);
  }
  for (const auto & c : e.children) {
    reject_unsupported(c);
  }
}

XodrRoad parse_road(const xml::Element & e)
{
  XodrRoad road;
  road.id = required(e, "id");
  road.length = number(e, "length");
  if (const auto * n = e.attribute("name")) {
    road.name = *n;
  }
  const auto * plan = e.child("planView");
  if (!plan) {
    throw Error(ErrorKind::kMissingAttribute, "road " + road.id + " has no <planView> (" + where(e) + ")");
  }
  for (const auto & g : plan->children) {
    if (g.name != "geometry") {
      continue;
    }
    bool has_line = false;
    for (const auto & shape : g.children) {
      if (shape.name == "line") {
        has_line = true;
      } else if (is_unsupported(shape.name)) {
        unsupported(shape);
      }
    }
    if (!has_line) {
      throw Error(ErrorKind::kMissingAttribute, "geometry without a <line> shape (" + where(g) + ")");
    }
    road.plan_view.push_back(
      {number(g, "s"), number(g, "x"), number(g, "y"), number(g, "hdg"), number(g, "length")});
  }
  if (const auto * prof = e.child("elevationProfile")) {
    for (const auto * el : prof->children_named("elevation")) {
      road.elevation.push_back(
        {number(*el, "s"), number(*el, "a"), number(*el, "b"), number(*el, "c"), number(*el, "d")});
    }
  }
  road.lane_width = kDefaultLaneWidth;
  if (const auto * lanes = e.child("lanes")) {
    if (const auto * section = lanes->child("laneSection")) {
      if (const auto * left = section->child("left")) {
        if (const auto * lane = left->child("lane")) {
          if (const auto * w = lane->child("width")) {
            road.lane_width = number(*w, "a");
          }
        }
      }
    }
  }
  return road;
}

}  // namespace

OpenDriveDocument parse_opendrive(std::string_view text)
{
  const xml::Element root = xml::parse(text);
  if (root.name != "OpenDRIVE") {
    throw Error(ErrorKind::kXmlSyntax, "root element is <" + root.name + ">, expected <OpenDRIVE>");
  }
  reject_unsupported(root);
  OpenDriveDocument doc;
  const auto * header = root.child("header");
  if (!header) {
    throw Error(ErrorKind::kMissingAttribute, "document has no <header>");
  }
  doc.header.rev_major = integer(*header, "revMajor");
  doc.header.rev_minor = integer(*header, "revMinor");
  if (const auto * n = header->attribute("name")) {
    doc.header.name = *n;
  }
  if (const auto * g = header->child("geoReference")) {
    doc.header.geo_reference = g->text;
  }
  if (const auto * u = header->child("userData")) {
    if (const auto * v = u->attribute("value")) {
      doc.header.user_data = *v;
    }
  }
  for (const auto * r : root.children_named("road")) {
    doc.roads.push_back(parse_road(*r));
  }
  validate(doc);
  return doc;
}

Scenario3d to_scenario(const OpenDriveDocument & doc)
{
  Scenario3d out;
  for (const auto & road : doc.roads) {
    Polyline line;
    std::vector<double> z;
    const auto height = [&](double s) {
      const ElevationRecord * rec = nullptr;
      for (const auto & e : road.elevation) {
        if (e.s <= s + kSTolerance) {
          rec = &e;
        }
      }
      if (!rec) {
        return 0.0;
      }
      const double ds = s - rec->s;
      return rec->a + ds * (rec->b + ds * (rec->c + ds * rec->d));
    };
    for (const auto & g : road.plan_view) {
      line.push_back({g.x, g.y});
      z.push_back(height(g.s));
    }
    const auto & last = road.plan_view.back();
    line.push_back({last.x + last.length * std::cos(last.hdg), last.y + last.length * std::sin(last.hdg)});
    z.push_back(height(last.s + last.length));
    out.plan.roads.push_back(std::move(line));
    out.elevation.push_back(std::move(z));
  }
  return out;
}

std::string file_name(const std::string & scenario_id, ScenarioType type)
{
  return sanitize(scenario_id) + "_" + std::string(to_string(type)) + ".xodr";
}

}  // namespace diffroad::xodr
