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

#include "diffroad/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "diffroad/error.hpp"
#include "diffroad/geometry.hpp"

namespace diffroad::metrics
{

using nlohmann::json;

namespace
{

double squared_distance(Vec2 a, Vec2 b)
{
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

// Directed distance with an early break: once some b is closer than the
// running maximum, a cannot raise it.
double directed_squared(std::span<const Vec2> a, std::span<const Vec2> b)
{
  double cmax = 0.0;
  for (const Vec2 p : a) {
    double cmin = std::numeric_limits<double>::infinity();
    bool skipped = false;
    for (const Vec2 q : b) {
      const double d = squared_distance(p, q);
      if (d < cmax) {
        skipped = true;
        break;
      }
      cmin = std::min(cmin, d);
    }
    if (!skipped && cmin > cmax) {
      cmax = cmin;
    }
  }
  return cmax;
}

}  // namespace

double hausdorff(std::span<const Vec2> a, std::span<const Vec2> b)
{
  if (a.empty() || b.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "hausdorff: point sets must be non-empty");
  }
  return std::sqrt(std::max(directed_squared(a, b), directed_squared(b, a)));
}

Histogram Histogram::from_samples(std::span<const double> samples, double lo, double hi, int bins,
                                  double smoothing)
{
  if (bins < 1 || !(hi > lo) || smoothing < 0.0) {
    throw Error(ErrorKind::kInvalidArgument, "histogram: invalid binning");
  }
  if (samples.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "histogram: no samples");
  }
  Histogram h;
  h.lo_ = lo;
  h.hi_ = hi;
  std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
  const double width = (hi - lo) / bins;
  for (double v : samples) {
    if (!(v >= lo && v <= hi)) {
      throw Error(ErrorKind::kOutOfRange, "histogram: sample outside the binning range");
    }
    const int idx = std::min(bins - 1, static_cast<int>((v - lo) / width));
    counts[static_cast<std::size_t>(idx)] += 1.0;
  }
  double total = 0.0;
  for (double & c : counts) {
    c = c / static_cast<double>(samples.size()) + smoothing;
    total += c;
  }
  for (double & c : counts) {
    c /= total;
  }
  h.p_ = std::move(counts);
  return h;
}

Histogram Histogram::from_probabilities(std::vector<double> probabilities, double lo, double hi)
{
  if (probabilities.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "histogram: no bins");
  }
  double total = 0.0;
  for (double v : probabilities) {
    if (!(v >= 0.0)) {
      throw Error(ErrorKind::kInvalidArgument, "histogram: negative probability");
    }
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorKind::kInvalidArgument, "histogram: probabilities must sum to 1");
  }
  Histogram h;
  h.lo_ = lo;
  h.hi_ = hi;
  h.p_ = std::move(probabilities);
  return h;
}

double jsd(const Histogram & p, const Histogram & q)
{
  if (p.bins() != q.bins() || p.lo() != q.lo() || p.hi() != q.hi()) {
    throw Error(ErrorKind::kInvalidArgument, "jsd: histograms use different binning");
  }
  double sum = 0.0;
  for (int i = 0; i < p.bins(); ++i) {
    const double a = p.probabilities()[static_cast<std::size_t>(i)];
    const double b = q.probabilities()[static_cast<std::size_t>(i)];
    const double m = 0.5 * (a + b);
    if (a > 0.0) {
      sum += 0.5 * a * std::log(a / m);
    }
    if (b > 0.0) {
      sum += 0.5 * b * std::log(b / m);
    }
  }
  return std::clamp(sum, 0.0, std::log(2.0));
}

std::pair<Histogram, Histogram> shared_histograms(std::span<const double> a,
                                                  std::span<const double> b, int bins)
{
  if (a.empty() || b.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "jsd: sample sets must be non-empty");
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (auto set : {a, b}) {
    for (double v : set) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  return {Histogram::from_samples(a, lo, hi, bins), Histogram::from_samples(b, lo, hi, bins)};
}

std::vector<double> road_lengths(const std::vector<Polyline> & roads)
{
  std::vector<double> out;
  for (const auto & r : roads) {
    out.push_back(geometry::polyline_length(r));
  }
  return out;
}

std::vector<double> control_point_distances(const std::vector<Polyline> & roads)
{
  std::vector<double> out;
  for (const auto & r : roads) {
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
      out.push_back(distance(r[i], r[i + 1]));
    }
  }
  return out;
}

double jsd_road_length(const std::vector<Polyline> & real, const std::vector<Polyline> & gen)
{
  const auto [p, q] = shared_histograms(road_lengths(real), road_lengths(gen));
  return jsd(p, q);
}

double jsd_cpd(const std::vector<Polyline> & real, const std::vector<Polyline> & gen)
{
  const auto [p, q] = shared_histograms(control_point_distances(real), control_point_distances(gen));
  return jsd(p, q);
}

double sisd(std::span<const Vec2> road, double h)
{
  if (road.size() < 3) {
    throw Error(ErrorKind::kInvalidArgument, "sisd: need at least 3 points");
  }
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw Error(ErrorKind::kInvalidArgument, "sisd: degenerate sample spacing");
  }
  const double inv_h2 = 1.0 / (h * h);
  double sum = 0.0;
  for (std::size_t i = 1; i + 1 < road.size(); ++i) {
    const double ddx = (road[i + 1].x - 2.0 * road[i].x + road[i - 1].x) * inv_h2;
    const double ddy = (road[i + 1].y - 2.0 * road[i].y + road[i - 1].y) * inv_h2;
    sum += (ddx * ddx + ddy * ddy) * h;
  }
  return sum;
}

double sisd(std::span<const Vec2> road)
{
  if (road.size() < 3) {
    throw Error(ErrorKind::kInvalidArgument, "sisd: need at least 3 points");
  }
  return sisd(road, geometry::polyline_length(road) / static_cast<double>(road.size() - 1));
}

double sisd_scenario(const std::vector<Polyline> & roads)
{
  if (roads.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "sisd: scenario has no roads");
  }
  double sum = 0.0;
  for (const auto & r : roads) {
    // a two-point road is a straight segment
    sum += r.size() < 3 ? 0.0 : sisd(r);
  }
  return sum / static_cast<double>(roads.size());
}

namespace
{

std::vector<Vec2> all_points(const MetricScenario & s)
{
  std::vector<Vec2> out;
  for (const auto & r : s.roads) {
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

std::vector<Polyline> pooled_roads(const std::vector<const MetricScenario *> & set)
{
  std::vector<Polyline> out;
  for (const auto * s : set) {
    out.insert(out.end(), s->roads.begin(), s->roads.end());
  }
  return out;
}

ReportRow make_row(const std::string & label, const std::vector<const MetricScenario *> & real,
                   const std::vector<const MetricScenario *> & gen)
{
  ReportRow row;
  row.label = label;
  row.real_count = real.size();
  row.generated_count = gen.size();
  std::vector<std::vector<Vec2>> real_points;
  for (const auto * s : real) {
    real_points.push_back(all_points(*s));
  }
  double hd = 0.0;
  double smooth = 0.0;
  for (const auto * g : gen) {
    const auto pts = all_points(*g);
    double best = std::numeric_limits<double>::infinity();
    for (const auto & rp : real_points) {
      best = std::min(best, hausdorff(pts, rp));
    }
    hd += best;
    smooth += sisd_scenario(g->roads);
  }
  row.hd = hd / static_cast<double>(gen.size());
  row.sisd = smooth / static_cast<double>(gen.size());
  const auto real_roads = pooled_roads(real);
  const auto gen_roads = pooled_roads(gen);
  row.jsd_rl = jsd_road_length(real_roads, gen_roads);
  row.jsd_cpd = jsd_cpd(real_roads, gen_roads);
  return row;
}

}  // namespace

Report build_report(const std::vector<MetricScenario> & real,
                    const std::vector<MetricScenario> & generated)
{
  const auto usable = [](const std::vector<MetricScenario> & set) {
    std::vector<const MetricScenario *> out;
    for (const auto & s : set) {
      if (!s.roads.empty()) {
        out.push_back(&s);
      }
    }
    return out;
  };
  const auto real_all = usable(real);
  const auto gen_all = usable(generated);
  if (real_all.empty() || gen_all.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "report: both scenario sets must be non-empty");
  }
  Report report;
  for (ScenarioType t : kAllScenarioTypes) {
    std::vector<const MetricScenario *> r;
    std::vector<const MetricScenario *> g;
    std::copy_if(real_all.begin(), real_all.end(), std::back_inserter(r),
                 [t](const MetricScenario * s) { return s->type == t; });
    std::copy_if(gen_all.begin(), gen_all.end(), std::back_inserter(g),
                 [t](const MetricScenario * s) { return s->type == t; });
    if (!r.empty() && !g.empty()) {
      report.rows.push_back(make_row(std::string(to_string(t)), r, g));
    }
  }
  report.rows.push_back(make_row("all", real_all, gen_all));
  return report;
}

std::string Report::to_text() const
{
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-13s %6s %6s %12s %10s %10s %12s\n", "type", "real", "gen",
                "HD(m)", "JSD-RL", "JSD-CPD", "SISD");
  out += line;
  for (const auto & r : rows) {
    std::snprintf(line, sizeof(line), "%-13s %6zu %6zu %12.4f %10.6f %10.6f %12.6f\n",
                  r.label.c_str(), r.real_count, r.generated_count, r.hd, r.jsd_rl, r.jsd_cpd,
                  r.sisd);
    out += line;
  }
  return out;
}

json Report::to_json() const
{
  json arr = json::array();
  for (const auto & r : rows) {
    arr.push_back({{"type", r.label},
                   {"real", r.real_count},
                   {"generated", r.generated_count},
                   {"hd_m", r.hd},
                   {"jsd_rl", r.jsd_rl},
                   {"jsd_cpd", r.jsd_cpd},
                   {"sisd", r.sisd}});
  }
  return {{"rows", arr}};
}

std::string histogram_svg(const std::string & title, std::span<const double> real,
                          std::span<const double> generated)
{
  const auto [p, q] = shared_histograms(real, generated);
  const double width = 600.0;
  const double height = 300.0;
  const double margin = 40.0;
  double peak = 0.0;
  for (int i = 0; i < p.bins(); ++i) {
    peak = std::max({peak, p.probabilities()[static_cast<std::size_t>(i)],
                     q.probabilities()[static_cast<std::size_t>(i)]});
  }
  const double bar = (width - 2 * margin) / p.bins();
  std::string svg;
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\">\n"
                "<text x=\"%.0f\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">%s</text>\n",
                width, height, margin, title.c_str());
  svg += buf;
  const auto draw = [&](const Histogram & h, const char * colour, double offset) {
    for (int i = 0; i < h.bins(); ++i) {
      const double v = h.probabilities()[static_cast<std::size_t>(i)];
      const double bh = peak > 0.0 ? v / peak * (height - 2 * margin) : 0.0;
      std::snprintf(buf, sizeof(buf),
                    "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"%s\" "
                    "fill-opacity=\"0.6\"/>\n",
                    margin + i * bar + offset, height - margin - bh, bar / 2, bh, colour);
      svg += buf;
    }
  };
  draw(p, "#1f77b4", 0.0);
  draw(q, "#d62728", bar / 2);
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.0f\" y=\"%.0f\" font-family=\"sans-serif\" font-size=\"11\">%.3g</text>\n"
                "<text x=\"%.0f\" y=\"%.0f\" font-family=\"sans-serif\" font-size=\"11\" "
                "text-anchor=\"end\">%.3g</text>\n"
                "<text x=\"%.0f\" y=\"%.0f\" font-family=\"sans-serif\" font-size=\"11\" "
                "fill=\"#1f77b4\">real</text>\n"
                "<text x=\"%.0f\" y=\"%.0f\" font-family=\"sans-serif\" font-size=\"11\" "
                "fill=\"#d62728\">generated</text>\n</svg>\n",
                margin, height - margin + 15, p.lo(), width - margin, height - margin + 15, p.hi(),
                width - margin - 120, 20.0, width - margin - 80, 20.0);
  svg += buf;
  return svg;
}

}  // namespace diffroad::metrics
