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

#ifndef DIFFROAD__METRICS_HPP_
#define DIFFROAD__METRICS_HPP_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "diffroad/scenario.hpp"

namespace diffroad::metrics
{

/// Symmetric Hausdorff distance between finite point sets.
double hausdorff(std::span<const Vec2> a, std::span<const Vec2> b);

/// Uniform-bin histogram holding probabilities.
class Histogram
{
public:
  static constexpr int kDefaultBins = 50;
  static constexpr double kSmoothing = 1e-10;

  /// Counts over [lo, hi] (the last bin is closed), plus additive smoothing,
  /// normalized to sum to one.
  static Histogram from_samples(std::span<const double> samples, double lo, double hi,
                                int bins = kDefaultBins, double smoothing = kSmoothing);
  /// Probabilities as given; they must be non-negative and sum to one.
  static Histogram from_probabilities(std::vector<double> probabilities, double lo = 0.0,
                                      double hi = 1.0);

  int bins() const { return static_cast<int>(p_.size()); }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const std::vector<double> & probabilities() const { return p_; }

private:
  double lo_{0.0};
  double hi_{1.0};
  std::vector<double> p_;
};

/// Jensen-Shannon divergence in nats. Binning must match.
double jsd(const Histogram & p, const Histogram & q);

/// Histograms of two sample sets over their combined range.
std::pair<Histogram, Histogram> shared_histograms(std::span<const double> a,
                                                  std::span<const double> b,
                                                  int bins = Histogram::kDefaultBins);

std::vector<double> road_lengths(const std::vector<Polyline> & roads);
std::vector<double> control_point_distances(const std::vector<Polyline> & roads);

double jsd_road_length(const std::vector<Polyline> & real, const std::vector<Polyline> & gen);
double jsd_cpd(const std::vector<Polyline> & real, const std::vector<Polyline> & gen);

/// Square integral of the second derivative with sample spacing h.
double sisd(std::span<const Vec2> road, double h);
/// As above with h the mean spacing of the road.
double sisd(std::span<const Vec2> road);
/// Mean over the scenario's roads; two-point roads count as zero.
double sisd_scenario(const std::vector<Polyline> & roads);

struct ReportRow
{
  std::string label;
  std::size_t real_count{0};
  std::size_t generated_count{0};
  double hd{0.0};
  double jsd_rl{0.0};
  double jsd_cpd{0.0};
  double sisd{0.0};
};

struct Report
{
  std::vector<ReportRow> rows;

  std::string to_text() const;
  nlohmann::json to_json() const;
};

/// One row per scenario type present in both sets, then an "all" row. HD is
/// the mean over generated scenarios of the distance to the nearest real one.
Report build_report(const std::vector<MetricScenario> & real,
                    const std::vector<MetricScenario> & generated);

/// Overlaid real/generated histograms as an SVG document.
std::string histogram_svg(const std::string & title, std::span<const double> real,
                          std::span<const double> generated);

}  // namespace diffroad::metrics

#endif  // DIFFROAD__METRICS_HPP_
