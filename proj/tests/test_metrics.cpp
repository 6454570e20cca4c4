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
#include <cmath>
#include <limits>
#include <numbers>

#include "diffroad/error.hpp"
#include "diffroad/metrics.hpp"
#include "diffroad/rng.hpp"

using namespace diffroad;
using namespace diffroad::metrics;

namespace
{

double brute_hausdorff(const std::vector<Vec2> & a, const std::vector<Vec2> & b)
{
  const auto directed = [](const std::vector<Vec2> & x, const std::vector<Vec2> & y) {
    double worst = 0.0;
    for (const Vec2 p : x) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec2 q : y) {
        best = std::min(best, (p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y));
      }
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::sqrt(std::max(directed(a, b), directed(b, a)));
}

std::vector<Vec2> random_set(RandomStream & rng, int n)
{
  std::vector<Vec2> out;
  for (int i = 0; i < n; ++i) {
    out.push_back({rng.uniform() * 100.0, rng.normal() * 30.0});
  }
  return out;
}

// 50 uniform bins over the joint range; 1e-10 added to each normalized bin, then renormalized.
std::vector<double> oracle_histogram(const std::vector<double> & v, double lo, double hi)
{
  std::vector<double> h(50, 0.0);
  for (double x : v) {
    int b = static_cast<int>((x - lo) / (hi - lo) * 50.0);
    b = std::clamp(b, 0, 49);
    h[static_cast<std::size_t>(b)] += 1.0;
  }
  double total = 0.0;
  for (auto & x : h) {
    x = x / static_cast<double>(v.size()) + 1e-10;
    total += x;
  }
  for (auto & x : h) {
    x /= total;
  }
  return h;
}

double oracle_jsd(const std::vector<double> & p, const std::vector<double> & q)
{
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) {
      sum += 0.5 * p[i] * std::log(p[i] / m);
    }
    if (q[i] > 0.0) {
      sum += 0.5 * q[i] * std::log(q[i] / m);
    }
  }
  return sum;
}

double oracle_sample_jsd(const std::vector<double> & a, const std::vector<double> & b)
{
  double lo = std::min(*std::min_element(a.begin(), a.end()), *std::min_element(b.begin(), b.end()));
  double hi = std::max(*std::max_element(a.begin(), a.end()), *std::max_element(b.begin(), b.end()));
  return oracle_jsd(oracle_histogram(a, lo, hi), oracle_histogram(b, lo, hi));
}

std::vector<Polyline> random_roads(RandomStream & rng, int count)
{
  std::vector<Polyline> out;
  for (int r = 0; r < count; ++r) {
    Polyline road;
    Vec2 p{rng.uniform() * 50.0, rng.uniform() * 50.0};
    for (int i = 0; i < 10; ++i) {
      road.push_back(p);
      p = p + Vec2{1.0 + 9.0 * rng.uniform(), rng.normal()};
    }
    out.push_back(road);
  }
  return out;
}

}  // namespace

TEST_CASE("Hausdorff distance")
{
  const std::vector<Vec2> a = {{0, 0}, {1, 2}, {5, 5}};
  CHECK(hausdorff(a, a) == 0.0);
  const std::vector<Vec2> o = {{0, 0}};
  const std::vector<Vec2> t = {{3, 4}};
  CHECK(hausdorff(o, t) == 5.0);

  RandomStream rng(123);
  for (int pair = 0; pair < 200; ++pair) {
    const auto x = random_set(rng, 1 + static_cast<int>(rng.uniform_int(0, 80)));
    const auto y = random_set(rng, 1 + static_cast<int>(rng.uniform_int(0, 80)));
    CHECK(hausdorff(x, y) == brute_hausdorff(x, y));
    CHECK(hausdorff(x, y) == hausdorff(y, x));
  }
  CHECK_THROWS_AS(hausdorff(std::vector<Vec2>{}, a), Error);
}

TEST_CASE("Jensen-Shannon divergence")
{
  const auto p = Histogram::from_probabilities({1.0, 0.0});
  const auto q = Histogram::from_probabilities({0.0, 1.0});
  CHECK(jsd(p, p) == 0.0);
  CHECK(std::abs(jsd(p, q) - std::numbers::ln2) <= 1e-12);

  RandomStream rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(20);
    std::vector<double> b(20);
    double sa = 0.0;
    double sb = 0.0;
    for (std::size_t i = 0; i < 20; ++i) {
      a[i] = rng.uniform() < 0.2 ? 0.0 : rng.uniform();
      b[i] = rng.uniform();
      sa += a[i];
      sb += b[i];
    }
    a[0] += sa == 0.0 ? 1.0 : 0.0;
    sa += sa == 0.0 ? 1.0 : 0.0;
    for (std::size_t i = 0; i < 20; ++i) {
      a[i] /= sa;
      b[i] /= sb;
    }
    const auto ha = Histogram::from_probabilities(a);
    const auto hb = Histogram::from_probabilities(b);
    const double d = jsd(ha, hb);
    CHECK(d == doctest::Approx(jsd(hb, ha)).epsilon(1e-14));
    CHECK(d >= 0.0);
    CHECK(d <= std::numbers::ln2);
    CHECK(d == doctest::Approx(oracle_jsd(a, b)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(jsd(p, Histogram::from_probabilities({0.5, 0.25, 0.25})), Error);
  CHECK_THROWS_AS(Histogram::from_probabilities({0.5, 0.6}), Error);
}

TEST_CASE("histograms")
{
  const std::vector<double> v = {0.0, 0.1, 0.5, 1.0, 1.0};
  const auto h = Histogram::from_samples(v, 0.0, 1.0, 4, 0.0);
  CHECK(h.probabilities() == std::vector<double>{0.4, 0.0, 0.2, 0.4});
  const auto [a, b] = shared_histograms(std::vector<double>{3.0}, std::vector<double>{3.0});
  CHECK(a.lo() == 2.5);
  CHECK(a.hi() == 3.5);
  CHECK(jsd(a, b) == 0.0);
}

TEST_CASE("road length divergence")
{
  RandomStream rng(4);
  const auto real = random_roads(rng, 30);
  CHECK(jsd_road_length(real, real) == 0.0);

  auto doubled = real;
  for (auto & road : doubled) {
    for (auto & p : road) {
      p = 2.0 * p;
    }
  }
  const double d = jsd_road_length(real, doubled);
  CHECK(d > 0.0);
  CHECK(d <= std::numbers::ln2);
  CHECK(d == doctest::Approx(oracle_sample_jsd(road_lengths(real), road_lengths(doubled))).epsilon(1e-12));
}

TEST_CASE("control point distance divergence")
{
  RandomStream rng(5);
  const auto real = random_roads(rng, 12);
  CHECK(jsd_cpd(real, real) == 0.0);

  Polyline five;
  Polyline ten;
  for (int i = 0; i < 20; ++i) {
    five.push_back({5.0 * i, 0.0});
    ten.push_back({10.0 * i, 0.0});
  }
  const std::vector<double> fives(19, 5.0);
  const std::vector<double> tens(19, 10.0);
  const double d = jsd_cpd({five}, {ten});
  CHECK(d == doctest::Approx(oracle_jsd(oracle_histogram(fives, 5.0, 10.0), oracle_histogram(tens, 5.0, 10.0))).epsilon(1e-12));
  CHECK(d == doctest::Approx(std::numbers::ln2).epsilon(1e-6));

  auto shuffled = real;
  std::reverse(shuffled.begin(), shuffled.end());
  const auto other = random_roads(rng, 12);
  CHECK(jsd_cpd(shuffled, other) == jsd_cpd(real, other));
}

TEST_CASE("SISD")
{
  Polyline line;
  for (int i = 0; i < 50; ++i) {
    line.push_back({2.0 * i, -1.0 * i});
  }
  CHECK(sisd(line) <= 1e-12);

  const auto parabola = [](int intervals) {
    Polyline p;
    for (int i = 0; i <= intervals; ++i) {
      const double x = static_cast<double>(i) / intervals;
      p.push_back({x, x * x});
    }
    return p;
  };
  CHECK(sisd(parabola(256), 1.0 / 256.0) == doctest::Approx(4.0).epsilon(0.01));

  Polyline coarse;
  Polyline fine;
  for (int i = 0; i <= 100; ++i) {
    coarse.push_back({10.0 * std::cos(0.01 * i), 10.0 * std::sin(0.01 * i)});
  }
  for (int i = 0; i <= 200; ++i) {
    fine.push_back({10.0 * std::cos(0.005 * i), 10.0 * std::sin(0.005 * i)});
  }
  const double sc = sisd(coarse);
  const double sf = sisd(fine);
  CHECK(std::abs(sc - sf) / sf < 0.02);

  CHECK(sisd_scenario({line, {{0, 0}, {1, 1}}}) <= 1e-12);
  CHECK_THROWS_AS(sisd(Polyline{{0, 0}, {1, 0}}), Error);
}

TEST_CASE("report")
{
  RandomStream rng(6);
  std::vector<MetricScenario> real;
  for (int i = 0; i < 8; ++i) {
    MetricScenario s;
    s.type = static_cast<ScenarioType>(i % 4);
    s.id = "r" + std::to_string(i);
    s.roads = random_roads(rng, 3);
    real.push_back(s);
  }
  const auto same = build_report(real, real);
  REQUIRE(same.rows.size() == 5);
  CHECK(same.rows.back().label == "all");
  for (const auto & row : same.rows) {
    CHECK(row.hd == 0.0);
    CHECK(row.jsd_rl == 0.0);
    CHECK(row.jsd_cpd == 0.0);
  }
  CHECK(same.to_text() == build_report(real, real).to_text());
  CHECK(same.to_json() == build_report(real, real).to_json());

  const auto svg = histogram_svg("lengths", road_lengths(real[0].roads), road_lengths(real[1].roads));
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
}
