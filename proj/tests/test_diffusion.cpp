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
#include <vector>

#include "diffroad/diffusion.hpp"
#include "diffroad/error.hpp"
#include "diffroad/rng.hpp"

using namespace diffroad;
using namespace diffroad::diffusion;

namespace
{

NoiseSchedule standard()
{
  return build_schedule(500, 1e-4, 0.05);
}

}  // namespace

TEST_CASE("linear schedule")
{
  const auto s = standard();
  CHECK(s.steps == 500);
  CHECK(s.beta_at(1) == 1e-4);
  CHECK(s.beta_at(500) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(s.alpha_bar_at(1) == 0.9999);
  CHECK(s.alpha_bar_at(500) < 1e-5);
  CHECK(s.alpha_bar_at(0) == 1.0);
  CHECK(s.sigma2_at(1) == 1e-4);

  double product = 1.0;
  for (int t = 1; t <= 500; ++t) {
    const double beta = 1e-4 + (0.05 - 1e-4) * (t - 1) / 499.0;
    CHECK(s.beta_at(t) == doctest::Approx(beta).epsilon(1e-12));
    product *= 1.0 - beta;
    CHECK(s.alpha_bar_at(t) == doctest::Approx(product).epsilon(1e-12));
    if (t > 1) {
      CHECK(s.alpha_bar_at(t) < s.alpha_bar_at(t - 1));
    }
  }
  CHECK_THROWS_AS(build_schedule(0, 1e-4, 0.05), Error);
  CHECK_THROWS_AS(build_schedule(10, 0.05, 1e-4), Error);
  CHECK_THROWS_AS(build_schedule(10, 1e-4, 1.0), Error);
  CHECK_THROWS_AS(s.check_step(0), Error);
  CHECK_THROWS_AS(s.check_step(501), Error);
}

TEST_CASE("q_sample closed form")
{
  const auto s = standard();
  const std::vector<double> x0 = {0.5, -0.25, 1.0};
  const std::vector<double> zero(3, 0.0);
  const std::vector<double> eps = {1.0, -2.0, 0.5};
  for (int t : {1, 100, 500}) {
    const auto a = q_sample<double>(x0, t, zero, s);
    const auto b = q_sample<double>(zero, t, eps, s);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(a[i] == doctest::Approx(std::sqrt(s.alpha_bar_at(t)) * x0[i]).epsilon(1e-14));
      CHECK(b[i] == doctest::Approx(std::sqrt(1.0 - s.alpha_bar_at(t)) * eps[i]).epsilon(1e-14));
    }
  }
  CHECK_THROWS_AS(q_sample<double>(x0, 0, eps, s), Error);
}

TEST_CASE("q_sample moments over many draws")
{
  const auto s = standard();
  constexpr int kDraws = 100000;
  const double x0 = 0.7;
  for (int t : {1, 100, 500}) {
    RandomStream rng(11, static_cast<std::uint64_t>(t));
    double sum = 0.0;
    double sum2 = 0.0;
    for (int i = 0; i < kDraws; ++i) {
      const double eps = rng.normal();
      const double x = q_sample<double>(std::span<const double>(&x0, 1), t, std::span<const double>(&eps, 1), s)[0];
      sum += x;
      sum2 += x * x;
    }
    const double mean = sum / kDraws;
    const double var = sum2 / kDraws - mean * mean;
    const double want_mean = std::sqrt(s.alpha_bar_at(t)) * x0;
    const double want_var = 1.0 - s.alpha_bar_at(t);
    // at t = 500 the mean is ~1e-3; compare against the spread instead of itself
    CHECK(std::abs(mean - want_mean) <= std::max(0.01 * std::abs(want_mean), 0.01 * std::sqrt(want_var)));
    CHECK(std::abs(var - want_var) <= 0.02 * want_var);
  }
}

TEST_CASE("posterior parameters")
{
  const auto s = standard();
  const std::vector<double> x0 = {0.3, -0.8, 0.05, 0.9};
  const std::vector<double> eps = {1.2, -0.4, 0.7, -1.9};
  const std::vector<double> zero(4, 0.0);

  SUBCASE("zero prediction divides by sqrt(alpha)")
  {
    const auto p = posterior_params<double>(x0, zero, 37, s);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(p.mean[i] == doctest::Approx(x0[i] / std::sqrt(1.0 - s.beta_at(37))).epsilon(1e-14));
    }
  }
  SUBCASE("t = 1 variance is beta_1")
  {
    CHECK(posterior_params<double>(x0, zero, 1, s).sigma2 == 1e-4);
  }
  SUBCASE("exact noise gives the q posterior mean")
  {
    for (int t : {2, 50, 250, 500}) {
      const auto xt = q_sample<double>(x0, t, eps, s);
      const auto p = posterior_params<double>(xt, eps, t, s);
      const double ab = s.alpha_bar_at(t);
      const double ab_prev = s.alpha_bar_at(t - 1);
      const double beta = s.beta_at(t);
      for (std::size_t i = 0; i < 4; ++i) {
        const double mu = std::sqrt(ab_prev) * beta / (1.0 - ab) * x0[i] +
                          std::sqrt(1.0 - beta) * (1.0 - ab_prev) / (1.0 - ab) * xt[i];
        CHECK(std::abs(p.mean[i] - mu) < 1e-10);
      }
      CHECK(p.sigma2 == doctest::Approx((1.0 - ab_prev) / (1.0 - ab) * beta).epsilon(1e-12));
    }
  }
}

TEST_CASE("reverse step")
{
  const auto s = standard();
  const std::vector<double> xt = {0.4, -0.1};
  const std::vector<double> eh = {0.2, 0.3};
  const std::vector<double> zero(2, 0.0);

  SUBCASE("z = 0 gives the mean")
  {
    const auto mean = posterior_params<double>(xt, eh, 120, s).mean;
    const auto out = reverse_step<double>(xt, eh, 120, s, zero);
    CHECK(out == mean);
  }
  SUBCASE("noise on the final step violates the contract")
  {
    const std::vector<double> z = {0.1, 0.0};
    CHECK_THROWS_AS(reverse_step<double>(xt, eh, 1, s, z), Error);
    CHECK_NOTHROW(reverse_step<double>(xt, eh, 1, s, zero));
  }
  SUBCASE("seeded noise is reproducible")
  {
    RandomStream a(3, 9);
    RandomStream b(3, 9);
    const std::vector<double> za = {a.normal(), a.normal()};
    const std::vector<double> zb = {b.normal(), b.normal()};
    CHECK(reverse_step<double>(xt, eh, 77, s, za) == reverse_step<double>(xt, eh, 77, s, zb));
  }
  SUBCASE("sample variance matches sigma^2")
  {
    const int t = 200;
    const double x = 0.25;
    const double e = -0.5;
    const double want = posterior_params<double>(std::span<const double>(&x, 1), std::span<const double>(&e, 1), t, s).sigma2;
    RandomStream rng(21);
    constexpr int kDraws = 100000;
    double sum = 0.0;
    double sum2 = 0.0;
    for (int i = 0; i < kDraws; ++i) {
      const double z = rng.normal();
      const double v = reverse_step<double>(std::span<const double>(&x, 1), std::span<const double>(&e, 1), t, s,
                                            std::span<const double>(&z, 1))[0];
      sum += v;
      sum2 += v * v;
    }
    const double mean = sum / kDraws;
    CHECK(std::abs((sum2 / kDraws - mean * mean) - want) <= 0.02 * want);
  }
}

TEST_CASE("strided jump coefficients")
{
  const auto s = standard();
  const auto full = full_chain_coefficients(s, 10);
  const auto jump = jump_coefficients(s, 10, 9);
  CHECK(jump.beta == doctest::Approx(full.beta).epsilon(1e-12));
  CHECK(jump.sigma2() == doctest::Approx(full.sigma2()).epsilon(1e-10));

  const auto big = jump_coefficients(s, 500, 495);
  CHECK(big.beta == doctest::Approx(1.0 - s.alpha_bar_at(500) / s.alpha_bar_at(495)).epsilon(1e-12));
  const auto last = jump_coefficients(s, 5, 0);
  CHECK(last.final_step);
  CHECK(last.alpha_bar_prev == 1.0);
  CHECK_THROWS_AS(jump_coefficients(s, 5, 5), Error);
}

TEST_CASE("random stream is counter based")
{
  RandomStream a(42, 1, 2);
  RandomStream b(42, 1, 2);
  RandomStream c(42, 2, 1);
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
    CHECK(va != c.next_u64());
  }
}
