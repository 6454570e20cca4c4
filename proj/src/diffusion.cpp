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

#include "diffroad/diffusion.hpp"

#include <string>

namespace diffroad::diffusion
{

NoiseSchedule build_schedule(int steps, double beta_min, double beta_max)
{
  if (steps < 2) {
    throw Error(ErrorKind::kConfig, "schedule: T must be >= 2");
  }
  if (!(beta_min > 0.0 && beta_min < beta_max && beta_max < 1.0)) {
    throw Error(ErrorKind::kConfig, "schedule: require 0 < beta_min < beta_max < 1");
  }
  NoiseSchedule s;
  s.steps = steps;
  s.beta_min = beta_min;
  s.beta_max = beta_max;
  s.beta.resize(static_cast<std::size_t>(steps));
  s.alpha_bar.resize(s.beta.size());
  s.sigma2.resize(s.beta.size());
  double product = 1.0;
  for (int t = 1; t <= steps; ++t) {
    const auto i = static_cast<std::size_t>(t - 1);
    s.beta[i] = beta_min + static_cast<double>(t - 1) / static_cast<double>(steps - 1) *
                             (beta_max - beta_min);
    product *= 1.0 - s.beta[i];
    s.alpha_bar[i] = product;
    s.sigma2[i] = t == 1 ? s.beta[i]
                         : (1.0 - s.alpha_bar[i - 1]) / (1.0 - s.alpha_bar[i]) * s.beta[i];
  }
  return s;
}

ReverseCoefficients full_chain_coefficients(const NoiseSchedule & schedule, int t)
{
  schedule.check_step(t);
  return {schedule.alpha_bar_at(t), schedule.alpha_bar_at(t - 1), schedule.beta_at(t), t == 1};
}

ReverseCoefficients jump_coefficients(const NoiseSchedule & schedule, int t, int prev)
{
  schedule.check_step(t);
  if (prev < 0 || prev >= t) {
    throw Error(ErrorKind::kOutOfRange, "jump_coefficients: require 0 <= prev < t");
  }
  const double ab_t = schedule.alpha_bar_at(t);
  const double ab_prev = schedule.alpha_bar_at(prev);
  return {ab_t, ab_prev, 1.0 - ab_t / ab_prev, prev == 0};
}

}  // namespace diffroad::diffusion
