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

#ifndef DIFFROAD__DIFFUSION_HPP_
#define DIFFROAD__DIFFUSION_HPP_

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "diffroad/error.hpp"

namespace diffroad::diffusion
{

/// Linear beta schedule with cumulative products; tables are indexed by t-1.
struct NoiseSchedule
{
  int steps{0};
  double beta_min{0.0};
  double beta_max{0.0};
  std::vector<double> beta;
  std::vector<double> alpha_bar;
  std::vector<double> sigma2;

  double beta_at(int t) const { return beta[static_cast<std::size_t>(t - 1)]; }
  /// alpha_bar_0 is 1.
  double alpha_bar_at(int t) const
  {
    return t == 0 ? 1.0 : alpha_bar[static_cast<std::size_t>(t - 1)];
  }
  double sigma2_at(int t) const { return sigma2[static_cast<std::size_t>(t - 1)]; }

  void check_step(int t) const
  {
    if (t < 1 || t > steps) {
      throw Error(ErrorKind::kOutOfRange,
                  "diffusion step " + std::to_string(t) + " outside [1, " +
                    std::to_string(steps) + "]");
    }
  }
};

NoiseSchedule build_schedule(int steps, double beta_min, double beta_max);

/// Coefficients of one reverse transition from step t to step prev < t.
/// For the full chain prev = t - 1 and beta = beta_t; a strided jump uses
/// beta = 1 - alpha_bar_t / alpha_bar_prev.
struct ReverseCoefficients
{
  double alpha_bar_t{1.0};
  double alpha_bar_prev{1.0};
  double beta{0.0};
  bool final_step{false};  // the transition into x_0

  /// Posterior variance: (1 - abar_prev) / (1 - abar_t) * beta, or beta on the final step.
  double sigma2() const
  {
    return final_step ? beta : (1.0 - alpha_bar_prev) / (1.0 - alpha_bar_t) * beta;
  }
};

ReverseCoefficients full_chain_coefficients(const NoiseSchedule & schedule, int t);
ReverseCoefficients jump_coefficients(const NoiseSchedule & schedule, int t, int prev);

/// x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) eps.
template <typename Real>
void q_sample(std::span<const Real> x0, int t, std::span<const Real> eps,
              const NoiseSchedule & schedule, std::span<Real> out)
{
  schedule.check_step(t);
  if (x0.size() != eps.size() || out.size() != x0.size()) {
    throw Error(ErrorKind::kInvalidArgument, "q_sample: shape mismatch");
  }
  const double ab = schedule.alpha_bar_at(t);
  const Real a = static_cast<Real>(std::sqrt(ab));
  const Real b = static_cast<Real>(std::sqrt(1.0 - ab));
  for (std::size_t i = 0; i < x0.size(); ++i) {
    out[i] = a * x0[i] + b * eps[i];
  }
}

template <typename Real>
std::vector<Real> q_sample(std::span<const Real> x0, int t, std::span<const Real> eps,
                           const NoiseSchedule & schedule)
{
  std::vector<Real> out(x0.size());
  q_sample<Real>(x0, t, eps, schedule, out);
  return out;
}

/// Reverse-process mean; returns the variance.
template <typename Real>
double posterior_mean(std::span<const Real> x_t, std::span<const Real> eps_hat,
                      const ReverseCoefficients & c, std::span<Real> mean)
{
  if (x_t.size() != eps_hat.size() || mean.size() != x_t.size()) {
    throw Error(ErrorKind::kInvalidArgument, "posterior_params: shape mismatch");
  }
  const double inv_sqrt_alpha = 1.0 / std::sqrt(1.0 - c.beta);
  const double eps_coef = c.beta / std::sqrt(1.0 - c.alpha_bar_t);
  for (std::size_t i = 0; i < x_t.size(); ++i) {
    mean[i] = static_cast<Real>(inv_sqrt_alpha * (static_cast<double>(x_t[i]) -
                                                   eps_coef * static_cast<double>(eps_hat[i])));
  }
  return c.sigma2();
}

template <typename Real>
struct Posterior
{
  std::vector<Real> mean;
  double sigma2{0.0};
};

template <typename Real>
Posterior<Real> posterior_params(std::span<const Real> x_t, std::span<const Real> eps_hat, int t,
                                 const NoiseSchedule & schedule)
{
  schedule.check_step(t);
  Posterior<Real> out;
  out.mean.resize(x_t.size());
  out.sigma2 = posterior_mean<Real>(x_t, eps_hat, full_chain_coefficients(schedule, t), out.mean);
  return out;
}

/// x_prev = mu + sigma z. A nonzero z on the final step violates the contract.
template <typename Real>
void reverse_step(std::span<const Real> x_t, std::span<const Real> eps_hat,
                  const ReverseCoefficients & c, std::span<const Real> z, std::span<Real> out)
{
  if (z.size() != x_t.size()) {
    throw Error(ErrorKind::kInvalidArgument, "reverse_step: noise shape mismatch");
  }
  if (c.final_step) {
    for (Real v : z) {
      if (v != Real(0)) {
        throw Error(ErrorKind::kContract, "reverse_step: noise must be zero on the final step");
      }
    }
  }
  const double sigma = std::sqrt(posterior_mean<Real>(x_t, eps_hat, c, out));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<Real>(static_cast<double>(out[i]) + sigma * static_cast<double>(z[i]));
  }
}

template <typename Real>
std::vector<Real> reverse_step(std::span<const Real> x_t, std::span<const Real> eps_hat, int t,
                               const NoiseSchedule & schedule, std::span<const Real> z)
{
  schedule.check_step(t);
  std::vector<Real> out(x_t.size());
  reverse_step<Real>(x_t, eps_hat, full_chain_coefficients(schedule, t), z, out);
  return out;
}

}  // namespace diffroad::diffusion

#endif  // DIFFROAD__DIFFUSION_HPP_
