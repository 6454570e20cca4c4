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

#ifndef DIFFROAD__LOSS_HPP_
#define DIFFROAD__LOSS_HPP_

#include <cstddef>
#include <vector>

#include "diffroad/error.hpp"
#include "diffroad/tape.hpp"

/// Hybrid objective: noise-prediction MSE plus a smoothness term over first
/// differences along each road. Arrays use the (2n) x k network layout;
/// `valid` has one entry per road and excludes padded roads.
namespace diffroad::train
{

/// Unnormalised sums so batches can share one denominator.
struct LossSums
{
  double squared{0.0};
  std::size_t squared_count{0};
  double smooth{0.0};
  std::size_t smooth_count{0};

  LossSums & operator+=(const LossSums & o)
  {
    squared += o.squared;
    squared_count += o.squared_count;
    smooth += o.smooth;
    smooth_count += o.smooth_count;
    return *this;
  }
  double mse() const;
  double smoothness() const;
  double total(double omega) const { return mse() + omega * smoothness(); }
};

template <typename Real>
LossSums loss_sums(const nn::Matrix<Real> & eps, const nn::Matrix<Real> & eps_hat,
                   const std::vector<bool> & valid);

/// Adds d(mse_scale * squared + smooth_scale * smooth)/d(eps_hat) to grad.
template <typename Real>
void loss_gradient(const nn::Matrix<Real> & eps, const nn::Matrix<Real> & eps_hat,
                   const std::vector<bool> & valid, double mse_scale, double smooth_scale,
                   nn::Matrix<Real> & grad);

/// Mean squared error over unmasked entries. All-masked input is an error.
template <typename Real>
double loss_mse(const nn::Matrix<Real> & eps, const nn::Matrix<Real> & eps_hat,
                const std::vector<bool> & valid);

/// Mean over adjacent point pairs of the squared 2D norm of the difference
/// between true and predicted first differences.
template <typename Real>
double loss_smooth(const nn::Matrix<Real> & eps, const nn::Matrix<Real> & eps_hat,
                   const std::vector<bool> & valid);

template <typename Real>
double loss_total(const nn::Matrix<Real> & eps, const nn::Matrix<Real> & eps_hat,
                  const std::vector<bool> & valid, double omega);

}  // namespace diffroad::train

#endif  // DIFFROAD__LOSS_HPP_
