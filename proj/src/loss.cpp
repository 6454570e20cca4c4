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

#include "diffroad/loss.hpp"

namespace diffroad::train
{

double LossSums::mse() const
{
  if (squared_count == 0) {
    throw Error(ErrorKind::kInvalidArgument, "loss: every road is masked");
  }
  return squared / static_cast<double>(squared_count);
}

double LossSums::smoothness() const
{
  if (smooth_count == 0) {
    throw Error(ErrorKind::kInvalidArgument, "loss: no adjacent point pairs");
  }
  return smooth / static_cast<double>(smooth_count);
}

namespace
{

template <typename Real>
void check_shapes(const nn::Matrix<Real> & eps, const nn::Matrix<Real> & eps_hat,
                  const std::vector<bool> & valid)
{
  if (eps.rows() != eps_hat.rows() || eps.cols() != eps_hat.cols()) {
    throw Error(ErrorKind::kInvalidArgument, "loss: eps and eps_hat shapes differ");
  }
  if (eps.rows() != static_cast<Eigen::Index>(2 * valid.size())) {
    throw Error(ErrorKind::kInvalidArgument, "loss: mask length does not match road count");
  }
}

}  // namespace

template <typename Real>
LossSums loss_sums(const nn::Matrix<Real> & eps, const nn::Matrix<Real> & eps_hat,
                   const std::vector<bool> & valid)
{
  check_shapes(eps, eps_hat, valid);
  const Eigen::Index k = eps.cols();
  if (k < 2) {
    throw Error(ErrorKind::kInvalidArgument, "loss: roads need at least 2 points");
  }
  LossSums s;
  for (std::size_t r = 0; r < valid.size(); ++r) {
    if (!valid[r]) {
      continue;
    }
    const auto row = static_cast<Eigen::Index>(2 * r);
    for (Eigen::Index c = row; c < row + 2; ++c) {
      for (Eigen::Index p = 0; p < k; ++p) {
        const double d = static_cast<double>(eps_hat(c, p)) - static_cast<double>(eps(c, p));
        s.squared += d * d;
      }
    }
    s.squared_count += static_cast<std::size_t>(2 * k);
    for (Eigen::Index p = 0; p + 1 < k; ++p) {
      double pair = 0.0;
      for (Eigen::Index c = row; c < row + 2; ++c) {
        const double d = (static_cast<double>(eps_hat(c, p + 1)) - static_cast<double>(eps_hat(c, p))) -
                         (static_cast<double>(eps(c, p + 1)) - static_cast<double>(eps(c, p)));
        pair += d * d;
      }
      s.smooth += pair;
    }
    s.smooth_count += static_cast<std::size_t>(k - 1);
  }
  return s;
}

template <typename Real>
void loss_gradient(const nn::Matrix<Real> & eps, const nn::Matrix<Real> & eps_hat,
                   const std::vector<bool> & valid, double mse_scale, double smooth_scale,
                   nn::Matrix<Real> & grad)
{
  check_shapes(eps, eps_hat, valid);
  const Eigen::Index k = eps.cols();
  if (grad.rows() != eps.rows() || grad.cols() != k) {
    grad = nn::Matrix<Real>::Zero(eps.rows(), k);
  }
  for (std::size_t r = 0; r < valid.size(); ++r) {
    if (!valid[r]) {
      continue;
    }
    const auto row = static_cast<Eigen::Index>(2 * r);
    for (Eigen::Index c = row; c < row + 2; ++c) {
      for (Eigen::Index p = 0; p < k; ++p) {
        const double d = static_cast<double>(eps_hat(c, p)) - static_cast<double>(eps(c, p));
        grad(c, p) += static_cast<Real>(2.0 * mse_scale * d);
      }
      for (Eigen::Index p = 0; p + 1 < k; ++p) {
        const double d = (static_cast<double>(eps_hat(c, p + 1)) - static_cast<double>(eps_hat(c, p))) -
                         (static_cast<double>(eps(c, p + 1)) - static_cast<double>(eps(c, p)));
        grad(c, p + 1) += static_cast<Real>(2.0 * smooth_scale * d);
        grad(c, p) -= static_cast<Real>(2.0 * smooth_scale * d);
      }
    }
  }
}

template <typename Real>
double loss_mse(const nn::Matrix<Real> & eps, const nn::Matrix<Real> & eps_hat,
                const std::vector<bool> & valid)
{
  return loss_sums(eps, eps_hat, valid).mse();
}

template <typename Real>
double loss_smooth(const nn::Matrix<Real> & eps, const nn::Matrix<Real> & eps_hat,
                   const std::vector<bool> & valid)
{
  return loss_sums(eps, eps_hat, valid).smoothness();
}

template <typename Real>
double loss_total(const nn::Matrix<Real> & eps, const nn::Matrix<Real> & eps_hat,
                  const std::vector<bool> & valid, double omega)
{
  if (!(omega >= 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "loss_total: omega must be >= 0");
  }
  return loss_sums(eps, eps_hat, valid).total(omega);
}

#define DIFFROAD_INSTANTIATE_LOSS(Real)                                                        \
  template LossSums loss_sums<Real>(const nn::Matrix<Real> &, const nn::Matrix<Real> &,        \
                                    const std::vector<bool> &);                                \
  template void loss_gradient<Real>(const nn::Matrix<Real> &, const nn::Matrix<Real> &,        \
                                    const std::vector<bool> &, double, double,                 \
                                    nn::Matrix<Real> &);                                       \
  template double loss_mse<Real>(const nn::Matrix<Real> &, const nn::Matrix<Real> &,           \
                                 const std::vector<bool> &);                                   \
  template double loss_smooth<Real>(const nn::Matrix<Real> &, const nn::Matrix<Real> &,        \
                                    const std::vector<bool> &);                                \
  template double loss_total<Real>(const nn::Matrix<Real> &, const nn::Matrix<Real> &,         \
                                   const std::vector<bool> &, double);

DIFFROAD_INSTANTIATE_LOSS(float)
DIFFROAD_INSTANTIATE_LOSS(double)

}  // namespace diffroad::train
