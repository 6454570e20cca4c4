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

#include "diffroad/optimizer.hpp"

#include <cmath>

#include "diffroad/error.hpp"

namespace diffroad::train
{

OptimizerKind parse_optimizer_kind(const std::string & name)
{
  if (name == "adam") {
    return OptimizerKind::kAdam;
  }
  if (name == "sgd") {
    return OptimizerKind::kSgd;
  }
  throw Error(ErrorKind::kConfig, "unknown optimizer '" + name + "' (expected adam or sgd)");
}

const char * to_string(OptimizerKind kind) noexcept
{
  return kind == OptimizerKind::kAdam ? "adam" : "sgd";
}

template <typename Real>
double clip_global_norm(std::vector<nn::Matrix<Real>> & grads, double max_norm)
{
  double sq = 0.0;
  for (const auto & g : grads) {
    sq += g.template cast<double>().squaredNorm();
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const Real scale = static_cast<Real>(max_norm / norm);
    for (auto & g : grads) {
      g *= scale;
    }
  }
  return norm;
}

template <typename Real>
Optimizer<Real>::Optimizer(OptimizerKind kind, double learning_rate,
                           const nn::ParameterSet<Real> & params, double beta1, double beta2,
                           double epsilon)
: kind_(kind), learning_rate_(learning_rate), beta1_(beta1), beta2_(beta2), epsilon_(epsilon)
{
  if (!(learning_rate > 0.0)) {
    throw Error(ErrorKind::kConfig, "learning_rate must be > 0");
  }
  if (kind_ == OptimizerKind::kAdam) {
    m_ = params.zeros_like();
    v_ = params.zeros_like();
  }
}

template <typename Real>
void Optimizer<Real>::step(nn::ParameterSet<Real> & params,
                           const std::vector<nn::Matrix<Real>> & grads)
{
  if (grads.size() != static_cast<std::size_t>(params.size())) {
    throw Error(ErrorKind::kInvalidArgument, "optimizer: gradient count mismatch");
  }
  ++steps_;
  if (kind_ == OptimizerKind::kSgd) {
    for (int i = 0; i < params.size(); ++i) {
      params[i].value -= static_cast<Real>(learning_rate_) * grads[static_cast<std::size_t>(i)];
    }
    return;
  }
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  const Real b1 = static_cast<Real>(beta1_);
  const Real b2 = static_cast<Real>(beta2_);
  const Real step_size = static_cast<Real>(learning_rate_ / c1);
  const Real inv_c2 = static_cast<Real>(1.0 / c2);
  const Real eps = static_cast<Real>(epsilon_);
  for (int i = 0; i < params.size(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const auto & g = grads[idx];
    auto & m = m_[idx];
    auto & v = v_[idx];
    m = b1 * m + (Real(1) - b1) * g;
    v = b2 * v + (Real(1) - b2) * g.cwiseProduct(g);
    params[i].value.array() -=
      step_size * m.array() / ((v.array() * inv_c2).sqrt() + eps);
  }
}

template double clip_global_norm<float>(std::vector<nn::Matrix<float>> &, double);
template double clip_global_norm<double>(std::vector<nn::Matrix<double>> &, double);
template class Optimizer<float>;
template class Optimizer<double>;

}  // namespace diffroad::train
