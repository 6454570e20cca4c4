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

#ifndef DIFFROAD__OPTIMIZER_HPP_
#define DIFFROAD__OPTIMIZER_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "diffroad/tape.hpp"

namespace diffroad::train
{

enum class OptimizerKind { kAdam, kSgd };

OptimizerKind parse_optimizer_kind(const std::string & name);
const char * to_string(OptimizerKind kind) noexcept;

/// Scales gradients in place so their global L2 norm is at most max_norm.
/// Returns the norm before clipping. max_norm <= 0 disables clipping.
template <typename Real>
double clip_global_norm(std::vector<nn::Matrix<Real>> & grads, double max_norm);

template <typename Real>
class Optimizer
{
public:
  Optimizer(OptimizerKind kind, double learning_rate, const nn::ParameterSet<Real> & params,
            double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);

  void step(nn::ParameterSet<Real> & params, const std::vector<nn::Matrix<Real>> & grads);

  OptimizerKind kind() const { return kind_; }
  double learning_rate() const { return learning_rate_; }
  void set_learning_rate(double learning_rate) { learning_rate_ = learning_rate; }
  std::int64_t steps_taken() const { return steps_; }

  /// Adam moments, aligned with the parameter set. Empty for SGD.
  std::vector<nn::Matrix<Real>> & first_moment() { return m_; }
  std::vector<nn::Matrix<Real>> & second_moment() { return v_; }
  const std::vector<nn::Matrix<Real>> & first_moment() const { return m_; }
  const std::vector<nn::Matrix<Real>> & second_moment() const { return v_; }
  void set_steps_taken(std::int64_t steps) { steps_ = steps; }

private:
  OptimizerKind kind_;
  double learning_rate_;
  double beta1_;
  double beta2_;
  double epsilon_;
  std::int64_t steps_{0};
  std::vector<nn::Matrix<Real>> m_;
  std::vector<nn::Matrix<Real>> v_;
};

extern template class Optimizer<float>;
extern template class Optimizer<double>;

}  // namespace diffroad::train

#endif  // DIFFROAD__OPTIMIZER_HPP_
