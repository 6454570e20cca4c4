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

#ifndef DIFFROAD__TAPE_HPP_
#define DIFFROAD__TAPE_HPP_

#include <cstddef>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace diffroad::nn
{

template <typename Real>
using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

/// A named weight array. `shape` is the logical shape written to
/// checkpoints; `value` holds the same numbers as a matrix.
template <typename Real>
struct Parameter
{
  std::string name;
  std::vector<int> shape;
  Matrix<Real> value;
};

template <typename Real>
class ParameterSet
{
public:
  int add(std::string name, std::vector<int> shape, Eigen::Index rows, Eigen::Index cols);

  Parameter<Real> & operator[](int id) { return params_[static_cast<std::size_t>(id)]; }
  const Parameter<Real> & operator[](int id) const { return params_[static_cast<std::size_t>(id)]; }
  int size() const { return static_cast<int>(params_.size()); }
  /// -1 when absent.
  int find(const std::string & name) const;
  std::size_t scalar_count() const;

  std::vector<Matrix<Real>> zeros_like() const;

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

private:
  std::vector<Parameter<Real>> params_;
  std::unordered_map<std::string, int> index_;
};

/// Reverse-mode differentiation over column-major (channels x positions)
/// matrices. Parameters are referenced by id; gradients accumulate into the
/// buffer given at construction. Without a buffer the tape only evaluates.
template <typename Real>
class Tape
{
public:
  using Mat = Matrix<Real>;
  using Id = int;

  Tape(const ParameterSet<Real> & params, std::vector<Mat> * param_grads)
  : params_(params), param_grads_(param_grads)
  {
  }

  bool recording() const { return param_grads_ != nullptr; }

  Id constant(Mat value);
  const Mat & value(Id id) const { return nodes_[static_cast<std::size_t>(id)].value; }

  /// Zero-padded 1D convolution. Weight layout: out x (kernel * in), tap-major.
  Id conv1d(Id x, int weight, int bias, int kernel, int stride);
  Id upsample2(Id x);
  Id group_norm(Id x, int gamma, int beta, int groups, Real eps = Real(1e-5));
  Id silu(Id x);
  /// W v + b for a column vector v.
  Id linear(Id v, int weight, int bias);
  Id add(Id a, Id b);
  /// x plus a column vector broadcast over positions.
  Id add_column(Id x, Id column);
  Id concat_rows(Id a, Id b);
  /// softmax(q^T k / sqrt(C)) applied to v along positions; q, k, v are C x L.
  Id attention(Id q, Id k, Id v);
  /// A transform without gradient (generation-time feature modulation).
  Id transform(Id x, const std::function<Mat(const Mat &)> & f);

  /// Seeds d(loss)/d(output) and propagates to every parameter.
  void backward(Id output, const Mat & seed);

private:
  struct Node
  {
    Mat value;
    Mat grad;
    std::function<void()> back;
  };

  Id push(Mat value, std::function<void()> back = {});
  Mat & grad(Id id);
  Mat & param_grad(int param);

  const ParameterSet<Real> & params_;
  std::vector<Mat> * param_grads_;
  std::vector<Node> nodes_;
};

extern template class ParameterSet<float>;
extern template class ParameterSet<double>;
extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace diffroad::nn

#endif  // DIFFROAD__TAPE_HPP_
