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

#include "diffroad/tape.hpp"

#include <cmath>
#include <utility>

#include "diffroad/error.hpp"

namespace diffroad::nn
{

template <typename Real>
int ParameterSet<Real>::add(std::string name, std::vector<int> shape, Eigen::Index rows,
                            Eigen::Index cols)
{
  if (index_.count(name) != 0) {
    throw Error(ErrorKind::kInvalidArgument, "duplicate parameter " + name);
  }
  const int id = size();
  index_.emplace(name, id);
  params_.push_back({std::move(name), std::move(shape), Matrix<Real>::Zero(rows, cols)});
  return id;
}

template <typename Real>
int ParameterSet<Real>::find(const std::string & name) const
{
  const auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

template <typename Real>
std::size_t ParameterSet<Real>::scalar_count() const
{
  std::size_t total = 0;
  for (const auto & p : params_) {
    total += static_cast<std::size_t>(p.value.size());
  }
  return total;
}

template <typename Real>
std::vector<Matrix<Real>> ParameterSet<Real>::zeros_like() const
{
  std::vector<Matrix<Real>> out;
  out.reserve(params_.size());
  for (const auto & p : params_) {
    out.push_back(Matrix<Real>::Zero(p.value.rows(), p.value.cols()));
  }
  return out;
}

template <typename Real>
typename Tape<Real>::Id Tape<Real>::push(Mat value, std::function<void()> back)
{
  nodes_.push_back({std::move(value), Mat{}, recording() ? std::move(back) : nullptr});
  return static_cast<Id>(nodes_.size() - 1);
}

template <typename Real>
typename Tape<Real>::Mat & Tape<Real>::grad(Id id)
{
  Node & n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.size() == 0) {
    n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  }
  return n.grad;
}

template <typename Real>
typename Tape<Real>::Mat & Tape<Real>::param_grad(int param)
{
  return (*param_grads_)[static_cast<std::size_t>(param)];
}

template <typename Real>
typename Tape<Real>::Id Tape<Real>::constant(Mat value)
{
  return push(std::move(value));
}

template <typename Real>
typename Tape<Real>::Id Tape<Real>::conv1d(Id x, int weight, int bias, int kernel, int stride)
{
  const Mat & in = value(x);
  const Mat & w = params_[weight].value;
  const Eigen::Index cin = in.rows();
  const Eigen::Index len = in.cols();
  const Eigen::Index pad = kernel / 2;
  const Eigen::Index out_len = (len + 2 * pad - kernel) / stride + 1;
  if (w.cols() != kernel * cin) {
    throw Error(ErrorKind::kInvalidArgument,
                "conv1d: weight " + params_[weight].name + " expects " +
                  std::to_string(w.cols() / kernel) + " input channels, got " +
                  std::to_string(cin));
  }

  const bool direct = kernel == 1 && stride == 1;
  Mat columns;
  if (!direct) {
    columns = Mat::Zero(kernel * cin, out_len);
    for (Eigen::Index i = 0; i < out_len; ++i) {
      for (Eigen::Index k = 0; k < kernel; ++k) {
        const Eigen::Index src = i * stride + k - pad;
        if (src >= 0 && src < len) {
          columns.block(k * cin, i, cin, 1) = in.col(src);
        }
      }
    }
  }
  Mat y = direct ? Mat(w * in) : Mat(w * columns);
  y.colwise() += params_[bias].value.col(0);

  return push(std::move(y), [this, x, weight, bias, kernel, stride, cin, len, pad, out_len,
                             direct, columns = std::move(columns), self = Id(nodes_.size())] {
    const Mat & dy = nodes_[static_cast<std::size_t>(self)].grad;
    const Mat & w = params_[weight].value;
    const Mat & cols = direct ? value(x) : columns;
    param_grad(weight).noalias() += dy * cols.transpose();
    param_grad(bias).col(0) += dy.rowwise().sum();
    Mat dcol = w.transpose() * dy;
    Mat & dx = grad(x);
    if (direct) {
      dx += dcol;
      return;
    }
    for (Eigen::Index i = 0; i < out_len; ++i) {
      for (Eigen::Index k = 0; k < kernel; ++k) {
        const Eigen::Index src = i * stride + k - pad;
        if (src >= 0 && src < len) {
          dx.col(src) += dcol.block(k * cin, i, cin, 1);
        }
      }
    }
  });
}

template <typename Real>
typename Tape<Real>::Id Tape<Real>::upsample2(Id x)
{
  const Mat & in = value(x);
  Mat y(in.rows(), in.cols() * 2);
  for (Eigen::Index i = 0; i < in.cols(); ++i) {
    y.col(2 * i) = in.col(i);
    y.col(2 * i + 1) = in.col(i);
  }
  const Id self = static_cast<Id>(nodes_.size());
  return push(std::move(y), [this, x, self] {
    const Mat & dy = nodes_[static_cast<std::size_t>(self)].grad;
    Mat & dx = grad(x);
    for (Eigen::Index i = 0; i < dx.cols(); ++i) {
      dx.col(i) += dy.col(2 * i) + dy.col(2 * i + 1);
    }
  });
}

template <typename Real>
typename Tape<Real>::Id Tape<Real>::group_norm(Id x, int gamma, int beta, int groups, Real eps)
{
  const Mat & in = value(x);
  const Eigen::Index channels = in.rows();
  const Eigen::Index len = in.cols();
  if (groups <= 0 || channels % groups != 0) {
    throw Error(ErrorKind::kInvalidArgument, "group_norm: channels not divisible by groups");
  }
  const Eigen::Index per = channels / groups;
  const Real count = static_cast<Real>(per * len);

  Mat xhat(channels, len);
  Eigen::Matrix<Real, Eigen::Dynamic, 1> inv_std(groups);
  for (int g = 0; g < groups; ++g) {
    const auto block = in.middleRows(g * per, per);
    const Real mean = block.sum() / count;
    const Real var = (block.array() - mean).square().sum() / count;
    inv_std(g) = Real(1) / std::sqrt(var + eps);
    xhat.middleRows(g * per, per) = (block.array() - mean) * inv_std(g);
  }
  const auto & gv = params_[gamma].value;
  const auto & bv = params_[beta].value;
  Mat y = (xhat.array().colwise() * gv.col(0).array()).colwise() + bv.col(0).array();

  const Id self = static_cast<Id>(nodes_.size());
  return push(std::move(y), [this, x, gamma, beta, groups, per, count, self,
                             xhat = std::move(xhat), inv_std = std::move(inv_std)] {
    const Mat & dy = nodes_[static_cast<std::size_t>(self)].grad;
    param_grad(gamma).col(0) += (dy.array() * xhat.array()).rowwise().sum().matrix();
    param_grad(beta).col(0) += dy.rowwise().sum();
    const Mat dxhat = dy.array().colwise() * params_[gamma].value.col(0).array();
    Mat & dx = grad(x);
    for (int g = 0; g < groups; ++g) {
      const auto dh = dxhat.middleRows(g * per, per).array();
      const auto xh = xhat.middleRows(g * per, per).array();
      const Real sum_dh = dh.sum();
      const Real sum_dh_xh = (dh * xh).sum();
      dx.middleRows(g * per, per).array() +=
        (inv_std(g) / count) * (count * dh - sum_dh - xh * sum_dh_xh);
    }
  });
}

template <typename Real>
typename Tape<Real>::Id Tape<Real>::silu(Id x)
{
  const Mat & in = value(x);
  Mat sig = (Real(1) + (-in.array()).exp()).inverse().matrix();
  Mat y = (in.array() * sig.array()).matrix();
  const Id self = static_cast<Id>(nodes_.size());
  return push(std::move(y), [this, x, self, sig = std::move(sig)] {
    const Mat & dy = nodes_[static_cast<std::size_t>(self)].grad;
    const auto xv = value(x).array();
    grad(x).array() += dy.array() * sig.array() * (Real(1) + xv * (Real(1) - sig.array()));
  });
}

template <typename Real>
typename Tape<Real>::Id Tape<Real>::linear(Id v, int weight, int bias)
{
  const Mat & w = params_[weight].value;
  if (w.cols() != value(v).rows()) {
    throw Error(ErrorKind::kInvalidArgument, "linear: shape mismatch for " + params_[weight].name);
  }
  Mat y = w * value(v);
  y.colwise() += params_[bias].value.col(0);
  const Id self = static_cast<Id>(nodes_.size());
  return push(std::move(y), [this, v, weight, bias, self] {
    const Mat & dy = nodes_[static_cast<std::size_t>(self)].grad;
    param_grad(weight).noalias() += dy * value(v).transpose();
    param_grad(bias).col(0) += dy.rowwise().sum();
    grad(v).noalias() += params_[weight].value.transpose() * dy;
  });
}

template <typename Real>
typename Tape<Real>::Id Tape<Real>::add(Id a, Id b)
{
  Mat y = value(a) + value(b);
  const Id self = static_cast<Id>(nodes_.size());
  return push(std::move(y), [this, a, b, self] {
    const Mat & dy = nodes_[static_cast<std::size_t>(self)].grad;
    grad(a) += dy;
    grad(b) += dy;
  });
}

template <typename Real>
typename Tape<Real>::Id Tape<Real>::add_column(Id x, Id column)
{
  Mat y = value(x);
  y.colwise() += value(column).col(0);
  const Id self = static_cast<Id>(nodes_.size());
  return push(std::move(y), [this, x, column, self] {
    const Mat & dy = nodes_[static_cast<std::size_t>(self)].grad;
    grad(x) += dy;
    grad(column).col(0) += dy.rowwise().sum();
  });
}

template <typename Real>
typename Tape<Real>::Id Tape<Real>::concat_rows(Id a, Id b)
{
  const Mat & va = value(a);
  const Mat & vb = value(b);
  if (va.cols() != vb.cols()) {
    throw Error(ErrorKind::kInvalidArgument, "concat_rows: length mismatch");
  }
  Mat y(va.rows() + vb.rows(), va.cols());
  y << va, vb;
  const Eigen::Index ra = va.rows();
  const Id self = static_cast<Id>(nodes_.size());
  return push(std::move(y), [this, a, b, ra, self] {
    const Mat & dy = nodes_[static_cast<std::size_t>(self)].grad;
    grad(a) += dy.topRows(ra);
    grad(b) += dy.bottomRows(dy.rows() - ra);
  });
}

template <typename Real>
typename Tape<Real>::Id Tape<Real>::attention(Id q, Id k, Id v)
{
  const Mat & vq = value(q);
  const Real scale = Real(1) / std::sqrt(static_cast<Real>(vq.rows()));
  Mat scores = scale * (vq.transpose() * value(k));  // L x L, row = query
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const Real peak = scores.row(i).maxCoeff();
    scores.row(i) = (scores.row(i).array() - peak).exp().matrix();
    scores.row(i) /= scores.row(i).sum();
  }
  Mat y = value(v) * scores.transpose();
  const Id self = static_cast<Id>(nodes_.size());
  return push(std::move(y), [this, q, k, v, scale, self, probs = std::move(scores)] {
    const Mat & dy = nodes_[static_cast<std::size_t>(self)].grad;
    grad(v).noalias() += dy * probs;
    const Mat dprobs = dy.transpose() * value(v);
    const Eigen::Matrix<Real, Eigen::Dynamic, 1> inner =
      (dprobs.array() * probs.array()).rowwise().sum();
    const Mat dscores = (probs.array() * (dprobs.array().colwise() - inner.array())).matrix();
    grad(q).noalias() += scale * (value(k) * dscores.transpose());
    grad(k).noalias() += scale * (value(q) * dscores);
  });
}

template <typename Real>
typename Tape<Real>::Id Tape<Real>::transform(Id x, const std::function<Mat(const Mat &)> & f)
{
  if (recording()) {
    throw Error(ErrorKind::kContract, "feature transforms are generation-time only");
  }
  return push(f(value(x)));
}

template <typename Real>
void Tape<Real>::backward(Id output, const Mat & seed)
{
  if (!recording()) {
    throw Error(ErrorKind::kContract, "backward on a non-recording tape");
  }
  grad(output) += seed;
  for (Id i = output; i >= 0; --i) {
    Node & n = nodes_[static_cast<std::size_t>(i)];
    if (n.back && n.grad.size() != 0) {
      n.back();
    }
  }
}

template class ParameterSet<float>;
template class ParameterSet<double>;
template class Tape<float>;
template class Tape<double>;

}  // namespace diffroad::nn
