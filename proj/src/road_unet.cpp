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

#include "diffroad/road_unet.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

#include "diffroad/error.hpp"
#include "diffroad/rng.hpp"

namespace diffroad::nn
{

int ArchConfig::attention_blocks() const
{
  return std::min(attention_stages, stages()) + (mid_attention ? 1 : 0);
}

void ArchConfig::validate() const
{
  if (roads < 1 || points < 2 || base_channels < 1 || res_blocks < 1 || max_groups < 1 ||
      cond_hidden < 1 || channel_mult.empty() || attention_stages < 0) {
    throw Error(ErrorKind::kConfig, "architecture: sizes must be positive");
  }
  for (int m : channel_mult) {
    if (m < 1) {
      throw Error(ErrorKind::kConfig, "architecture: channel multipliers must be >= 1");
    }
  }
  if (base_channels % 2 != 0) {
    throw Error(ErrorKind::kConfig, "architecture: base_channels must be even");
  }
  if (points % (1 << (stages() - 1)) != 0) {
    throw Error(ErrorKind::kConfig,
                "architecture: points per road must be divisible by 2^(stages-1)");
  }
}

nlohmann::json ArchConfig::to_json() const
{
  return {{"roads", roads},
          {"points", points},
          {"base_channels", base_channels},
          {"channel_mult", channel_mult},
          {"res_blocks", res_blocks},
          {"attention_stages", attention_stages},
          {"mid_attention", mid_attention},
          {"max_groups", max_groups},
          {"cond_hidden", cond_hidden}};
}

ArchConfig ArchConfig::from_json(const nlohmann::json & j)
{
  ArchConfig a;
  a.roads = j.value("roads", a.roads);
  a.points = j.value("points", a.points);
  a.base_channels = j.value("base_channels", a.base_channels);
  a.channel_mult = j.value("channel_mult", a.channel_mult);
  a.res_blocks = j.value("res_blocks", a.res_blocks);
  a.attention_stages = j.value("attention_stages", a.attention_stages);
  a.mid_attention = j.value("mid_attention", a.mid_attention);
  a.max_groups = j.value("max_groups", a.max_groups);
  a.cond_hidden = j.value("cond_hidden", a.cond_hidden);
  return a;
}

FreeUConfig FreeUConfig::neutral(std::size_t stages)
{
  FreeUConfig f;
  f.backbone.assign(stages, 1.0);
  f.skip.assign(stages, 1.0);
  return f;
}

void FreeUConfig::validate() const
{
  if (backbone.size() != skip.size()) {
    throw Error(ErrorKind::kConfig, "freeu: backbone and skip factor lists differ in length");
  }
  for (double b : backbone) {
    if (!(b >= 1.0 && b <= 1.6)) {
      throw Error(ErrorKind::kConfig, "freeu: backbone factor outside [1, 1.6]");
    }
  }
  for (double s : skip) {
    if (!(s >= 0.6 && s <= 1.0)) {
      throw Error(ErrorKind::kConfig, "freeu: skip factor outside [0.6, 1]");
    }
  }
  if (!(r_thresh > 0.0 && r_thresh <= 1.0)) {
    throw Error(ErrorKind::kConfig, "freeu: r_thresh must be in (0, 1]");
  }
}

nlohmann::json FreeUConfig::to_json() const
{
  return {{"backbone", backbone}, {"skip", skip}, {"r_thresh", r_thresh}};
}

FreeUConfig FreeUConfig::from_json(const nlohmann::json & j)
{
  FreeUConfig f;
  f.backbone = j.value("backbone", f.backbone);
  f.skip = j.value("skip", f.skip);
  f.r_thresh = j.value("r_thresh", f.r_thresh);
  return f;
}

std::vector<double> sinusoidal_time_embedding(double t, int dim)
{
  if (dim < 2 || dim % 2 != 0) {
    throw Error(ErrorKind::kConfig, "time embedding dimension must be even and >= 2");
  }
  std::vector<double> out(static_cast<std::size_t>(dim));
  for (int j = 0; j < dim / 2; ++j) {
    const double omega = std::pow(10000.0, -2.0 * j / dim);
    out[static_cast<std::size_t>(2 * j)] = std::sin(t * omega);
    out[static_cast<std::size_t>(2 * j + 1)] = std::cos(t * omega);
  }
  return out;
}

template <typename Real>
Matrix<Real> freeu_backbone_scale(const Matrix<Real> & features, double b)
{
  const Eigen::Index len = features.cols();
  std::vector<double> mean(static_cast<std::size_t>(len));
  for (Eigen::Index l = 0; l < len; ++l) {
    mean[static_cast<std::size_t>(l)] = static_cast<double>(features.col(l).sum()) /
                                        static_cast<double>(features.rows());
  }
  const auto [lo, hi] = std::minmax_element(mean.begin(), mean.end());
  const double span = *hi - *lo;
  Matrix<Real> out = features;
  if (!(span > 0.0) || b == 1.0) {
    return out;
  }
  const double low = *lo;
  const Eigen::Index half = features.rows() / 2;
  for (Eigen::Index l = 0; l < len; ++l) {
    const double gain = (b - 1.0) * (mean[static_cast<std::size_t>(l)] - low) / span + 1.0;
    out.col(l).head(half) *= static_cast<Real>(gain);
  }
  return out;
}

template <typename Real>
Matrix<Real> freeu_skip_modulate(const Matrix<Real> & features, double s, double r_thresh)
{
  const Eigen::Index len = features.cols();
  const auto n = static_cast<std::size_t>(len);
  std::vector<double> mask(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double folded = static_cast<double>(std::min(m, n - m));
    const double r = folded / (static_cast<double>(n) / 2.0);
    mask[m] = r < r_thresh ? s : 1.0;
  }
  std::vector<std::complex<double>> twiddle(n);
  for (std::size_t i = 0; i < n; ++i) {
    twiddle[i] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(i) /
                                   static_cast<double>(n));
  }

  Matrix<Real> out(features.rows(), len);
  std::vector<std::complex<double>> spectrum(n);
  for (Eigen::Index c = 0; c < features.rows(); ++c) {
    for (std::size_t m = 0; m < n; ++m) {
      std::complex<double> acc{};
      for (std::size_t j = 0; j < n; ++j) {
        acc += static_cast<double>(features(c, static_cast<Eigen::Index>(j))) * twiddle[(m * j) % n];
      }
      spectrum[m] = acc * mask[m];
    }
    for (std::size_t j = 0; j < n; ++j) {
      std::complex<double> acc{};
      for (std::size_t m = 0; m < n; ++m) {
        acc += spectrum[m] * std::conj(twiddle[(m * j) % n]);
      }
      out(c, static_cast<Eigen::Index>(j)) = static_cast<Real>(acc.real() / static_cast<double>(n));
    }
  }
  return out;
}

template Matrix<float> freeu_backbone_scale(const Matrix<float> &, double);
template Matrix<double> freeu_backbone_scale(const Matrix<double> &, double);
template Matrix<float> freeu_skip_modulate(const Matrix<float> &, double, double);
template Matrix<double> freeu_skip_modulate(const Matrix<double> &, double, double);

template <typename Real>
RoadUNet<Real>::RoadUNet(ArchConfig arch) : arch_(std::move(arch))
{
  arch_.validate();
  const int d = arch_.time_dim();
  const int e = arch_.embed_dim();
  const int cdim = static_cast<int>(ConditionVector::kSize);

  time_fc1_w_ = add_linear("time.fc1", e, d);
  time_fc1_b_ = time_fc1_w_ + 1;
  time_fc2_w_ = add_linear("time.fc2", e, e);
  time_fc2_b_ = time_fc2_w_ + 1;
  wide_w_ = add_linear("cond.wide", d, cdim);
  wide_b_ = wide_w_ + 1;
  deep1_w_ = add_linear("cond.deep1", arch_.cond_hidden, cdim);
  deep1_b_ = deep1_w_ + 1;
  deep2_w_ = add_linear("cond.deep2", d, arch_.cond_hidden);
  deep2_b_ = deep2_w_ + 1;

  in_w_ = add_conv("in", arch_.channels(0), arch_.in_channels(), 3);
  in_b_ = in_w_ + 1;

  const int stages = arch_.stages();
  const int first_attention = stages - std::min(arch_.attention_stages, stages);
  int ch = arch_.channels(0);
  for (int s = 0; s < stages; ++s) {
    Stage stage;
    const std::string prefix = "enc" + std::to_string(s);
    for (int r = 0; r < arch_.res_blocks; ++r) {
      stage.res.push_back(add_res_block(prefix + ".res" + std::to_string(r), ch, arch_.channels(s)));
      ch = arch_.channels(s);
    }
    if (s >= first_attention) {
      stage.attention = add_attention(prefix + ".attn", ch);
    }
    if (s + 1 < stages) {
      stage.resample_w = add_conv(prefix + ".down", ch, ch, 3);
      stage.resample_b = stage.resample_w + 1;
    }
    encoder_.push_back(std::move(stage));
  }

  mid_res_.push_back(add_res_block("mid.res0", ch, ch));
  if (arch_.mid_attention) {
    mid_attention_ = add_attention("mid.attn", ch);
  }
  mid_res_.push_back(add_res_block("mid.res1", ch, ch));

  decoder_.resize(static_cast<std::size_t>(stages));
  for (int s = stages - 1; s >= 0; --s) {
    Stage & stage = decoder_[static_cast<std::size_t>(s)];
    const std::string prefix = "dec" + std::to_string(s);
    const int c = arch_.channels(s);
    for (int r = 0; r < arch_.res_blocks; ++r) {
      stage.res.push_back(add_res_block(prefix + ".res" + std::to_string(r), r == 0 ? 2 * c : c, c));
    }
    if (s > 0) {
      stage.resample_w = add_conv(prefix + ".up", arch_.channels(s - 1), c, 3);
      stage.resample_b = stage.resample_w + 1;
    }
  }

  const int c0 = arch_.channels(0);
  out_gn_g_ = add_vector("out.gn.gamma", c0);
  out_gn_b_ = add_vector("out.gn.beta", c0);
  out_w_ = add_conv("out", arch_.in_channels(), c0, 3);
  out_b_ = out_w_ + 1;
}

template <typename Real>
int RoadUNet<Real>::add_conv(const std::string & name, int out, int in, int kernel)
{
  const int w = params_.add(name + ".w", {kernel, in, out}, out, kernel * in);
  params_.add(name + ".b", {out}, out, 1);
  return w;
}

template <typename Real>
int RoadUNet<Real>::add_vector(const std::string & name, int size)
{
  return params_.add(name, {size}, size, 1);
}

template <typename Real>
int RoadUNet<Real>::add_linear(const std::string & name, int out, int in)
{
  const int w = params_.add(name + ".w", {in, out}, out, in);
  params_.add(name + ".b", {out}, out, 1);
  return w;
}

template <typename Real>
typename RoadUNet<Real>::ResBlockIds RoadUNet<Real>::add_res_block(const std::string & prefix,
                                                                    int in, int out)
{
  ResBlockIds b{};
  b.in_ch = in;
  b.out_ch = out;
  b.gn1_g = add_vector(prefix + ".gn1.gamma", in);
  b.gn1_b = add_vector(prefix + ".gn1.beta", in);
  b.conv1_w = add_conv(prefix + ".conv1", out, in, 3);
  b.conv1_b = b.conv1_w + 1;
  b.emb_w = add_linear(prefix + ".emb", out, arch_.embed_dim());
  b.emb_b = b.emb_w + 1;
  b.gn2_g = add_vector(prefix + ".gn2.gamma", out);
  b.gn2_b = add_vector(prefix + ".gn2.beta", out);
  b.conv2_w = add_conv(prefix + ".conv2", out, out, 3);
  b.conv2_b = b.conv2_w + 1;
  if (in != out) {
    b.skip_w = add_conv(prefix + ".skip", out, in, 1);
    b.skip_b = b.skip_w + 1;
  }
  return b;
}

template <typename Real>
typename RoadUNet<Real>::AttentionIds RoadUNet<Real>::add_attention(const std::string & prefix,
                                                                     int ch)
{
  AttentionIds a{};
  a.ch = ch;
  a.gn_g = add_vector(prefix + ".gn.gamma", ch);
  a.gn_b = add_vector(prefix + ".gn.beta", ch);
  a.q_w = add_conv(prefix + ".q", ch, ch, 1);
  a.q_b = a.q_w + 1;
  a.k_w = add_conv(prefix + ".k", ch, ch, 1);
  a.k_b = a.k_w + 1;
  a.v_w = add_conv(prefix + ".v", ch, ch, 1);
  a.v_b = a.v_w + 1;
  a.proj_w = add_conv(prefix + ".proj", ch, ch, 1);
  a.proj_b = a.proj_w + 1;
  return a;
}

template <typename Real>
int RoadUNet<Real>::groups(int channels) const
{
  return std::gcd(arch_.max_groups, channels);
}

template <typename Real>
void RoadUNet<Real>::initialize(std::uint64_t seed, InitMode mode)
{
  RandomStream rng(seed, 0x1417);
  for (auto & p : params_) {
    const std::string & name = p.name;
    const auto ends_with = [&](const std::string & suffix) {
      return name.size() >= suffix.size() &&
             name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    if (ends_with(".gamma")) {
      p.value.setOnes();
      continue;
    }
    if (ends_with(".beta")) {
      p.value.setZero();
      continue;
    }
    const bool zero_init = mode == InitMode::kStandard &&
                           (name.find(".conv2.") != std::string::npos ||
                            name.find(".proj.") != std::string::npos || name.rfind("out.", 0) == 0);
    if (zero_init) {
      p.value.setZero();
      continue;
    }
    // fan-in of the owning layer: weight columns (bias shares its weight's fan-in)
    const int weight_id = ends_with(".b") ? params_.find(name.substr(0, name.size() - 2) + ".w")
                                           : params_.find(name);
    const double fan_in = static_cast<double>(params_[weight_id].value.cols());
    const double bound = 1.0 / std::sqrt(fan_in);
    for (Eigen::Index i = 0; i < p.value.size(); ++i) {
      p.value.data()[i] = static_cast<Real>((2.0 * rng.uniform() - 1.0) * bound);
    }
  }
}

template <typename Real>
typename RoadUNet<Real>::Id RoadUNet<Real>::res_block(Tape<Real> & tape, const ResBlockIds & b,
                                                      Id x, Id emb) const
{
  Id h = tape.group_norm(x, b.gn1_g, b.gn1_b, groups(b.in_ch));
  h = tape.conv1d(tape.silu(h), b.conv1_w, b.conv1_b, 3, 1);
  h = tape.add_column(h, tape.linear(emb, b.emb_w, b.emb_b));
  h = tape.group_norm(h, b.gn2_g, b.gn2_b, groups(b.out_ch));
  h = tape.conv1d(tape.silu(h), b.conv2_w, b.conv2_b, 3, 1);
  const Id skip = b.skip_w >= 0 ? tape.conv1d(x, b.skip_w, b.skip_b, 1, 1) : x;
  return tape.add(h, skip);
}

template <typename Real>
typename RoadUNet<Real>::Id RoadUNet<Real>::attention(Tape<Real> & tape, const AttentionIds & a,
                                                      Id x) const
{
  const Id h = tape.group_norm(x, a.gn_g, a.gn_b, groups(a.ch));
  const Id q = tape.conv1d(h, a.q_w, a.q_b, 1, 1);
  const Id k = tape.conv1d(h, a.k_w, a.k_b, 1, 1);
  const Id v = tape.conv1d(h, a.v_w, a.v_b, 1, 1);
  const Id o = tape.conv1d(tape.attention(q, k, v), a.proj_w, a.proj_b, 1, 1);
  return tape.add(x, o);
}

template <typename Real>
typename RoadUNet<Real>::Id RoadUNet<Real>::condition_embedding(
  Tape<Real> & tape, std::span<const double> condition) const
{
  if (condition.size() != ConditionVector::kSize) {
    throw Error(ErrorKind::kInvalidArgument, "condition vector must have 6 entries");
  }
  Mat c(static_cast<Eigen::Index>(condition.size()), 1);
  for (std::size_t i = 0; i < condition.size(); ++i) {
    c(static_cast<Eigen::Index>(i), 0) = static_cast<Real>(condition[i]);
  }
  const Id cid = tape.constant(std::move(c));
  const Id wide = tape.linear(cid, wide_w_, wide_b_);
  const Id deep = tape.linear(tape.silu(tape.linear(cid, deep1_w_, deep1_b_)), deep2_w_, deep2_b_);
  return tape.add(wide, deep);
}

template <typename Real>
std::vector<double> RoadUNet<Real>::condition_embedding(std::span<const double> condition) const
{
  Tape<Real> tape(params_, nullptr);
  const Mat & v = tape.value(condition_embedding(tape, condition));
  std::vector<double> out(static_cast<std::size_t>(v.rows()));
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = static_cast<double>(v(i, 0));
  }
  return out;
}

template <typename Real>
typename RoadUNet<Real>::Mat RoadUNet<Real>::attention_block(const std::string & prefix,
                                                             const Mat & x) const
{
  const AttentionIds * ids = nullptr;
  for (std::size_t s = 0; s < encoder_.size(); ++s) {
    if (prefix == "enc" + std::to_string(s) + ".attn" && encoder_[s].attention) {
      ids = &*encoder_[s].attention;
    }
  }
  if (prefix == "mid.attn" && mid_attention_) {
    ids = &*mid_attention_;
  }
  if (ids == nullptr) {
    throw Error(ErrorKind::kInvalidArgument, "no attention block named " + prefix);
  }
  Tape<Real> tape(params_, nullptr);
  return tape.value(attention(tape, *ids, tape.constant(x)));
}

template <typename Real>
typename RoadUNet<Real>::Id RoadUNet<Real>::forward(Tape<Real> & tape, const Mat & x, double t,
                                                    std::span<const double> condition,
                                                    const FreeUConfig * freeu) const
{
  if (x.rows() != arch_.in_channels() || x.cols() != arch_.points) {
    throw Error(ErrorKind::kInvalidArgument,
                "predict_noise: expected " + std::to_string(arch_.in_channels()) + "x" +
                  std::to_string(arch_.points) + " input, got " + std::to_string(x.rows()) + "x" +
                  std::to_string(x.cols()));
  }
  const auto sinus = sinusoidal_time_embedding(t, arch_.time_dim());
  Mat temb(static_cast<Eigen::Index>(sinus.size()), 1);
  for (std::size_t i = 0; i < sinus.size(); ++i) {
    temb(static_cast<Eigen::Index>(i), 0) = static_cast<Real>(sinus[i]);
  }
  const Id e = tape.add(tape.constant(std::move(temb)), condition_embedding(tape, condition));
  const Id hidden = tape.silu(tape.linear(e, time_fc1_w_, time_fc1_b_));
  const Id emb = tape.silu(tape.linear(hidden, time_fc2_w_, time_fc2_b_));

  Id h = tape.conv1d(tape.constant(x), in_w_, in_b_, 3, 1);
  std::vector<Id> skips;
  for (const Stage & stage : encoder_) {
    for (const auto & rb : stage.res) {
      h = res_block(tape, rb, h, emb);
    }
    if (stage.attention) {
      h = attention(tape, *stage.attention, h);
    }
    skips.push_back(h);
    if (stage.resample_w >= 0) {
      h = tape.conv1d(h, stage.resample_w, stage.resample_b, 3, 2);
    }
  }

  h = res_block(tape, mid_res_[0], h, emb);
  if (mid_attention_) {
    h = attention(tape, *mid_attention_, h);
  }
  h = res_block(tape, mid_res_[1], h, emb);

  const int stages = arch_.stages();
  for (int s = stages - 1; s >= 0; --s) {
    const Stage & stage = decoder_[static_cast<std::size_t>(s)];
    Id skip = skips[static_cast<std::size_t>(s)];
    const auto z = static_cast<std::size_t>(stages - 1 - s);
    if (freeu != nullptr && z < freeu->backbone.size()) {
      const double b = freeu->backbone[z];
      const double sz = freeu->skip[z];
      const double r = freeu->r_thresh;
      h = tape.transform(h, [b](const Mat & m) { return freeu_backbone_scale<Real>(m, b); });
      skip = tape.transform(skip, [sz, r](const Mat & m) { return freeu_skip_modulate<Real>(m, sz, r); });
    }
    h = tape.concat_rows(h, skip);
    for (const auto & rb : stage.res) {
      h = res_block(tape, rb, h, emb);
    }
    if (stage.resample_w >= 0) {
      h = tape.conv1d(tape.upsample2(h), stage.resample_w, stage.resample_b, 3, 1);
    }
  }

  h = tape.silu(tape.group_norm(h, out_gn_g_, out_gn_b_, groups(arch_.channels(0))));
  return tape.conv1d(h, out_w_, out_b_, 3, 1);
}

template <typename Real>
typename RoadUNet<Real>::Mat RoadUNet<Real>::predict_noise(const Mat & x, double t,
                                                           std::span<const double> condition,
                                                           const FreeUConfig * freeu) const
{
  Tape<Real> tape(params_, nullptr);
  return tape.value(forward(tape, x, t, condition, freeu));
}

template class RoadUNet<float>;
template class RoadUNet<double>;

template <typename Real>
Matrix<Real> to_channels(const RoadScenario & scenario)
{
  Matrix<Real> out(static_cast<Eigen::Index>(2 * scenario.n), static_cast<Eigen::Index>(scenario.k));
  for (std::size_t r = 0; r < scenario.n; ++r) {
    for (std::size_t p = 0; p < scenario.k; ++p) {
      const Vec2 v = scenario.at(r, p);
      out(static_cast<Eigen::Index>(2 * r), static_cast<Eigen::Index>(p)) = static_cast<Real>(v.x);
      out(static_cast<Eigen::Index>(2 * r + 1), static_cast<Eigen::Index>(p)) = static_cast<Real>(v.y);
    }
  }
  return out;
}

template <typename Real>
void from_channels(const Matrix<Real> & channels, RoadScenario & scenario)
{
  if (channels.rows() != static_cast<Eigen::Index>(2 * scenario.n) ||
      channels.cols() != static_cast<Eigen::Index>(scenario.k)) {
    throw Error(ErrorKind::kInvalidArgument, "from_channels: shape mismatch");
  }
  for (std::size_t r = 0; r < scenario.n; ++r) {
    for (std::size_t p = 0; p < scenario.k; ++p) {
      scenario.set(r, p,
                   {static_cast<double>(channels(static_cast<Eigen::Index>(2 * r), static_cast<Eigen::Index>(p))),
                    static_cast<double>(channels(static_cast<Eigen::Index>(2 * r + 1), static_cast<Eigen::Index>(p)))});
    }
  }
}

template Matrix<float> to_channels<float>(const RoadScenario &);
template Matrix<double> to_channels<double>(const RoadScenario &);
template void from_channels<float>(const Matrix<float> &, RoadScenario &);
template void from_channels<double>(const Matrix<double> &, RoadScenario &);

}  // namespace diffroad::nn
