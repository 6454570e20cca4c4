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

#ifndef DIFFROAD__ROAD_UNET_HPP_
#define DIFFROAD__ROAD_UNET_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "diffroad/scenario.hpp"
#include "diffroad/tape.hpp"

namespace diffroad::nn
{

/// Layout of the denoiser. Defaults instantiate the full-size network:
/// four resolution stages with multipliers (1, 2, 4, 8) over 64 channels,
/// two residual blocks per stage, attention at the two deepest encoder
/// stages and at the bottleneck.
struct ArchConfig
{
  int roads{12};
  int points{64};
  int base_channels{64};
  std::vector<int> channel_mult{1, 2, 4, 8};
  int res_blocks{2};
  int attention_stages{2};
  bool mid_attention{true};
  int max_groups{8};
  int cond_hidden{64};

  int in_channels() const { return 2 * roads; }
  int stages() const { return static_cast<int>(channel_mult.size()); }
  int channels(int stage) const { return base_channels * channel_mult[static_cast<std::size_t>(stage)]; }
  int time_dim() const { return base_channels; }
  int embed_dim() const { return 4 * base_channels; }
  int attention_blocks() const;

  /// Throws Error(kConfig) on inconsistent settings.
  void validate() const;

  nlohmann::json to_json() const;
  static ArchConfig from_json(const nlohmann::json & j);
  friend bool operator==(const ArchConfig &, const ArchConfig &) = default;
};

/// Generation-time decoder modulation. Index z = 0 is the deepest decoder
/// stage, z = 1 the next one up.
struct FreeUConfig
{
  std::vector<double> backbone{1.3, 1.2};
  std::vector<double> skip{0.9, 0.95};
  double r_thresh{0.25};

  static FreeUConfig neutral(std::size_t stages = 2);
  void validate() const;
  nlohmann::json to_json() const;
  static FreeUConfig from_json(const nlohmann::json & j);
  friend bool operator==(const FreeUConfig &, const FreeUConfig &) = default;
};

/// Interleaved (sin, cos) pairs with frequencies 10000^(-2j/dim).
std::vector<double> sinusoidal_time_embedding(double t, int dim);

/// Backbone scaling: the per-position channel mean is min-max normalised to
/// build a gain in [1, b]; the first half of the channels is multiplied by
/// it. A flat channel-mean map yields unit gain.
template <typename Real>
Matrix<Real> freeu_backbone_scale(const Matrix<Real> & features, double b);

/// Skip modulation: per channel DFT along positions, bins whose frequency
/// (fraction of Nyquist, mirrored about DC) is below r_thresh are scaled by s.
template <typename Real>
Matrix<Real> freeu_skip_modulate(const Matrix<Real> & features, double s, double r_thresh);

enum class InitMode {
  kStandard,  // residual output convolutions and the output head start at zero
  kRandom,    // every weight random (gradient checks)
};

template <typename Real>
class RoadUNet
{
public:
  using Mat = Matrix<Real>;

  explicit RoadUNet(ArchConfig arch);

  const ArchConfig & arch() const { return arch_; }
  ParameterSet<Real> & parameters() { return params_; }
  const ParameterSet<Real> & parameters() const { return params_; }

  void initialize(std::uint64_t seed, InitMode mode = InitMode::kStandard);

  /// Builds the forward graph on a tape; x is (2n) x k.
  typename Tape<Real>::Id forward(Tape<Real> & tape, const Mat & x, double t,
                                  std::span<const double> condition,
                                  const FreeUConfig * freeu = nullptr) const;

  /// eps_theta(x_t, t, c). Pure function of inputs and parameters.
  Mat predict_noise(const Mat & x, double t, std::span<const double> condition,
                    const FreeUConfig * freeu = nullptr) const;

  /// Wide (linear) plus deep (two-layer SiLU perceptron) embedding of c.
  std::vector<double> condition_embedding(std::span<const double> condition) const;

  /// The attention block of an encoder stage, exposed for isolated checks.
  Mat attention_block(const std::string & prefix, const Mat & x) const;

private:
  struct ResBlockIds
  {
    int gn1_g, gn1_b, conv1_w, conv1_b, emb_w, emb_b, gn2_g, gn2_b, conv2_w, conv2_b;
    int skip_w{-1};
    int skip_b{-1};
    int in_ch, out_ch;
  };
  struct AttentionIds
  {
    int gn_g, gn_b, q_w, q_b, k_w, k_b, v_w, v_b, proj_w, proj_b;
    int ch;
  };
  struct Stage
  {
    std::vector<ResBlockIds> res;
    std::optional<AttentionIds> attention;
    int resample_w{-1};
    int resample_b{-1};
  };

  int add_conv(const std::string & name, int out, int in, int kernel);
  int add_vector(const std::string & name, int size);
  int add_linear(const std::string & name, int out, int in);
  ResBlockIds add_res_block(const std::string & prefix, int in, int out);
  AttentionIds add_attention(const std::string & prefix, int ch);

  using Id = typename Tape<Real>::Id;
  Id res_block(Tape<Real> & tape, const ResBlockIds & b, Id x, Id emb) const;
  Id attention(Tape<Real> & tape, const AttentionIds & a, Id x) const;
  Id condition_embedding(Tape<Real> & tape, std::span<const double> condition) const;
  int groups(int channels) const;

  ArchConfig arch_;
  ParameterSet<Real> params_;
  int time_fc1_w_, time_fc1_b_, time_fc2_w_, time_fc2_b_;
  int wide_w_, wide_b_, deep1_w_, deep1_b_, deep2_w_, deep2_b_;
  int in_w_, in_b_;
  std::vector<Stage> encoder_;
  std::vector<ResBlockIds> mid_res_;
  std::optional<AttentionIds> mid_attention_;
  std::vector<Stage> decoder_;  // indexed by resolution stage
  int out_gn_g_, out_gn_b_, out_w_, out_b_;
};

extern template class RoadUNet<float>;
extern template class RoadUNet<double>;

/// Scenario points (n x k x 2, road-major) to the (2n) x k network layout.
template <typename Real>
Matrix<Real> to_channels(const RoadScenario & scenario);
template <typename Real>
void from_channels(const Matrix<Real> & channels, RoadScenario & scenario);

}  // namespace diffroad::nn

#endif  // DIFFROAD__ROAD_UNET_HPP_
