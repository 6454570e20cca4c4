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

#ifndef DIFFROAD__SAMPLING_HPP_
#define DIFFROAD__SAMPLING_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "diffroad/dataset.hpp"
#include "diffroad/diffusion.hpp"
#include "diffroad/road_unet.hpp"

namespace diffroad::sampling
{

struct SamplerConfig
{
  int stride{5};
  bool freeu_enabled{true};
  nn::FreeUConfig freeu;
  std::uint64_t seed{0};
  int count{100};

  void validate(int diffusion_steps) const;
  nlohmann::json to_json() const;
  static SamplerConfig from_json(const nlohmann::json & j);
};

/// (T, T - stride, ..., 1), strictly decreasing and always ending at 1.
std::vector<int> build_timestep_subsequence(int steps, int stride);

/// Ancestral sampling over an explicit step sequence (descending, ending at 1)
/// with per-jump coefficients. Noise for step t comes from a stream keyed by
/// (scenario_seed, t), so every stride draws the same z at a shared step.
nn::Matrix<float> sample_tensor(const nn::RoadUNet<float> & model,
                                const diffusion::NoiseSchedule & schedule,
                                std::span<const double> condition, std::span<const int> sequence,
                                std::uint64_t scenario_seed, const nn::FreeUConfig * freeu = nullptr);

/// The un-strided T-step chain using the per-step schedule tables.
nn::Matrix<float> sample_full_chain(const nn::RoadUNet<float> & model,
                                    const diffusion::NoiseSchedule & schedule,
                                    std::span<const double> condition, std::uint64_t scenario_seed,
                                    const nn::FreeUConfig * freeu = nullptr);

struct GenerationRequest
{
  ConditionVector condition;
  double half_extent_m{200.0};
  ShapePoint origin{};
  /// Road mask inherited from a reference scenario; empty marks every
  /// non-degenerate road valid.
  std::vector<bool> mask;
};

/// Cycles through the dataset's scenarios to build `count` requests.
std::vector<GenerationRequest> requests_from_dataset(const std::vector<data::LibraryRecord> & dataset,
                                                     int count);

/// Normalized scenario for request `index`, seeded by config.seed + index.
RoadScenario generate_scenario(const nn::RoadUNet<float> & model,
                               const diffusion::NoiseSchedule & schedule,
                               const GenerationRequest & request, const SamplerConfig & config,
                               std::uint64_t index);

/// Results are ordered by index and independent of `jobs` and of how the
/// indices are partitioned across calls.
std::vector<data::LibraryRecord> generate_library(const nn::RoadUNet<float> & model,
                                                  const diffusion::NoiseSchedule & schedule,
                                                  std::span<const GenerationRequest> requests,
                                                  const SamplerConfig & config,
                                                  std::uint64_t first_index = 0, int jobs = 1);

}  // namespace diffroad::sampling

#endif  // DIFFROAD__SAMPLING_HPP_
