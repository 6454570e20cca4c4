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

#include "diffroad/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <thread>

#include "diffroad/error.hpp"
#include "diffroad/geometry.hpp"
#include "diffroad/rng.hpp"
#include "diffroad/trainer.hpp"

namespace diffroad::sampling
{

using Mat = nn::Matrix<float>;
using nlohmann::json;

namespace
{

constexpr std::uint64_t kNoiseDomain = 0x5a4d;
constexpr double kDegenerateLength = 1e-3;

Mat normal_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, std::uint64_t t)
{
  RandomStream rng(seed, kNoiseDomain, t);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = static_cast<float>(rng.normal());
  }
  return m;
}

void check_finite(const Mat & x, int t)
{
  if (!x.allFinite()) {
    throw Error(ErrorKind::kNumeric, "sampling: non-finite state at step " + std::to_string(t));
  }
}

Mat transition(const nn::RoadUNet<float> & model, const Mat & x, int t,
               const diffusion::ReverseCoefficients & coef, std::span<const double> condition,
               std::uint64_t seed, const nn::FreeUConfig * freeu)
{
  const Mat eps_hat = model.predict_noise(x, t, condition, freeu);
  Mat z = coef.final_step ? Mat::Zero(x.rows(), x.cols()) : normal_matrix(x.rows(), x.cols(), seed, static_cast<std::uint64_t>(t));
  Mat out(x.rows(), x.cols());
  diffusion::reverse_step<float>(std::span<const float>(x.data(), static_cast<std::size_t>(x.size())),
                                 std::span<const float>(eps_hat.data(), static_cast<std::size_t>(eps_hat.size())),
                                 coef, std::span<const float>(z.data(), static_cast<std::size_t>(z.size())),
                                 std::span<float>(out.data(), static_cast<std::size_t>(out.size())));
  check_finite(out, t);
  return out;
}

}  // namespace

void SamplerConfig::validate(int diffusion_steps) const
{
  if (stride < 1 || stride > diffusion_steps) {
    throw Error(ErrorKind::kConfig, "sampler: stride must be in [1, T]");
  }
  if (count < 0) {
    throw Error(ErrorKind::kConfig, "sampler: count must be non-negative");
  }
  if (freeu_enabled) {
    freeu.validate();
  }
}

json SamplerConfig::to_json() const
{
  return {{"stride", stride}, {"freeu_enabled", freeu_enabled}, {"freeu", freeu.to_json()},
          {"seed", seed}, {"count", count}};
}

SamplerConfig SamplerConfig::from_json(const json & j)
{
  SamplerConfig c;
  c.stride = j.value("stride", c.stride);
  c.freeu_enabled = j.value("freeu_enabled", c.freeu_enabled);
  if (j.contains("freeu")) {
    c.freeu = nn::FreeUConfig::from_json(j.at("freeu"));
  }
  c.seed = j.value("seed", c.seed);
  c.count = j.value("count", c.count);
  return c;
}

std::vector<int> build_timestep_subsequence(int steps, int stride)
{
  if (steps < 1) {
    throw Error(ErrorKind::kConfig, "sampler: T must be >= 1");
  }
  if (stride < 1 || stride > steps) {
    throw Error(ErrorKind::kConfig, "sampler: stride " + std::to_string(stride) + " outside [1, " +
                                      std::to_string(steps) + "]");
  }
  std::vector<int> seq;
  for (int t = steps; t >= 1; t -= stride) {
    seq.push_back(t);
  }
  if (seq.back() != 1) {
    seq.push_back(1);
  }
  return seq;
}

Mat sample_tensor(const nn::RoadUNet<float> & model, const diffusion::NoiseSchedule & schedule,
                  std::span<const double> condition, std::span<const int> sequence,
                  std::uint64_t scenario_seed, const nn::FreeUConfig * freeu)
{
  if (sequence.empty() || sequence.back() != 1) {
    throw Error(ErrorKind::kInvalidArgument, "sampler: step sequence must end at 1");
  }
  const auto & arch = model.arch();
  Mat x = normal_matrix(arch.in_channels(), arch.points, scenario_seed, 0);
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    const int t = sequence[i];
    const int prev = i + 1 < sequence.size() ? sequence[i + 1] : 0;
    if (prev >= t) {
      throw Error(ErrorKind::kInvalidArgument, "sampler: step sequence must strictly decrease");
    }
    x = transition(model, x, t, diffusion::jump_coefficients(schedule, t, prev), condition,
                   scenario_seed, freeu);
  }
  return x.cwiseMax(-1.0f).cwiseMin(1.0f);
}

Mat sample_full_chain(const nn::RoadUNet<float> & model, const diffusion::NoiseSchedule & schedule,
                      std::span<const double> condition, std::uint64_t scenario_seed,
                      const nn::FreeUConfig * freeu)
{
  const auto & arch = model.arch();
  Mat x = normal_matrix(arch.in_channels(), arch.points, scenario_seed, 0);
  for (int t = schedule.steps; t >= 1; --t) {
    x = transition(model, x, t, diffusion::full_chain_coefficients(schedule, t), condition,
                   scenario_seed, freeu);
  }
  return x.cwiseMax(-1.0f).cwiseMin(1.0f);
}

std::vector<GenerationRequest> requests_from_dataset(const std::vector<data::LibraryRecord> & dataset,
                                                     int count)
{
  if (dataset.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "sampler: no reference scenarios to condition on");
  }
  std::vector<GenerationRequest> out;
  for (int i = 0; i < count; ++i) {
    const RoadScenario & s = dataset[static_cast<std::size_t>(i) % dataset.size()].scenario;
    out.push_back({s.condition, s.half_extent_m, s.origin, s.valid});
  }
  return out;
}

RoadScenario generate_scenario(const nn::RoadUNet<float> & model,
                               const diffusion::NoiseSchedule & schedule,
                               const GenerationRequest & request, const SamplerConfig & config,
                               std::uint64_t index)
{
  const auto & arch = model.arch();
  const auto sequence = build_timestep_subsequence(schedule.steps, config.stride);
  const auto c = request.condition.flatten();
  const Mat x = sample_tensor(model, schedule, c, sequence, config.seed + index,
                              config.freeu_enabled ? &config.freeu : nullptr);

  RoadScenario s(static_cast<std::size_t>(arch.roads), static_cast<std::size_t>(arch.points));
  train::from_network_layout(x, s);
  s.condition = request.condition;
  s.half_extent_m = request.half_extent_m;
  s.origin = request.origin;
  char id[64];
  std::snprintf(id, sizeof(id), "gen-%06llu-%s", static_cast<unsigned long long>(index),
                std::string(to_string(request.condition.type())).c_str());
  s.id = id;
  for (std::size_t r = 0; r < s.n; ++r) {
    const bool allowed = request.mask.empty() || (r < request.mask.size() && request.mask[r]);
    s.valid[r] = allowed && geometry::polyline_length(s.road(r)) > kDegenerateLength;
  }
  return s;
}

std::vector<data::LibraryRecord> generate_library(const nn::RoadUNet<float> & model,
                                                  const diffusion::NoiseSchedule & schedule,
                                                  std::span<const GenerationRequest> requests,
                                                  const SamplerConfig & config,
                                                  std::uint64_t first_index, int jobs)
{
  config.validate(schedule.steps);
  std::vector<data::LibraryRecord> out(requests.size());
  const auto work = [&](std::size_t i) {
    const std::uint64_t index = first_index + i;
    out[i].scenario = generate_scenario(model, schedule, requests[i], config, index);
    out[i].seed = config.seed + index;
  };
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, jobs)), requests.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < requests.size(); ++i) {
      work(i);
    }
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < requests.size(); i += workers) {
          work(i);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto & th : pool) {
    th.join();
  }
  for (auto & e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
  return out;
}

}  // namespace diffroad::sampling
