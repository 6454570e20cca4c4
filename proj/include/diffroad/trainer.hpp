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

#ifndef DIFFROAD__TRAINER_HPP_
#define DIFFROAD__TRAINER_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "diffroad/checkpoint.hpp"
#include "diffroad/dataset.hpp"
#include "diffroad/diffusion.hpp"
#include "diffroad/optimizer.hpp"
#include "diffroad/road_unet.hpp"

namespace diffroad::train
{

struct TrainingConfig
{
  double learning_rate{2e-4};
  int batch_size{32};
  double omega{1.0};
  int diffusion_steps{500};
  double beta_min{1e-4};
  double beta_max{0.05};
  int max_steps{2000};
  std::uint64_t seed{0};
  double condition_dropout{0.1};
  std::string optimizer{"adam"};
  std::string lr_schedule{"constant"};  // or "cosine", decaying to 0 at max_steps
  double grad_clip{1.0};
  int checkpoint_interval{0};  // 0: only at termination

  void validate() const;
  nlohmann::json to_json() const;
  static TrainingConfig from_json(const nlohmann::json & j);
};

/// One training scenario in network layout.
struct Example
{
  nn::Matrix<float> x0;  // (2n) x k
  std::vector<bool> valid;
  std::array<double, ConditionVector::kSize> condition{};
};

/// Network layout: row 2r is x of road r, row 2r+1 its y.
nn::Matrix<float> to_network_layout(const RoadScenario & s);
void from_network_layout(const nn::Matrix<float> & x, RoadScenario & s);

/// Checks every record against the architecture's n and k.
std::vector<Example> make_examples(const std::vector<data::LibraryRecord> & records,
                                   const nn::ArchConfig & arch);

/// A fixed (x0, t, eps) draw for measuring loss independently of training noise.
struct EvalItem
{
  std::size_t example;
  int t;
  nn::Matrix<float> eps;
};

std::vector<EvalItem> make_eval_set(const std::vector<Example> & examples, int diffusion_steps,
                                    int per_example, std::uint64_t seed);

/// Learning rate for the 1-based update `step`.
double scheduled_learning_rate(const TrainingConfig & config, std::int64_t step);

struct StepStats
{
  std::int64_t step{0};
  double mse{0.0};
  double smooth{0.0};
  double total{0.0};
  double grad_norm{0.0};
};

class Trainer
{
public:
  Trainer(nn::ArchConfig arch, TrainingConfig config, std::vector<Example> examples, int jobs = 1);
  /// Resumes model, optimizer state and step counter from a checkpoint.
  Trainer(const Checkpoint & resume, TrainingConfig config, std::vector<Example> examples,
          int jobs = 1);

  /// One optimizer update. Throws Error(kNumeric) on a non-finite loss.
  StepStats step();

  std::int64_t current_step() const { return step_; }
  const TrainingConfig & config() const { return config_; }
  const nn::RoadUNet<float> & model() const { return model_; }
  nn::RoadUNet<float> & model() { return model_; }
  const diffusion::NoiseSchedule & schedule() const { return schedule_; }

  /// Hybrid loss over a fixed evaluation set (no dropout).
  double evaluate(const std::vector<EvalItem> & items) const;

  Checkpoint checkpoint(const nlohmann::json & normalization = nlohmann::json::object()) const;

private:
  std::string parameter_norms() const;

  nn::RoadUNet<float> model_;
  TrainingConfig config_;
  std::vector<Example> examples_;
  int jobs_;
  diffusion::NoiseSchedule schedule_;
  Optimizer<float> optimizer_;
  std::int64_t step_{0};
};

struct TrainCallbacks
{
  std::function<void(const StepStats &)> on_step;
  std::function<void(const Checkpoint &)> on_checkpoint;
};

/// Runs until max_steps, emitting checkpoints every checkpoint_interval steps
/// and at termination. Returns the final checkpoint.
Checkpoint train(Trainer & trainer, const TrainCallbacks & callbacks,
                 const nlohmann::json & normalization = nlohmann::json::object());

/// Append-only CSV: step,L_mse,L_s,L
class LossTrace
{
public:
  explicit LossTrace(const std::filesystem::path & path);
  void append(const StepStats & stats);

private:
  std::filesystem::path path_;
};

}  // namespace diffroad::train

#endif  // DIFFROAD__TRAINER_HPP_
