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

#ifndef DIFFROAD__CHECKPOINT_HPP_
#define DIFFROAD__CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "diffroad/road_unet.hpp"

/// Binary container: "DRCK", u16 version, u32 manifest length, a JSON
/// manifest, then little-endian float32 tensor data.
namespace diffroad::train
{

inline constexpr std::uint16_t kCheckpointVersion = 1;

struct Tensor
{
  std::string name;
  std::vector<int> shape;
  std::vector<float> data;
};

struct Checkpoint
{
  nn::ArchConfig arch;
  int diffusion_steps{500};
  double beta_min{1e-4};
  double beta_max{0.05};
  std::int64_t step{0};
  std::string optimizer{"adam"};
  std::int64_t optimizer_steps{0};
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json normalization = nlohmann::json::object();
  std::vector<Tensor> parameters;
  std::vector<Tensor> adam_m;  // empty for SGD
  std::vector<Tensor> adam_v;
};

std::string serialize_checkpoint(const Checkpoint & ck);
/// Magic or version mismatch -> kVersion; short data -> kTruncated;
/// manifest inconsistent with data -> kIntegrity.
Checkpoint parse_checkpoint(std::string_view bytes);

void save_checkpoint(const Checkpoint & ck, const std::filesystem::path & path);
Checkpoint load_checkpoint(const std::filesystem::path & path);

std::vector<Tensor> tensors_from(const nn::ParameterSet<float> & params,
                                 const std::vector<nn::Matrix<float>> * values = nullptr);
/// Copies tensors into the parameter set (or the aligned matrices); names and
/// sizes must match exactly.
void tensors_into(const std::vector<Tensor> & tensors, nn::ParameterSet<float> & params);
void tensors_into(const std::vector<Tensor> & tensors, const nn::ParameterSet<float> & params,
                  std::vector<nn::Matrix<float>> & values);

/// Rebuilds a network from the architecture and parameters in a checkpoint.
nn::RoadUNet<float> model_from_checkpoint(const Checkpoint & ck);

}  // namespace diffroad::train

#endif  // DIFFROAD__CHECKPOINT_HPP_
