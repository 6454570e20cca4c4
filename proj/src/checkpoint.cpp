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

#include "diffroad/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "diffroad/dataset.hpp"
#include "diffroad/error.hpp"
#include "diffroad/rng.hpp"

namespace diffroad::train
{

using nlohmann::json;

namespace
{

constexpr char kMagic[4] = {'D', 'R', 'C', 'K'};
constexpr std::size_t kHeaderSize = 4 + 2 + 4;

void put_le(std::string & out, std::uint64_t v, int bytes)
{
  for (int i = 0; i < bytes; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
}

std::uint64_t get_le(std::string_view in, std::size_t pos, int bytes)
{
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + static_cast<std::size_t>(i)]))
         << (8 * i);
  }
  return v;
}

std::size_t element_count(const std::vector<int> & shape)
{
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) {
      throw Error(ErrorKind::kIntegrity, "negative tensor dimension");
    }
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

void append_group(const std::vector<Tensor> & group, const char * tag, json & entries,
                  std::string & data)
{
  for (const auto & t : group) {
    if (element_count(t.shape) != t.data.size()) {
      throw Error(ErrorKind::kInvalidArgument, "tensor '" + t.name + "' shape disagrees with data");
    }
    entries.push_back({{"name", t.name},
                       {"group", tag},
                       {"shape", t.shape},
                       {"dtype", "f32"},
                       {"offset", data.size()}});
    for (float f : t.data) {
      put_le(data, std::bit_cast<std::uint32_t>(f), 4);
    }
  }
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint & ck)
{
  json entries = json::array();
  std::string data;
  append_group(ck.parameters, "param", entries, data);
  append_group(ck.adam_m, "adam_m", entries, data);
  append_group(ck.adam_v, "adam_v", entries, data);

  const json manifest = {
    {"meta",
     {{"arch", ck.arch.to_json()},
      {"schedule", {{"steps", ck.diffusion_steps}, {"beta_min", ck.beta_min}, {"beta_max", ck.beta_max}}},
      {"step", ck.step},
      {"optimizer", {{"kind", ck.optimizer}, {"steps", ck.optimizer_steps}}},
      {"config", ck.config},
      {"normalization", ck.normalization}}},
    {"tensors", entries},
    {"data_bytes", data.size()},
    {"data_fnv1a64", fnv1a64(data.data(), data.size())},
  };
  const std::string text = manifest.dump();

  std::string out(kMagic, 4);
  put_le(out, kCheckpointVersion, 2);
  put_le(out, text.size(), 4);
  out += text;
  out += data;
  return out;
}

Checkpoint parse_checkpoint(std::string_view bytes)
{
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorKind::kVersion, "checkpoint: bad magic bytes");
  }
  if (bytes.size() < kHeaderSize) {
    throw Error(ErrorKind::kTruncated, "checkpoint: header truncated");
  }
  const auto version = static_cast<std::uint16_t>(get_le(bytes, 4, 2));
  if (version != kCheckpointVersion) {
    throw Error(ErrorKind::kVersion, "checkpoint: unsupported version " + std::to_string(version));
  }
  const std::size_t manifest_len = get_le(bytes, 6, 4);
  if (bytes.size() < kHeaderSize + manifest_len) {
    throw Error(ErrorKind::kTruncated, "checkpoint: manifest truncated");
  }
  json manifest;
  try {
    manifest = json::parse(bytes.substr(kHeaderSize, manifest_len));
  } catch (const json::exception & e) {
    throw Error(ErrorKind::kIntegrity, std::string("checkpoint: manifest unreadable: ") + e.what());
  }
  const std::string_view data = bytes.substr(kHeaderSize + manifest_len);

  Checkpoint ck;
  try {
    const std::size_t declared = manifest.at("data_bytes").get<std::size_t>();
    if (data.size() < declared) {
      throw Error(ErrorKind::kTruncated, "checkpoint: data section holds " +
                                           std::to_string(data.size()) + " of " +
                                           std::to_string(declared) + " bytes");
    }
    if (data.size() > declared) {
      throw Error(ErrorKind::kIntegrity, "checkpoint: trailing bytes after data section");
    }
    if (manifest.at("data_fnv1a64").get<std::uint64_t>() != fnv1a64(data.data(), data.size())) {
      throw Error(ErrorKind::kIntegrity, "checkpoint: data checksum mismatch");
    }
    const json & meta = manifest.at("meta");
    ck.arch = nn::ArchConfig::from_json(meta.at("arch"));
    ck.diffusion_steps = meta.at("schedule").at("steps").get<int>();
    ck.beta_min = meta.at("schedule").at("beta_min").get<double>();
    ck.beta_max = meta.at("schedule").at("beta_max").get<double>();
    ck.step = meta.at("step").get<std::int64_t>();
    ck.optimizer = meta.at("optimizer").at("kind").get<std::string>();
    ck.optimizer_steps = meta.at("optimizer").at("steps").get<std::int64_t>();
    ck.config = meta.at("config");
    ck.normalization = meta.at("normalization");

    for (const json & e : manifest.at("tensors")) {
      Tensor t;
      t.name = e.at("name").get<std::string>();
      t.shape = e.at("shape").get<std::vector<int>>();
      if (e.at("dtype").get<std::string>() != "f32") {
        throw Error(ErrorKind::kIntegrity, "checkpoint: tensor '" + t.name + "' has unknown dtype");
      }
      const std::size_t offset = e.at("offset").get<std::size_t>();
      const std::size_t count = element_count(t.shape);
      if (offset > data.size() || count * 4 > data.size() - offset) {
        throw Error(ErrorKind::kIntegrity,
                    "checkpoint: tensor '" + t.name + "' extends past the end of the data");
      }
      t.data.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        t.data[i] = std::bit_cast<float>(static_cast<std::uint32_t>(get_le(data, offset + 4 * i, 4)));
      }
      const std::string group = e.at("group").get<std::string>();
      if (group == "param") {
        ck.parameters.push_back(std::move(t));
      } else if (group == "adam_m") {
        ck.adam_m.push_back(std::move(t));
      } else if (group == "adam_v") {
        ck.adam_v.push_back(std::move(t));
      } else {
        throw Error(ErrorKind::kIntegrity, "checkpoint: unknown tensor group '" + group + "'");
      }
    }
  } catch (const json::exception & e) {
    throw Error(ErrorKind::kIntegrity, std::string("checkpoint: manifest incomplete: ") + e.what());
  }
  return ck;
}

void save_checkpoint(const Checkpoint & ck, const std::filesystem::path & path)
{
  data::write_text_file(path, serialize_checkpoint(ck));
}

Checkpoint load_checkpoint(const std::filesystem::path & path)
{
  try {
    return parse_checkpoint(data::read_text_file(path));
  } catch (const Error & e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::vector<Tensor> tensors_from(const nn::ParameterSet<float> & params,
                                 const std::vector<nn::Matrix<float>> * values)
{
  std::vector<Tensor> out;
  out.reserve(static_cast<std::size_t>(params.size()));
  for (int i = 0; i < params.size(); ++i) {
    const auto & p = params[i];
    const auto & m = values ? (*values)[static_cast<std::size_t>(i)] : p.value;
    out.push_back({p.name, p.shape, std::vector<float>(m.data(), m.data() + m.size())});
  }
  return out;
}

namespace
{

void copy_checked(const Tensor & t, const nn::Parameter<float> & p, nn::Matrix<float> & dst)
{
  if (t.name != p.name) {
    throw Error(ErrorKind::kIntegrity,
                "checkpoint: expected tensor '" + p.name + "', found '" + t.name + "'");
  }
  if (t.shape != p.shape || static_cast<Eigen::Index>(t.data.size()) != p.value.size()) {
    throw Error(ErrorKind::kIntegrity, "checkpoint: tensor '" + t.name + "' has the wrong shape");
  }
  dst.resize(p.value.rows(), p.value.cols());
  std::copy(t.data.begin(), t.data.end(), dst.data());
}

}  // namespace

void tensors_into(const std::vector<Tensor> & tensors, nn::ParameterSet<float> & params)
{
  if (tensors.size() != static_cast<std::size_t>(params.size())) {
    throw Error(ErrorKind::kIntegrity, "checkpoint: parameter count does not match architecture");
  }
  for (int i = 0; i < params.size(); ++i) {
    copy_checked(tensors[static_cast<std::size_t>(i)], params[i], params[i].value);
  }
}

void tensors_into(const std::vector<Tensor> & tensors, const nn::ParameterSet<float> & params,
                  std::vector<nn::Matrix<float>> & values)
{
  if (tensors.size() != static_cast<std::size_t>(params.size())) {
    throw Error(ErrorKind::kIntegrity, "checkpoint: optimizer state does not match architecture");
  }
  values.resize(tensors.size());
  for (int i = 0; i < params.size(); ++i) {
    copy_checked(tensors[static_cast<std::size_t>(i)], params[i], values[static_cast<std::size_t>(i)]);
  }
}

nn::RoadUNet<float> model_from_checkpoint(const Checkpoint & ck)
{
  nn::RoadUNet<float> model(ck.arch);
  tensors_into(ck.parameters, model.parameters());
  return model;
}

}  // namespace diffroad::train
