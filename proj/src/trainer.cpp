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

#include "diffroad/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include "diffroad/error.hpp"
#include "diffroad/loss.hpp"
#include "diffroad/rng.hpp"

namespace diffroad::train
{

using nlohmann::json;
using Mat = nn::Matrix<float>;

void TrainingConfig::validate() const
{
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorKind::kConfig, "training: learning_rate must be > 0");
  }
  if (batch_size < 1) {
    throw Error(ErrorKind::kConfig, "training: batch_size must be >= 1");
  }
  if (!(omega >= 0.0)) {
    throw Error(ErrorKind::kConfig, "training: omega must be >= 0");
  }
  if (max_steps < 0 || checkpoint_interval < 0) {
    throw Error(ErrorKind::kConfig, "training: step counts must be non-negative");
  }
  if (!(condition_dropout >= 0.0 && condition_dropout < 1.0)) {
    throw Error(ErrorKind::kConfig, "training: condition_dropout must be in [0, 1)");
  }
  parse_optimizer_kind(optimizer);
  if (lr_schedule != "constant" && lr_schedule != "cosine") {
    throw Error(ErrorKind::kConfig, "training: lr_schedule must be 'constant' or 'cosine'");
  }
  diffusion::build_schedule(diffusion_steps, beta_min, beta_max);
}

json TrainingConfig::to_json() const
{
  return {{"learning_rate", learning_rate},
          {"batch_size", batch_size},
          {"omega", omega},
          {"T", diffusion_steps},
          {"beta_min", beta_min},
          {"beta_max", beta_max},
          {"max_steps", max_steps},
          {"seed", seed},
          {"condition_dropout", condition_dropout},
          {"optimizer", optimizer},
          {"lr_schedule", lr_schedule},
          {"grad_clip", grad_clip},
          {"checkpoint_interval", checkpoint_interval}};
}

TrainingConfig TrainingConfig::from_json(const json & j)
{
  TrainingConfig c;
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.omega = j.value("omega", c.omega);
  c.diffusion_steps = j.value("T", c.diffusion_steps);
  c.beta_min = j.value("beta_min", c.beta_min);
  c.beta_max = j.value("beta_max", c.beta_max);
  c.max_steps = j.value("max_steps", c.max_steps);
  c.seed = j.value("seed", c.seed);
  c.condition_dropout = j.value("condition_dropout", c.condition_dropout);
  c.optimizer = j.value("optimizer", c.optimizer);
  c.lr_schedule = j.value("lr_schedule", c.lr_schedule);
  c.grad_clip = j.value("grad_clip", c.grad_clip);
  c.checkpoint_interval = j.value("checkpoint_interval", c.checkpoint_interval);
  return c;
}

Mat to_network_layout(const RoadScenario & s)
{
  Mat x(static_cast<Eigen::Index>(2 * s.n), static_cast<Eigen::Index>(s.k));
  for (std::size_t r = 0; r < s.n; ++r) {
    for (std::size_t p = 0; p < s.k; ++p) {
      const Vec2 v = s.at(r, p);
      x(static_cast<Eigen::Index>(2 * r), static_cast<Eigen::Index>(p)) = static_cast<float>(v.x);
      x(static_cast<Eigen::Index>(2 * r + 1), static_cast<Eigen::Index>(p)) = static_cast<float>(v.y);
    }
  }
  return x;
}

void from_network_layout(const Mat & x, RoadScenario & s)
{
  if (x.rows() != static_cast<Eigen::Index>(2 * s.n) || x.cols() != static_cast<Eigen::Index>(s.k)) {
    throw Error(ErrorKind::kInvalidArgument, "network layout does not match scenario size");
  }
  for (std::size_t r = 0; r < s.n; ++r) {
    for (std::size_t p = 0; p < s.k; ++p) {
      s.set(r, p, {x(static_cast<Eigen::Index>(2 * r), static_cast<Eigen::Index>(p)),
                   x(static_cast<Eigen::Index>(2 * r + 1), static_cast<Eigen::Index>(p))});
    }
  }
}

std::vector<Example> make_examples(const std::vector<data::LibraryRecord> & records,
                                   const nn::ArchConfig & arch)
{
  if (records.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "training: dataset is empty");
  }
  std::vector<Example> out;
  for (const auto & rec : records) {
    const RoadScenario & s = rec.scenario;
    if (static_cast<int>(s.n) != arch.roads || static_cast<int>(s.k) != arch.points) {
      throw Error(ErrorKind::kConfig, "training: scenario '" + s.id + "' is " + std::to_string(s.n) +
                                        "x" + std::to_string(s.k) + " but the model expects " +
                                        std::to_string(arch.roads) + "x" +
                                        std::to_string(arch.points));
    }
    if (s.valid_count() == 0) {
      continue;
    }
    Example e;
    e.x0 = to_network_layout(s);
    e.valid = s.valid;
    e.condition = s.condition.flatten();
    out.push_back(std::move(e));
  }
  if (out.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "training: every scenario is fully masked");
  }
  return out;
}

namespace
{

Mat normal_matrix(Eigen::Index rows, Eigen::Index cols, RandomStream & rng)
{
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = static_cast<float>(rng.normal());
  }
  return m;
}

Mat noised(const Mat & x0, int t, const Mat & eps, const diffusion::NoiseSchedule & sched)
{
  const double ab = sched.alpha_bar_at(t);
  return static_cast<float>(std::sqrt(ab)) * x0 + static_cast<float>(std::sqrt(1.0 - ab)) * eps;
}

struct Draw
{
  std::size_t example;
  int t;
  Mat eps;
  bool drop_condition;
};

// Gradient work is split into a fixed number of chunks independent of the
// thread count, and chunk sums are reduced in order.
constexpr int kChunks = 4;

}  // namespace

double scheduled_learning_rate(const TrainingConfig & config, std::int64_t step)
{
  if (config.lr_schedule != "cosine" || config.max_steps <= 0) {
    return config.learning_rate;
  }
  const double u = std::clamp(static_cast<double>(step - 1) / config.max_steps, 0.0, 1.0);
  return 0.5 * config.learning_rate * (1.0 + std::cos(std::numbers::pi * u));
}

std::vector<EvalItem> make_eval_set(const std::vector<Example> & examples, int diffusion_steps,
                                    int per_example, std::uint64_t seed)
{
  std::vector<EvalItem> items;
  for (std::size_t e = 0; e < examples.size(); ++e) {
    for (int i = 0; i < per_example; ++i) {
      RandomStream rng(seed, 0xe7a1, e * 1000003u + static_cast<std::uint64_t>(i));
      // stratified over t so every eval set covers the whole chain
      const double u = (i + rng.uniform()) / per_example;
      const int t = std::clamp(1 + static_cast<int>(u * diffusion_steps), 1, diffusion_steps);
      items.push_back({e, t, normal_matrix(examples[e].x0.rows(), examples[e].x0.cols(), rng)});
    }
  }
  return items;
}

Trainer::Trainer(nn::ArchConfig arch, TrainingConfig config, std::vector<Example> examples, int jobs)
: model_((arch.validate(), arch)),
  config_((config.validate(), std::move(config))),
  examples_(std::move(examples)),
  jobs_(std::max(1, jobs)),
  schedule_(diffusion::build_schedule(config_.diffusion_steps, config_.beta_min, config_.beta_max)),
  optimizer_(parse_optimizer_kind(config_.optimizer), config_.learning_rate, model_.parameters())
{
  if (examples_.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "training: dataset is empty");
  }
  model_.initialize(config_.seed);
}

Trainer::Trainer(const Checkpoint & resume, TrainingConfig config, std::vector<Example> examples,
                 int jobs)
: Trainer(resume.arch, std::move(config), std::move(examples), jobs)
{
  tensors_into(resume.parameters, model_.parameters());
  if (optimizer_.kind() == OptimizerKind::kAdam && !resume.adam_m.empty()) {
    tensors_into(resume.adam_m, model_.parameters(), optimizer_.first_moment());
    tensors_into(resume.adam_v, model_.parameters(), optimizer_.second_moment());
  }
  optimizer_.set_steps_taken(resume.optimizer_steps);
  step_ = resume.step;
}

StepStats Trainer::step()
{
  const std::int64_t step_index = step_ + 1;
  const int batch = config_.batch_size;
  std::vector<Draw> draws;
  draws.reserve(static_cast<std::size_t>(batch));
  std::size_t squared_count = 0;
  std::size_t smooth_count = 0;
  for (int i = 0; i < batch; ++i) {
    RandomStream rng(config_.seed, static_cast<std::uint64_t>(step_index), static_cast<std::uint64_t>(i));
    Draw d;
    d.example = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(examples_.size()) - 1));
    d.t = static_cast<int>(rng.uniform_int(1, schedule_.steps));
    d.drop_condition = rng.uniform() < config_.condition_dropout;
    const Example & ex = examples_[d.example];
    d.eps = normal_matrix(ex.x0.rows(), ex.x0.cols(), rng);
    const auto roads = static_cast<std::size_t>(std::count(ex.valid.begin(), ex.valid.end(), true));
    squared_count += roads * 2 * static_cast<std::size_t>(ex.x0.cols());
    smooth_count += roads * static_cast<std::size_t>(ex.x0.cols() - 1);
    draws.push_back(std::move(d));
  }
  const double mse_scale = 1.0 / static_cast<double>(squared_count);
  const double smooth_scale = config_.omega / static_cast<double>(smooth_count);

  const int chunks = std::min(kChunks, batch);
  std::vector<std::vector<Mat>> chunk_grads(static_cast<std::size_t>(chunks));
  std::vector<LossSums> chunk_sums(static_cast<std::size_t>(chunks));
  const auto run_chunk = [&](int c) {
    auto & grads = chunk_grads[static_cast<std::size_t>(c)];
    grads = model_.parameters().zeros_like();
    LossSums sums;
    const std::array<double, ConditionVector::kSize> null_condition{};
    for (int i = c; i < batch; i += chunks) {
      const Draw & d = draws[static_cast<std::size_t>(i)];
      const Example & ex = examples_[d.example];
      const Mat xt = noised(ex.x0, d.t, d.eps, schedule_);
      const auto & cond = d.drop_condition ? null_condition : ex.condition;
      nn::Tape<float> tape(model_.parameters(), &grads);
      const auto out = model_.forward(tape, xt, d.t, cond);
      const Mat & eps_hat = tape.value(out);
      sums += loss_sums<float>(d.eps, eps_hat, ex.valid);
      Mat seed = Mat::Zero(eps_hat.rows(), eps_hat.cols());
      loss_gradient<float>(d.eps, eps_hat, ex.valid, mse_scale, smooth_scale, seed);
      tape.backward(out, seed);
    }
    chunk_sums[static_cast<std::size_t>(c)] = sums;
  };

  const int workers = std::min(jobs_, chunks);
  if (workers <= 1) {
    for (int c = 0; c < chunks; ++c) {
      run_chunk(c);
    }
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (int c = w; c < chunks; c += workers) {
            run_chunk(c);
          }
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
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
  }

  auto & grads = chunk_grads[0];
  LossSums sums = chunk_sums[0];
  for (int c = 1; c < chunks; ++c) {
    for (std::size_t p = 0; p < grads.size(); ++p) {
      grads[p] += chunk_grads[static_cast<std::size_t>(c)][p];
    }
    sums += chunk_sums[static_cast<std::size_t>(c)];
  }

  StepStats stats;
  stats.step = step_index;
  stats.mse = sums.mse();
  stats.smooth = sums.smoothness();
  stats.total = stats.mse + config_.omega * stats.smooth;
  if (!std::isfinite(stats.total)) {
    throw Error(ErrorKind::kNumeric, "training step " + std::to_string(step_index) +
                                       ": non-finite loss; parameter norms: " + parameter_norms());
  }
  stats.grad_norm = clip_global_norm(grads, config_.grad_clip);
  if (!std::isfinite(stats.grad_norm)) {
    throw Error(ErrorKind::kNumeric, "training step " + std::to_string(step_index) +
                                       ": non-finite gradient; parameter norms: " + parameter_norms());
  }
  optimizer_.set_learning_rate(scheduled_learning_rate(config_, step_index));
  optimizer_.step(model_.parameters(), grads);
  step_ = step_index;
  return stats;
}

double Trainer::evaluate(const std::vector<EvalItem> & items) const
{
  LossSums sums;
  for (const auto & item : items) {
    const Example & ex = examples_.at(item.example);
    const Mat xt = noised(ex.x0, item.t, item.eps, schedule_);
    sums += loss_sums<float>(item.eps, model_.predict_noise(xt, item.t, ex.condition), ex.valid);
  }
  return sums.total(config_.omega);
}

std::string Trainer::parameter_norms() const
{
  std::ostringstream out;
  bool first = true;
  for (const auto & p : model_.parameters()) {
    out << (first ? "" : ", ") << p.name << "=" << p.value.template cast<double>().norm();
    first = false;
  }
  return out.str();
}

Checkpoint Trainer::checkpoint(const json & normalization) const
{
  Checkpoint ck;
  ck.arch = model_.arch();
  ck.diffusion_steps = config_.diffusion_steps;
  ck.beta_min = config_.beta_min;
  ck.beta_max = config_.beta_max;
  ck.step = step_;
  ck.optimizer = config_.optimizer;
  ck.optimizer_steps = optimizer_.steps_taken();
  ck.config = config_.to_json();
  ck.normalization = normalization;
  ck.parameters = tensors_from(model_.parameters());
  if (optimizer_.kind() == OptimizerKind::kAdam) {
    ck.adam_m = tensors_from(model_.parameters(), &optimizer_.first_moment());
    ck.adam_v = tensors_from(model_.parameters(), &optimizer_.second_moment());
  }
  return ck;
}

Checkpoint train(Trainer & trainer, const TrainCallbacks & callbacks, const json & normalization)
{
  const TrainingConfig & cfg = trainer.config();
  while (trainer.current_step() < cfg.max_steps) {
    const StepStats stats = trainer.step();
    if (callbacks.on_step) {
      callbacks.on_step(stats);
    }
    if (cfg.checkpoint_interval > 0 && stats.step % cfg.checkpoint_interval == 0 &&
        stats.step < cfg.max_steps && callbacks.on_checkpoint) {
      callbacks.on_checkpoint(trainer.checkpoint(normalization));
    }
  }
  Checkpoint final_ck = trainer.checkpoint(normalization);
  if (callbacks.on_checkpoint) {
    callbacks.on_checkpoint(final_ck);
  }
  return final_ck;
}

LossTrace::LossTrace(const std::filesystem::path & path) : path_(path)
{
  if (path_.has_parent_path()) {
    std::filesystem::create_directories(path_.parent_path());
  }
  if (!std::filesystem::exists(path_) || std::filesystem::file_size(path_) == 0) {
    std::ofstream out(path_, std::ios::binary);
    if (!out) {
      throw Error(ErrorKind::kIo, "cannot create loss trace " + path_.string());
    }
    out << "step,L_mse,L_s,L\n";
  }
}

void LossTrace::append(const StepStats & s)
{
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) {
    throw Error(ErrorKind::kIo, "cannot append to loss trace " + path_.string());
  }
  char line[160];
  std::snprintf(line, sizeof(line), "%lld,%.9g,%.9g,%.9g\n", static_cast<long long>(s.step), s.mse,
                s.smooth, s.total);
  out << line;
}

}  // namespace diffroad::train
