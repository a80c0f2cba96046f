// Copyright 2026 The densecue Authors
// SPDX-License-Identifier: Apache-2.0
//
// Joint RGB + auxiliary epsilon-prediction objective, a linear forward
// noising schedule and a small deterministic training loop over simulated
// clips.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "densecue/dense_rope.hpp"
#include "densecue/joint_attention.hpp"
#include "densecue/matrix.hpp"

namespace densecue::diffusion {

inline constexpr double kDefaultLambdaAux = 1.0;
inline constexpr std::size_t kDefaultScheduleSteps = 50;

struct LossParts {
  double rgb = 0.0;
  double aux = 0.0;
  double total = 0.0;
};

/// mean((rgb - eps)^2) + lambda_aux * mean((aux - eps)^2)
LossParts joint_loss_parts(const Matrix& eps_hat_rgb, const Matrix& eps_hat_aux, const Matrix& eps,
                           double lambda_aux);
double joint_loss(const Matrix& eps_hat_rgb, const Matrix& eps_hat_aux, const Matrix& eps,
                  double lambda_aux);

/// alpha_bar(t) = 1 - t / (steps - 1), so step 0 is clean and the last
/// step is pure noise.
class LinearSchedule {
 public:
  explicit LinearSchedule(std::size_t steps = kDefaultScheduleSteps);
  std::size_t size() const noexcept { return steps_; }
  double alpha_bar(std::size_t t) const;

 private:
  std::size_t steps_;
};

struct NoisySample {
  Matrix x_t;
  Matrix eps;
  std::size_t t = 0;
  double alpha_bar = 1.0;
};

/// x_t = sqrt(alpha_bar) x0 + sqrt(1 - alpha_bar) eps with eps ~ N(0, 1)
/// drawn from std::mt19937_64(seed).
NoisySample noise_sample(const Matrix& x0, std::size_t t, const LinearSchedule& schedule,
                         std::uint64_t seed);
/// Same, with caller-provided noise.
NoisySample noise_with(const Matrix& x0, const Matrix& eps, std::size_t t,
                       const LinearSchedule& schedule);

/// Attention block plus linear epsilon heads for the rgb and aux streams.
struct ToyModel {
  attention::BlockParams block;
  Matrix head_rgb;  ///< d x c
  Matrix head_aux;  ///< d x c

  /// Block as in BlockParams::init, heads zero.
  static ToyModel init(std::size_t width, std::size_t cue_channels, std::size_t heads,
                       std::size_t out_channels, std::uint64_t seed);
  static ToyModel zeros_like(const ToyModel& other);
  void for_each(const std::function<void(std::string_view, std::span<double>)>& fn);
};

/// One training example: a token sequence whose rgb/aux rows are already
/// noised, and the shared noise both heads must predict.
struct ToyExample {
  attention::TokenSequence seq;
  Matrix eps;
};

struct Prediction {
  attention::ForwardResult fwd;
  Matrix eps_hat_rgb;
  Matrix eps_hat_aux;
};

Prediction predict(const ToyModel& model, const attention::TokenSequence& seq);
LossParts evaluate(const ToyModel& model, const ToyExample& ex, double lambda_aux);

struct LossAndGrad {
  LossParts loss;
  ToyModel grad;
};
LossAndGrad loss_and_grad(const ToyModel& model, const ToyExample& ex, double lambda_aux);

struct TrainConfig {
  std::size_t steps = 200;
  double learning_rate = 0.5;
  double lambda_aux = kDefaultLambdaAux;
  std::uint64_t seed = 0;
  std::size_t clips = 16;
  int frame_size = 32;
  std::size_t patch = 4;
  std::size_t budget = 8;
  dense_rope::SmallSetMode mode = dense_rope::SmallSetMode::kTile;
  std::size_t heads = 1;
  double speed_norm = 1.0;
};

/// Simulated clips turned into fixed noised examples. Token width is
/// patch^2; the cue branch is the derived training cue of frame 0, thinned
/// to the token budget; rgb/aux targets are frame 1 and its depth map.
std::vector<ToyExample> make_toy_dataset(const TrainConfig& config);

struct TraceRow {
  std::size_t step = 0;
  double rgb = 0.0;
  double aux = 0.0;
  double total = 0.0;
};

/// Full-batch gradient descent. Row k is the loss before update k; the
/// last row (k = steps) is the loss after training.
std::vector<TraceRow> train(ToyModel& model, const std::vector<ToyExample>& data, std::size_t steps,
                            double learning_rate, double lambda_aux);

/// Builds the dataset and model from the config and trains.
std::vector<TraceRow> train_toy(const TrainConfig& config);

std::string trace_to_csv(const std::vector<TraceRow>& trace);

}  // namespace densecue::diffusion
