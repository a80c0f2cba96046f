// Copyright 2026 The densecue Authors
// SPDX-License-Identifier: Apache-2.0

#include "densecue/diffusion_loss.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "densecue/error.hpp"
#include "densecue/rope_math.hpp"
#include "densecue/sim.hpp"

namespace densecue::diffusion {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "prediction and noise shapes differ");
  }
}

double mse(const Matrix& pred, const Matrix& target) {
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred.data()[i] - target.data()[i];
    acc += d * d;
  }
  return pred.size() == 0 ? 0.0 : acc / static_cast<double>(pred.size());
}

Matrix slice_rows(const Matrix& m, std::size_t begin, std::size_t count) {
  Matrix out(count, m.cols());
  for (std::size_t r = 0; r < count; ++r) {
    const auto src = m.row(begin + r);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

}  // namespace

LossParts joint_loss_parts(const Matrix& eps_hat_rgb, const Matrix& eps_hat_aux, const Matrix& eps,
                           double lambda_aux) {
  require_same_shape(eps_hat_rgb, eps);
  require_same_shape(eps_hat_aux, eps);
  if (!(lambda_aux >= 0.0)) throw Error(ErrorCode::kOutOfRange, "lambda_aux must be nonnegative");
  LossParts parts;
  parts.rgb = mse(eps_hat_rgb, eps);
  parts.aux = mse(eps_hat_aux, eps);
  parts.total = parts.rgb + lambda_aux * parts.aux;
  return parts;
}

double joint_loss(const Matrix& eps_hat_rgb, const Matrix& eps_hat_aux, const Matrix& eps,
                  double lambda_aux) {
  return joint_loss_parts(eps_hat_rgb, eps_hat_aux, eps, lambda_aux).total;
}

LinearSchedule::LinearSchedule(std::size_t steps) : steps_(steps) {
  if (steps < 2) throw Error(ErrorCode::kBadStep, "schedule needs at least two steps");
}

double LinearSchedule::alpha_bar(std::size_t t) const {
  if (t >= steps_) {
    throw Error(ErrorCode::kBadStep, "step " + std::to_string(t) + " outside schedule of " +
                                         std::to_string(steps_));
  }
  return 1.0 - static_cast<double>(t) / static_cast<double>(steps_ - 1);
}

NoisySample noise_with(const Matrix& x0, const Matrix& eps, std::size_t t,
                       const LinearSchedule& schedule) {
  require_same_shape(x0, eps);
  NoisySample s;
  s.t = t;
  s.alpha_bar = schedule.alpha_bar(t);
  s.eps = eps;
  s.x_t = Matrix(x0.rows(), x0.cols());
  const double a = std::sqrt(s.alpha_bar);
  const double b = std::sqrt(1.0 - s.alpha_bar);
  for (std::size_t i = 0; i < x0.size(); ++i) s.x_t.data()[i] = a * x0.data()[i] + b * eps.data()[i];
  return s;
}

NoisySample noise_sample(const Matrix& x0, std::size_t t, const LinearSchedule& schedule,
                         std::uint64_t seed) {
  schedule.alpha_bar(t);
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix eps(x0.rows(), x0.cols());
  for (double& e : eps.data()) e = normal(engine);
  return noise_with(x0, eps, t, schedule);
}

ToyModel ToyModel::init(std::size_t width, std::size_t cue_channels, std::size_t heads,
                        std::size_t out_channels, std::uint64_t seed) {
  return {attention::BlockParams::init(width, cue_channels, heads, seed), Matrix(width, out_channels),
          Matrix(width, out_channels)};
}

ToyModel ToyModel::zeros_like(const ToyModel& o) {
  return {attention::BlockParams::zeros_like(o.block), Matrix(o.head_rgb.rows(), o.head_rgb.cols()),
          Matrix(o.head_aux.rows(), o.head_aux.cols())};
}

void ToyModel::for_each(const std::function<void(std::string_view, std::span<double>)>& fn) {
  block.for_each(fn);
  fn("head_rgb", head_rgb.data());
  fn("head_aux", head_aux.data());
}

Prediction predict(const ToyModel& model, const attention::TokenSequence& seq) {
  Prediction p;
  p.fwd = attention::attention_forward(seq, model.block);
  p.eps_hat_rgb = matmul(slice_rows(p.fwd.out, seq.rgb_offset(), seq.video_count()), model.head_rgb);
  p.eps_hat_aux = matmul(slice_rows(p.fwd.out, seq.aux_offset(), seq.video_count()), model.head_aux);
  return p;
}

LossParts evaluate(const ToyModel& model, const ToyExample& ex, double lambda_aux) {
  const Prediction p = predict(model, ex.seq);
  return joint_loss_parts(p.eps_hat_rgb, p.eps_hat_aux, ex.eps, lambda_aux);
}

LossAndGrad loss_and_grad(const ToyModel& model, const ToyExample& ex, double lambda_aux) {
  const Prediction p = predict(model, ex.seq);
  LossAndGrad out{joint_loss_parts(p.eps_hat_rgb, p.eps_hat_aux, ex.eps, lambda_aux),
                  ToyModel::zeros_like(model)};

  const double count = static_cast<double>(ex.eps.size());
  Matrix d_rgb(ex.eps.rows(), ex.eps.cols());
  Matrix d_aux(ex.eps.rows(), ex.eps.cols());
  for (std::size_t i = 0; i < ex.eps.size(); ++i) {
    d_rgb.data()[i] = 2.0 * (p.eps_hat_rgb.data()[i] - ex.eps.data()[i]) / count;
    d_aux.data()[i] = lambda_aux * 2.0 * (p.eps_hat_aux.data()[i] - ex.eps.data()[i]) / count;
  }

  const std::size_t L = ex.seq.video_count();
  out.grad.head_rgb = matmul_tn(slice_rows(p.fwd.out, ex.seq.rgb_offset(), L), d_rgb);
  out.grad.head_aux = matmul_tn(slice_rows(p.fwd.out, ex.seq.aux_offset(), L), d_aux);

  Matrix upstream(p.fwd.out.rows(), p.fwd.out.cols());
  const Matrix up_rgb = matmul_nt(d_rgb, model.head_rgb);
  const Matrix up_aux = matmul_nt(d_aux, model.head_aux);
  for (std::size_t r = 0; r < L; ++r) {
    std::copy(up_rgb.row(r).begin(), up_rgb.row(r).end(), upstream.row(ex.seq.rgb_offset() + r).begin());
    std::copy(up_aux.row(r).begin(), up_aux.row(r).end(), upstream.row(ex.seq.aux_offset() + r).begin());
  }
  out.grad.block = attention::attention_backward(ex.seq, model.block, p.fwd, upstream).params;
  return out;
}

namespace {

/// Patchify a single-channel image into n x patch^2 tokens (pixel order
/// row-major inside each patch), mapping [0, 1] to [-1, 1].
template <class T>
Matrix image_tokens(const Grid<T>& image, std::size_t patch, double scale) {
  const std::size_t th = static_cast<std::size_t>(image.height()) / patch;
  const std::size_t tw = static_cast<std::size_t>(image.width()) / patch;
  Matrix out(th * tw, patch * patch);
  for (std::size_t ty = 0; ty < th; ++ty) {
    for (std::size_t tx = 0; tx < tw; ++tx) {
      for (std::size_t y = 0; y < patch; ++y) {
        for (std::size_t x = 0; x < patch; ++x) {
          const double v = static_cast<double>(image(static_cast<int>(tx * patch + x),
                                                     static_cast<int>(ty * patch + y))) * scale;
          out(ty * tw + tx, y * patch + x) = 2.0 * v - 1.0;
        }
      }
    }
  }
  return out;
}

}  // namespace

std::vector<ToyExample> make_toy_dataset(const TrainConfig& config) {
  const std::size_t patch = config.patch;
  const int size = config.frame_size;
  if (patch == 0 || size <= 0 || static_cast<std::size_t>(size) % patch != 0) {
    throw Error(ErrorCode::kShapeMismatch, "frame size must be a multiple of the patch size");
  }
  const std::size_t width = patch * patch;
  const std::size_t grid = static_cast<std::size_t>(size) / patch;
  const std::size_t n = grid * grid;
  const LinearSchedule schedule;

  std::vector<rope::RotaryCode> first_frame;
  std::vector<rope::RotaryCode> target_frame;
  for (std::size_t i = 0; i < n; ++i) {
    const int h = static_cast<int>(i / grid);
    const int w = static_cast<int>(i % grid);
    first_frame.push_back(rope::grid_to_angles({0, h, w}, width / config.heads));
    target_frame.push_back(rope::grid_to_angles({1, h, w}, width / config.heads));
  }
  const dense_rope::RopeBank bank = dense_rope::RopeBank::from_codes(first_frame);
  const Matrix identity_proj = Matrix::identity(cue::CueField::kChannels);

  std::mt19937_64 engine(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_t(1, schedule.size() - 2);
  Matrix prompt(1, width);
  for (double& x : prompt.data()) x = normal(engine);

  std::vector<ToyExample> data;
  for (std::size_t k = 0; k < config.clips; ++k) {
    const std::size_t balls = 1 + k % 2;
    const sim::Scene scene = sim::random_scene(size, size, balls, config.seed * 1000003 + k, 2);
    const sim::Clip clip = sim::render_clip(scene);
    const cue::CueField cue = sim::derive_training_cues(clip, 0, config.speed_norm);

    dense_rope::FeatureBatch features(1, cue::CueField::kChannels, static_cast<std::size_t>(size),
                                      static_cast<std::size_t>(size));
    InstanceMask token_mask(static_cast<int>(grid), static_cast<int>(grid));
    const Grid<float>* planes[] = {&cue.u, &cue.v, &cue.dz, &cue.mass};
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        for (std::size_t c = 0; c < 4; ++c) {
          features.at(0, c, static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = (*planes[c])(x, y);
        }
        if (cue.mass(x, y) > 0.0f) {
          token_mask(x / static_cast<int>(patch), y / static_cast<int>(patch)) = 1;
        }
      }
    }
    const auto prepared = dense_rope::prepare_motion_tokens({token_mask}, features, config.budget, bank,
                                                            identity_proj, config.seed + k, 1.0, config.mode);
    std::vector<rope::RotaryCode> motion_codes;
    for (std::size_t idx : prepared.motion.indices[0].indices) motion_codes.push_back(first_frame[idx]);

    const std::size_t t = pick_t(engine);
    Matrix eps(n, width);
    for (double& e : eps.data()) e = normal(engine);
    const NoisySample rgb = noise_with(image_tokens(clip.frames[1], patch, 1.0 / 255.0), eps, t, schedule);
    const NoisySample aux = noise_with(image_tokens(clip.depth[1], patch, 1.0), eps, t, schedule);

    Matrix text(2, width);
    const auto time_code = rope::absolute_pe(static_cast<double>(t), width);
    std::copy(time_code.begin(), time_code.end(), text.row(0).begin());
    std::copy(prompt.row(0).begin(), prompt.row(0).end(), text.row(1).begin());

    data.push_back({attention::build_sequence(std::move(text), rgb.x_t, aux.x_t,
                                              prepared.motion.gathered_features[0], target_frame,
                                              std::move(motion_codes)),
                    eps});
  }
  return data;
}

std::vector<TraceRow> train(ToyModel& model, const std::vector<ToyExample>& data, std::size_t steps,
                            double learning_rate, double lambda_aux) {
  if (data.empty()) throw Error(ErrorCode::kOutOfRange, "training needs at least one example");
  std::vector<TraceRow> trace;
  const double inv = 1.0 / static_cast<double>(data.size());
  for (std::size_t step = 0; step <= steps; ++step) {
    TraceRow row{step, 0.0, 0.0, 0.0};
    ToyModel grad = ToyModel::zeros_like(model);
    std::vector<std::span<double>> acc;
    grad.for_each([&](std::string_view, std::span<double> s) { acc.push_back(s); });
    for (const auto& ex : data) {
      LossAndGrad lg = loss_and_grad(model, ex, lambda_aux);
      row.rgb += lg.loss.rgb * inv;
      row.aux += lg.loss.aux * inv;
      row.total += lg.loss.total * inv;
      std::size_t k = 0;
      lg.grad.for_each([&](std::string_view, std::span<double> s) {
        for (std::size_t i = 0; i < s.size(); ++i) acc[k][i] += s[i] * inv;
        ++k;
      });
    }
    if (!std::isfinite(row.total)) {
      throw Error(ErrorCode::kNonFiniteLoss, "loss diverged at step " + std::to_string(step));
    }
    trace.push_back(row);
    if (step == steps) break;
    std::size_t k = 0;
    model.for_each([&](std::string_view, std::span<double> s) {
      for (std::size_t i = 0; i < s.size(); ++i) s[i] -= learning_rate * acc[k][i];
      ++k;
    });
  }
  return trace;
}

std::vector<TraceRow> train_toy(const TrainConfig& config) {
  const auto data = make_toy_dataset(config);
  const std::size_t width = config.patch * config.patch;
  ToyModel model = ToyModel::init(width, cue::CueField::kChannels, config.heads, width, config.seed);
  return train(model, data, config.steps, config.learning_rate, config.lambda_aux);
}

std::string trace_to_csv(const std::vector<TraceRow>& trace) {
  std::string out = "step,rgb_loss,aux_loss,total\n";
  char buf[128];
  for (const auto& r : trace) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", r.step, r.rgb, r.aux, r.total);
    out += buf;
  }
  return out;
}

}  // namespace densecue::diffusion
