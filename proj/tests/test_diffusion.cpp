// Copyright 2026 The densecue Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "densecue/diffusion_loss.hpp"
#include "densecue/error.hpp"
#include "fixtures.hpp"

using namespace densecue;
using namespace densecue::diffusion;

TEST_CASE("joint loss") {
  std::mt19937_64 g(1);
  const Matrix eps = fixture::random_matrix(4, 3, g);
  CHECK(joint_loss(eps, eps, eps, 1.0) == 0.0);
  Matrix off = eps;
  for (double& v : off.data()) v += 1.0;
  CHECK(joint_loss(off, eps, eps, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
  const Matrix other = fixture::random_matrix(4, 3, g);
  const auto parts = joint_loss_parts(other, off, eps, 0.0);
  CHECK(parts.total == parts.rgb);
  double prev = -1;
  for (double lambda : {0.0, 0.5, 1.0, 2.0}) {
    const double l = joint_loss(other, off, eps, lambda);
    CHECK(l > prev);
    prev = l;
  }
  try {
    joint_loss(Matrix(2, 3), eps, eps, 1.0);
    FAIL("shape accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kShapeMismatch);
  }
}

TEST_CASE("noise sampling") {
  std::mt19937_64 g(2);
  const Matrix x0 = fixture::random_matrix(5, 2, g);
  const LinearSchedule sched;
  CHECK(sched.alpha_bar(0) == 1.0);
  CHECK(sched.alpha_bar(49) == 0.0);
  CHECK(noise_sample(x0, 0, sched, 7).x_t == x0);
  const auto end = noise_sample(x0, 49, sched, 7);
  CHECK(end.x_t == end.eps);
  const auto mid = noise_sample(x0, 20, sched, 7);
  const double a = std::sqrt(mid.alpha_bar), b = std::sqrt(1 - mid.alpha_bar);
  for (std::size_t i = 0; i < x0.size(); ++i)
    CHECK(std::abs((mid.x_t.data()[i] - b * mid.eps.data()[i]) / a - x0.data()[i]) < 1e-10);
  CHECK(noise_sample(x0, 20, sched, 7).eps == mid.eps);
  try {
    noise_sample(x0, 50, sched, 0);
    FAIL("step accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBadStep);
  }
}

TEST_CASE("toy training") {
  TrainConfig cfg;
  cfg.clips = 2;
  cfg.frame_size = 16;
  cfg.steps = 4;
  cfg.learning_rate = 0.0;
  const auto flat = train_toy(cfg);
  CHECK(flat.size() == 5);
  for (const auto& row : flat) CHECK(row.total == flat.front().total);

  cfg.learning_rate = 0.5;
  const auto a = train_toy(cfg);
  const auto b = train_toy(cfg);
  CHECK(trace_to_csv(a) == trace_to_csv(b));
  CHECK(a.back().total < a.front().total);
  CHECK(trace_to_csv(a).rfind("step,rgb_loss,aux_loss,total\n", 0) == 0);
}
