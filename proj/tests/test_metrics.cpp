// Copyright 2026 The densecue Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <limits>

#include "densecue/error.hpp"
#include "densecue/metrics.hpp"
#include "densecue/sim.hpp"

using namespace densecue;
using namespace densecue::metrics;

namespace {

Frames moving_square(int x0, int y0, int dx, int frames, int size = 32) {
  Frames out;
  for (int f = 0; f < frames; ++f) {
    Grid<std::uint8_t> g(size, size, 10);
    for (int y = y0; y < y0 + 4; ++y)
      for (int x = x0 + f * dx; x < x0 + f * dx + 4; ++x) g(x, y) = 200;
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace

TEST_CASE("static clip has empty masks") {
  const Frames still = moving_square(4, 4, 0, 3);
  const auto m = motion_masks(still);
  CHECK(m.per_frame.size() == 2);
  for (std::size_t p = 0; p < m.spatial.size(); ++p) {
    CHECK(m.spatial[p] == 0);
    CHECK(m.magnitude[p] == 0.0);
  }
  CHECK_THROWS_AS(motion_masks(Frames(1, Grid<std::uint8_t>(4, 4))), Error);
}

TEST_CASE("infinite threshold gives empty masks") {
  const auto m = motion_masks(moving_square(2, 2, 2, 4), std::numeric_limits<double>::infinity());
  for (std::size_t p = 0; p < m.spatial.size(); ++p) CHECK(m.spatial[p] == 0);
}

TEST_CASE("spatial mask covers the swept disc") {
  sim::Scene s;
  s.width = 48;
  s.height = 24;
  s.frames = 6;
  sim::Ball b;
  b.center = {10, 12};
  b.velocity = {3, 0};
  s.balls = {b};
  const auto clip = sim::render_clip(s);
  const auto m = motion_masks(clip.frames);
  // Pixels covered at the first frame but not the last, or vice versa, moved.
  for (std::size_t p = 0; p < m.spatial.size(); ++p)
    if (clip.masks.front()[0][p] != clip.masks.back()[0][p]) CHECK(m.spatial[p] == 1);
}

TEST_CASE("scores") {
  const Frames a = moving_square(2, 2, 2, 5);
  const Score same = score(a, a);
  CHECK(same.spatial_iou == 1.0);
  CHECK(same.st_iou == 1.0);
  CHECK(same.weighted_iou == 1.0);
  CHECK(same.mse_sim == 1.0);
  CHECK(same.aggregate == 100.0);

  const Frames far = moving_square(2, 24, 2, 5);
  CHECK(score(a, far).spatial_iou == 0.0);
  const Score ab = score(a, far), ba = score(far, a);
  CHECK(ab.aggregate == ba.aggregate);
  CHECK(ab.aggregate >= 0.0);
  CHECK(ab.aggregate <= 100.0);

  CHECK_THROWS_AS(score(a, moving_square(2, 2, 2, 4)), Error);
}

TEST_CASE("adding disjoint spurious motion never raises spatial IoU") {
  const Frames ref = moving_square(2, 2, 2, 5);
  Frames gen = moving_square(2, 2, 1, 5);
  const double before = score(gen, ref).spatial_iou;
  for (std::size_t f = 0; f < gen.size(); ++f)
    for (int y = 26; y < 30; ++y) gen[f](static_cast<int>(20 + f), y) = 250;
  CHECK(score(gen, ref).spatial_iou <= before);
}
