// Copyright 2026 The densecue Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "densecue/cue_field.hpp"
#include "densecue/error.hpp"
#include "densecue/sim.hpp"
#include "oracles.hpp"

using namespace densecue;
using namespace densecue::sim;

namespace {

Ball ball(double x, double y, double vx, double vy, double r = 2.0, double m = 1.0) {
  Ball b;
  b.center = {x, y};
  b.velocity = {vx, vy};
  b.radius = r;
  b.mass = m;
  return b;
}

}  // namespace

TEST_CASE("equal masses head-on exchange velocities") {
  std::vector<ContactEvent> ev;
  const auto out = step({ball(10, 10, 1, 0), ball(20, 10, -1, 0)}, 5.0, &ev);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].time == doctest::Approx(3.0));
  CHECK(out[0].velocity.x == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(out[1].velocity.x == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("heavy striker against a resting target") {
  std::vector<ContactEvent> ev;
  const double v = 1.0;
  const auto out = step({ball(10, 10, v, 0, 2, 10), ball(20, 10, 0, 0, 2, 1)}, 10.0, &ev);
  REQUIRE(ev.size() == 1);
  const auto want = oracle::elastic_1d(10, v, 1, 0);
  CHECK(want[0] == doctest::Approx(9.0 / 11.0));
  CHECK(want[1] == doctest::Approx(20.0 / 11.0));
  CHECK(out[0].velocity.x == doctest::Approx(want[0]).epsilon(1e-14));
  CHECK(out[1].velocity.x == doctest::Approx(want[1]).epsilon(1e-14));
}

TEST_CASE("free flight advances by v dt") {
  const auto out = step({ball(5, 5, 0.5, -0.25), ball(50, 50, 0, 1)}, 2.0);
  CHECK(out[0].center.x == 6.0);
  CHECK(out[0].center.y == 4.5);
  CHECK(out[1].center.y == 52.0);
}

TEST_CASE("coincident centers are rejected") {
  try {
    step({ball(5, 5, 0, 0), ball(5, 5, 1, 0)}, 1.0);
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerateConfig);
  }
}

TEST_CASE("static ball renders identical frames and zero flow") {
  Scene s;
  s.width = 24;
  s.height = 20;
  s.frames = 4;
  s.balls = {ball(12, 10, 0, 0, 4)};
  const Clip c = render_clip(s);
  CHECK(c.frame_count() == 4);
  CHECK(c.flow.size() == 3);
  for (const auto& f : c.frames) CHECK(f == c.frames.front());
  for (const auto& fl : c.flow)
    for (std::size_t i = 0; i < fl.u.size(); ++i) {
      CHECK(fl.u[i] == 0.0f);
      CHECK(fl.v[i] == 0.0f);
    }
}

TEST_CASE("rigid translation closes the loop with the cue derivation") {
  Scene s;
  s.width = 40;
  s.height = 24;
  s.frames = 5;
  Ball b = ball(10, 12, 2, 0, 4);
  b.z = 0.3;
  b.vz = 0.05;
  s.balls = {b};
  const Clip c = render_clip(s);
  for (std::size_t f = 0; f + 1 < c.frame_count(); ++f) {
    const auto v = cue::derive_mean_flow(c.flow[f], c.masks[f][0]);
    CHECK(v.x == 2.0);
    CHECK(v.y == 0.0);
    InstanceMask both(40, 24);
    for (std::size_t p = 0; p < both.size(); ++p) both[p] = c.masks[f][0][p] && c.masks[f + 1][0][p];
    CHECK(cue::derive_delta_depth(c.depth[f], c.depth[f + 1], both) == doctest::Approx(0.05).epsilon(1e-5));
  }
  const auto cues = derive_training_cues(c, 0);
  CHECK(cues.u(10, 12) == 1.0f);
  CHECK(cues.mass(10, 12) == 1.0f);
  CHECK(cues.dz(10, 12) == doctest::Approx(0.05f));
  CHECK(cues.u(30, 2) == 0.0f);
}

TEST_CASE("nearer disc occludes and masks stay disjoint") {
  Scene s;
  s.width = 32;
  s.height = 32;
  s.frames = 1;
  Ball a = ball(14, 16, 0, 0, 6);
  Ball b = ball(18, 16, 0, 0, 6);
  a.z = 0.8;
  b.z = 0.2;
  s.balls = {a, b};
  const Clip c = render_clip(s);
  CHECK(c.masks[0][1](16, 16) == 1);
  CHECK(c.masks[0][0](16, 16) == 0);
  CHECK(c.depth[0](16, 16) == 0.2f);
  CHECK(c.depth[0](0, 0) == 1.0f);
  for (std::size_t p = 0; p < c.masks[0][0].size(); ++p) CHECK(!(c.masks[0][0][p] && c.masks[0][1][p]));
}

TEST_CASE("mass sweep flips the outcome") {
  const Scene s = canonical_two_ball_scene();
  CHECK(mass_sweep_outcome(s, 0.5) == Outcome::kDeflected);
  CHECK(mass_sweep_outcome(s, 1.0) == Outcome::kDeflected);
  CHECK(mass_sweep_outcome(s, 2.0) == Outcome::kPushesThrough);
  CHECK(std::string(outcome_name(Outcome::kPushesThrough)) == "pushes_through");

  std::vector<Ball> balls = s.balls;
  Ball a = balls[0], b = balls[1];
  a.center = {b.center.x - a.radius - b.radius, b.center.y};
  resolve_contact(a, b);
  CHECK(a.velocity.x == 0.0);
  CHECK(a.velocity.y == 0.0);

  Scene miss = s;
  miss.balls[0].velocity = {0, 0.1};
  try {
    mass_sweep_outcome(miss, 1.0);
    FAIL("no contact accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNoContact);
  }
}

TEST_CASE("random scenes are reproducible") {
  const Scene a = random_scene(48, 48, 3, 42, 6);
  const Scene b = random_scene(48, 48, 3, 42, 6);
  REQUIRE(a.balls.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a.balls[i].center.x == b.balls[i].center.x);
    CHECK(a.balls[i].velocity.y == b.balls[i].velocity.y);
  }
  CHECK(render_clip(a).frames == render_clip(b).frames);
}
