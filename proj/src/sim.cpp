// Copyright 2026 The densecue Authors
// SPDX-License-Identifier: Apache-2.0

#include "densecue/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "densecue/error.hpp"

namespace densecue::sim {

namespace {

constexpr int kMaxEventsPerStep = 1000;

void advance(std::vector<Ball>& balls, double t) {
  for (auto& b : balls) {
    b.center.x += b.velocity.x * t;
    b.center.y += b.velocity.y * t;
    b.z = std::clamp(b.z + b.vz * t, 0.0, 1.0);
  }
}

/// Earliest time in [0, horizon] at which a and b touch while approaching.
double time_of_impact(const Ball& a, const Ball& b, double horizon) {
  const double px = b.center.x - a.center.x;
  const double py = b.center.y - a.center.y;
  const double vx = b.velocity.x - a.velocity.x;
  const double vy = b.velocity.y - a.velocity.y;
  const double closing = px * vx + py * vy;
  if (closing >= 0.0) return std::numeric_limits<double>::infinity();
  const double reach = a.radius + b.radius;
  const double c = px * px + py * py - reach * reach;
  if (c <= 0.0) return 0.0;
  const double qa = vx * vx + vy * vy;
  const double disc = closing * closing - qa * c;
  if (disc < 0.0) return std::numeric_limits<double>::infinity();
  const double t = c / (-closing + std::sqrt(disc));
  return t <= horizon ? t : std::numeric_limits<double>::infinity();
}

void validate(const std::vector<Ball>& balls) {
  for (const auto& b : balls) {
    if (!(b.radius > 0.0) || !(b.mass > 0.0)) {
      throw Error(ErrorCode::kDegenerateConfig, "disc radius and mass must be positive");
    }
  }
  for (std::size_t i = 0; i < balls.size(); ++i) {
    for (std::size_t j = i + 1; j < balls.size(); ++j) {
      if (balls[i].center.x == balls[j].center.x && balls[i].center.y == balls[j].center.y) {
        throw Error(ErrorCode::kDegenerateConfig,
                    "discs " + std::to_string(i) + " and " + std::to_string(j) + " share a center");
      }
    }
  }
}

}  // namespace

void resolve_contact(Ball& a, Ball& b) {
  const double px = b.center.x - a.center.x;
  const double py = b.center.y - a.center.y;
  const double dist = std::hypot(px, py);
  if (dist == 0.0) throw Error(ErrorCode::kDegenerateConfig, "coincident centers at contact");
  const double nx = px / dist;
  const double ny = py / dist;
  const double closing = (a.velocity.x - b.velocity.x) * nx + (a.velocity.y - b.velocity.y) * ny;
  const double total = a.mass + b.mass;
  const double ca = 2.0 * b.mass / total * closing;
  const double cb = 2.0 * a.mass / total * closing;
  a.velocity.x -= ca * nx;
  a.velocity.y -= ca * ny;
  b.velocity.x += cb * nx;
  b.velocity.y += cb * ny;
}

std::vector<Ball> step(std::vector<Ball> balls, double dt, std::vector<ContactEvent>* report) {
  validate(balls);
  double remaining = dt;
  double elapsed = 0.0;
  for (int event = 0; event < kMaxEventsPerStep; ++event) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0;
    std::size_t bj = 0;
    for (std::size_t i = 0; i < balls.size(); ++i) {
      for (std::size_t j = i + 1; j < balls.size(); ++j) {
        const double t = time_of_impact(balls[i], balls[j], remaining);
        if (t < best) {
          best = t;
          bi = i;
          bj = j;
        }
      }
    }
    if (!std::isfinite(best)) break;
    advance(balls, best);
    remaining -= best;
    elapsed += best;
    ContactEvent ev{bi, bj, elapsed, balls[bi].velocity, balls[bj].velocity, {}, {}};
    resolve_contact(balls[bi], balls[bj]);
    ev.a_after = balls[bi].velocity;
    ev.b_after = balls[bj].velocity;
    if (report) report->push_back(ev);
  }
  advance(balls, remaining);
  return balls;
}

std::uint8_t shade_for_depth(double z) {
  return static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - 0.6 * std::clamp(z, 0.0, 1.0))));
}

Clip render_clip(const Scene& scene) {
  if (scene.width <= 0 || scene.height <= 0 || scene.frames < 1) {
    throw Error(ErrorCode::kOutOfRange, "scene needs a positive size and at least one frame");
  }
  const int w = scene.width;
  const int h = scene.height;
  const std::size_t count = scene.balls.size();

  Clip clip;
  clip.width = w;
  clip.height = h;
  clip.scene = scene;
  clip.states.push_back(scene.balls);
  validate(scene.balls);
  for (int f = 1; f < scene.frames; ++f) clip.states.push_back(step(clip.states.back(), scene.dt));

  for (const auto& state : clip.states) {
    Grid<std::uint8_t> frame(w, h);
    DepthMap depth(w, h, 1.0f);
    std::vector<InstanceMask> masks(count, InstanceMask(w, h));
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double cx = x + 0.5;
        const double cy = y + 0.5;
        int owner = -1;
        for (std::size_t i = 0; i < count; ++i) {
          const Ball& b = state[i];
          const double dx = cx - b.center.x;
          const double dy = cy - b.center.y;
          if (dx * dx + dy * dy > b.radius * b.radius) continue;
          if (owner < 0 || b.z < state[static_cast<std::size_t>(owner)].z) owner = static_cast<int>(i);
        }
        if (owner < 0) continue;
        const Ball& b = state[static_cast<std::size_t>(owner)];
        frame(x, y) = shade_for_depth(b.z);
        depth(x, y) = static_cast<float>(b.z);
        masks[static_cast<std::size_t>(owner)](x, y) = 1;
      }
    }
    clip.frames.push_back(std::move(frame));
    clip.depth.push_back(std::move(depth));
    clip.masks.push_back(std::move(masks));
  }

  for (std::size_t f = 0; f + 1 < clip.states.size(); ++f) {
    FlowField flow(w, h);
    for (std::size_t i = 0; i < count; ++i) {
      const float du = static_cast<float>(clip.states[f + 1][i].center.x - clip.states[f][i].center.x);
      const float dv = static_cast<float>(clip.states[f + 1][i].center.y - clip.states[f][i].center.y);
      const InstanceMask& m = clip.masks[f][i];
      for (std::size_t p = 0; p < m.size(); ++p) {
        if (m[p] == 0) continue;
        flow.u[p] = du;
        flow.v[p] = dv;
      }
    }
    clip.flow.push_back(std::move(flow));
  }
  return clip;
}

Scene random_scene(int width, int height, std::size_t count, std::uint64_t seed, int frames) {
  Scene scene;
  scene.width = width;
  scene.height = height;
  scene.frames = frames;
  scene.seed = seed;
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double scale = std::min(width, height) / 64.0;
  const double r_lo = 3.0 * scale;
  const double r_hi = 6.0 * scale;
  for (std::size_t n = 0; n < count; ++n) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      Ball b;
      b.radius = r_lo + (r_hi - r_lo) * unit(engine);
      if (2 * b.radius >= std::min(width, height)) b.radius = 0.25 * std::min(width, height);
      b.center.x = b.radius + (width - 2 * b.radius) * unit(engine);
      b.center.y = b.radius + (height - 2 * b.radius) * unit(engine);
      b.velocity.x = -2.0 + 4.0 * unit(engine);
      b.velocity.y = -2.0 + 4.0 * unit(engine);
      b.mass = 0.5 + 1.5 * unit(engine);
      b.z = 0.2 + 0.6 * unit(engine);
      b.vz = -0.005 + 0.01 * unit(engine);
      bool overlaps = false;
      for (const auto& o : scene.balls) {
        if (std::hypot(o.center.x - b.center.x, o.center.y - b.center.y) < o.radius + b.radius + 1.0) {
          overlaps = true;
          break;
        }
      }
      if (!overlaps) {
        scene.balls.push_back(b);
        break;
      }
    }
  }
  return scene;
}

const char* outcome_name(Outcome o) {
  return o == Outcome::kDeflected ? "deflected" : "pushes_through";
}

Scene canonical_two_ball_scene() {
  Scene scene;
  scene.width = 96;
  scene.height = 32;
  Ball striker;
  striker.center = {16.0, 16.0};
  striker.velocity = {1.5, 0.0};
  striker.radius = 5.0;
  Ball target;
  target.center = {48.0, 16.0};
  target.radius = 5.0;
  scene.balls = {striker, target};
  return scene;
}

Outcome mass_sweep_outcome(const Scene& scene, double mass_ratio) {
  if (scene.balls.size() != 2) {
    throw Error(ErrorCode::kDegenerateConfig, "mass sweep needs exactly two discs");
  }
  if (!(mass_ratio > 0.0)) throw Error(ErrorCode::kOutOfRange, "mass ratio must be positive");
  std::vector<Ball> balls = scene.balls;
  balls[0].mass = mass_ratio * balls[1].mass;
  for (int f = 1; f < scene.frames; ++f) {
    std::vector<ContactEvent> events;
    balls = step(std::move(balls), scene.dt, &events);
    if (!events.empty()) {
      const ContactEvent& ev = events.front();
      const double along = ev.a_after.x * ev.a_before.x + ev.a_after.y * ev.a_before.y;
      return along > 0.0 ? Outcome::kPushesThrough : Outcome::kDeflected;
    }
  }
  throw Error(ErrorCode::kNoContact, "discs never touch within the clip");
}

cue::CueField derive_training_cues(const Clip& clip, std::size_t frame, double speed_norm) {
  if (frame + 1 >= clip.frame_count()) {
    throw Error(ErrorCode::kOutOfRange, "derivation frame needs a successor frame");
  }
  const auto& balls = clip.scene.balls;
  double max_mass = 0.0;
  for (const auto& b : balls) max_mass = std::max(max_mass, b.mass);

  std::vector<cue::CueField> painted;
  for (std::size_t i = 0; i < balls.size() && i < clip.masks[frame].size(); ++i) {
    const InstanceMask& mask = clip.masks[frame][i];
    if (mask_count(mask) == 0) continue;
    const cue::Vec2 mean = cue::derive_mean_flow(clip.flow[frame], mask);

    InstanceMask both = mask;
    const InstanceMask& next = clip.masks[frame + 1][i];
    for (std::size_t p = 0; p < both.size(); ++p) both[p] = mask[p] && next[p];
    const InstanceMask& depth_mask = mask_count(both) > 0 ? both : mask;
    const double dz = cue::derive_delta_depth(clip.depth[frame], clip.depth[frame + 1], depth_mask);

    painted.push_back(cue::paint_training_cue(mean, dz, balls[i].mass / max_mass, mask, speed_norm));
  }
  if (painted.empty()) return cue::CueField(clip.width, clip.height);
  return cue::merge_painted(painted);
}

}  // namespace densecue::sim
