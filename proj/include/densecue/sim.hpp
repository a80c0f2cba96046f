// Copyright 2026 The densecue Authors
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic 2D rigid-disc simulator with ground-truth flow, depth and
// instance masks. Contacts are resolved event by event inside a step with a
// perfectly elastic impulse along the contact normal. There are no walls;
// discs simply leave the frame.

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "densecue/cue_field.hpp"
#include "densecue/grid.hpp"

namespace densecue::sim {

struct Vec {
  double x = 0.0;
  double y = 0.0;
};

struct Ball {
  Vec center;
  Vec velocity;  ///< pixels per unit time
  double radius = 4.0;
  double mass = 1.0;
  double z = 0.5;   ///< depth in [0, 1], larger is farther
  double vz = 0.0;  ///< depth change per unit time
};

struct Scene {
  int width = 64;
  int height = 64;
  int frames = 49;
  double fps = 16.0;  ///< metadata only
  double dt = 1.0;    ///< simulated time per frame
  std::uint64_t seed = 0;
  std::vector<Ball> balls;
};

struct ContactEvent {
  std::size_t a = 0;
  std::size_t b = 0;
  double time = 0.0;  ///< offset inside the step
  Vec a_before, b_before, a_after, b_after;
};

/// Advances every disc by dt, resolving contacts in time order. When report
/// is given, contact events are appended to it.
std::vector<Ball> step(std::vector<Ball> balls, double dt,
                       std::vector<ContactEvent>* report = nullptr);

/// Post-contact velocities of a single elastic impulse between a and b.
void resolve_contact(Ball& a, Ball& b);

struct Clip {
  int width = 0;
  int height = 0;
  std::vector<Grid<std::uint8_t>> frames;          ///< F grayscale frames
  std::vector<FlowField> flow;                     ///< F - 1, frame f to f + 1
  std::vector<DepthMap> depth;                     ///< F, background 1
  std::vector<std::vector<InstanceMask>> masks;    ///< F x balls, visible pixels
  std::vector<std::vector<Ball>> states;           ///< F x balls; empty when read from disk
  Scene scene;                                     ///< initial state; masses are constant

  std::size_t frame_count() const noexcept { return frames.size(); }
};

/// Gray level of a visible disc at depth z.
std::uint8_t shade_for_depth(double z);

Clip render_clip(const Scene& scene);

/// Random non-overlapping discs fully inside the frame.
Scene random_scene(int width, int height, std::size_t count, std::uint64_t seed, int frames = 49);

enum class Outcome { kDeflected, kPushesThrough };
const char* outcome_name(Outcome o);

/// Striker (ball 0) moving right at a resting target (ball 1), head-on.
Scene canonical_two_ball_scene();

/// Sets the striker mass to mass_ratio times the target mass, runs until the
/// first contact and labels the striker's motion: still moving along its
/// original direction means it pushed through; stopped or reversed counts as
/// deflected.
Outcome mass_sweep_outcome(const Scene& scene, double mass_ratio);

/// Training cue for frame f: per visible instance, mean flow over its mask,
/// delta depth over the pixels visible in both f and f + 1, mass divided by
/// the scene maximum, painted and merged.
cue::CueField derive_training_cues(const Clip& clip, std::size_t frame, double speed_norm = 1.0);

}  // namespace densecue::sim
