// Copyright 2026 The densecue Authors
// SPDX-License-Identifier: Apache-2.0
//
// Sparse per-instance hints (mask + arrow + depth delta + mass) lifted into
// dense pixel-aligned control fields, plus the training-time derivation of
// the same cues from flow and depth.

#pragma once

#include <array>
#include <vector>

#include "densecue/grid.hpp"

namespace densecue::cue {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// User arrow drawn on the keyframe. depth_delta > 0 is motion into the screen.
struct Arrow {
  Point start;
  Point end;
  double depth_delta = 0.0;
};

struct InstanceSpec {
  InstanceMask mask;
  Arrow arrow;
  /// Already divided by the scene-level maximum, so in (0, 1].
  double mass = 1.0;
};

/// Four planes (u, v, dz, mass) on the keyframe grid.
struct CueField {
  static constexpr int kChannels = 4;

  Grid<float> u, v, dz, mass;

  CueField() = default;
  CueField(int width, int height)
      : u(width, height), v(width, height), dz(width, height), mass(width, height) {}

  int width() const noexcept { return u.width(); }
  int height() const noexcept { return u.height(); }
  std::array<float, 4> at(int x, int y) const {
    return {u(x, y), v(x, y), dz(x, y), mass(x, y)};
  }
  void set(int x, int y, const std::array<float, 4>& value) {
    u(x, y) = value[0];
    v(x, y) = value[1];
    dz(x, y) = value[2];
    mass(x, y) = value[3];
  }

  /// Channel-minor interleaved copy (H x W x 4), the CUE1 payload layout.
  std::vector<float> interleaved() const;

  friend bool operator==(const CueField&, const CueField&) = default;
};

struct Rasterized {
  Grid<double> alpha;
  CueField field;
};

/// Blur radius used when the caller does not pick one: min(H, W) / 20.
double default_sigma(int width, int height);

/// Euclidean distance from p to the closed segment [a, b].
double distance_to_segment(Point p, Point a, Point b);

/// alpha(p) = exp(-d(p)^2 / (2 sigma^2)) inside the mask, 0 outside. The
/// in-plane field is alpha times the unit arrow direction; dz and mass are
/// constant over the mask.
Rasterized rasterize_instance(const InstanceSpec& spec, double sigma);

/// Closest arrow wins: each pixel takes all four channels from the instance
/// with the largest alpha there. Equal alpha goes to the lower index.
CueField compose_cue_field(const std::vector<InstanceSpec>& specs, double sigma);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

Vec2 derive_mean_flow(const FlowField& flow, const InstanceMask& mask);

double derive_delta_depth(const DepthMap& d_t, const DepthMap& d_t1, const InstanceMask& mask);

/// Training-time cue for one instance. The mean vector is divided by
/// speed_norm (pixels/frame that maps to unit length) and then clipped to
/// unit norm.
CueField paint_training_cue(Vec2 mean_vec, double delta_z, double mass,
                            const InstanceMask& mask, double speed_norm = 1.0);

/// Per-pixel union of painted instance cues. Masks are expected to be
/// disjoint; where they are not, the lower index wins.
CueField merge_painted(const std::vector<CueField>& painted);

}  // namespace densecue::cue
