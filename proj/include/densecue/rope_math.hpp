// Copyright 2026 The densecue Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace densecue::rope {

inline constexpr double kFrequencyBase = 10000.0;

/// Rotation angles, one per consecutive channel pair.
struct RotaryCode {
  std::vector<double> angles;

  std::size_t width() const noexcept { return 2 * angles.size(); }
  friend bool operator==(const RotaryCode&, const RotaryCode&) = default;
};

/// Spatio-temporal token index: frame, token row, token column.
struct GridIndex {
  int t = 0;
  int h = 0;
  int w = 0;
};

/// Channel split across the (t, h, w) axes, in channels. t takes half the
/// width and h, w a quarter each, so widths must be multiples of 8.
struct AxisSplit {
  std::size_t t = 0;
  std::size_t h = 0;
  std::size_t w = 0;
};
AxisSplit axis_split(std::size_t width);

/// Sinusoidal absolute code: out[2j] = sin(m w_j), out[2j+1] = cos(m w_j),
/// w_j = base^(-2j/d).
std::vector<double> absolute_pe(double position, std::size_t width);

/// Rotates each pair (x[2j], x[2j+1]) by code.angles[j].
std::vector<double> rope_rotate(std::span<const double> x, const RotaryCode& code);
void rope_rotate_inplace(std::span<double> x, std::span<const double> angles);
/// Inverse rotation (rotate by -angle), the adjoint of rope_rotate.
void rope_unrotate_inplace(std::span<double> x, std::span<const double> angles);

/// Multi-head variants: x holds consecutive heads of width 2 * angles.size()
/// and every head is rotated by the same code.
void rotate_heads_inplace(std::span<double> x, std::span<const double> angles);
void unrotate_heads_inplace(std::span<double> x, std::span<const double> angles);

/// 3D rotary code. Each axis group gets its own ladder
/// theta_j = base^(-2j / group_width) multiplied by that axis index.
RotaryCode grid_to_angles(GridIndex idx, std::size_t width);

/// Motion tokens keep the code of their first-frame site whatever frame
/// they are consumed in.
inline RotaryCode first_frame_code(int h, int w, std::size_t width) {
  return grid_to_angles({0, h, w}, width);
}

}  // namespace densecue::rope
