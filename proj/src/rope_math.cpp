// Copyright 2026 The densecue Authors
// SPDX-License-Identifier: Apache-2.0

#include "densecue/rope_math.hpp"

#include <cmath>
#include <string>

#include "densecue/error.hpp"

namespace densecue::rope {

namespace {

void require_even(std::size_t width) {
  if (width % 2 != 0) {
    throw Error(ErrorCode::kOddWidth, "width " + std::to_string(width) + " is odd");
  }
}

void fill_ladder(std::vector<double>& angles, std::size_t group_width, double position) {
  const std::size_t pairs = group_width / 2;
  for (std::size_t j = 0; j < pairs; ++j) {
    const double theta = std::pow(kFrequencyBase, -2.0 * static_cast<double>(j) /
                                                      static_cast<double>(group_width));
    angles.push_back(position * theta);
  }
}

}  // namespace

AxisSplit axis_split(std::size_t width) {
  if (width == 0 || width % 8 != 0) {
    throw Error(ErrorCode::kIndivisibleSplit,
                "width " + std::to_string(width) + " does not split 2:1:1 into even groups");
  }
  return {width / 2, width / 4, width / 4};
}

std::vector<double> absolute_pe(double position, std::size_t width) {
  require_even(width);
  std::vector<double> out(width);
  for (std::size_t j = 0; j < width / 2; ++j) {
    const double freq = std::pow(kFrequencyBase, -2.0 * static_cast<double>(j) /
                                                     static_cast<double>(width));
    out[2 * j] = std::sin(position * freq);
    out[2 * j + 1] = std::cos(position * freq);
  }
  return out;
}

void rope_rotate_inplace(std::span<double> x, std::span<const double> angles) {
  if (x.size() % 2 != 0) {
    throw Error(ErrorCode::kOddWidth, "vector width is odd");
  }
  if (x.size() != 2 * angles.size()) {
    throw Error(ErrorCode::kShapeMismatch, "rotary code width differs from vector width");
  }
  for (std::size_t j = 0; j < angles.size(); ++j) {
    const double c = std::cos(angles[j]);
    const double s = std::sin(angles[j]);
    const double a = x[2 * j];
    const double b = x[2 * j + 1];
    x[2 * j] = a * c - b * s;
    x[2 * j + 1] = a * s + b * c;
  }
}

void rope_unrotate_inplace(std::span<double> x, std::span<const double> angles) {
  if (x.size() != 2 * angles.size()) {
    throw Error(ErrorCode::kShapeMismatch, "rotary code width differs from vector width");
  }
  for (std::size_t j = 0; j < angles.size(); ++j) {
    const double c = std::cos(angles[j]);
    const double s = std::sin(angles[j]);
    const double a = x[2 * j];
    const double b = x[2 * j + 1];
    x[2 * j] = a * c + b * s;
    x[2 * j + 1] = -a * s + b * c;
  }
}

namespace {

template <class Fn>
void for_each_head(std::span<double> x, std::span<const double> angles, Fn fn) {
  const std::size_t head = 2 * angles.size();
  if (head == 0 || x.size() % head != 0) {
    throw Error(ErrorCode::kShapeMismatch, "vector width is not a multiple of the code width");
  }
  for (std::size_t off = 0; off < x.size(); off += head) fn(x.subspan(off, head), angles);
}

}  // namespace

void rotate_heads_inplace(std::span<double> x, std::span<const double> angles) {
  for_each_head(x, angles, rope_rotate_inplace);
}

void unrotate_heads_inplace(std::span<double> x, std::span<const double> angles) {
  for_each_head(x, angles, rope_unrotate_inplace);
}

std::vector<double> rope_rotate(std::span<const double> x, const RotaryCode& code) {
  require_even(x.size());
  std::vector<double> out(x.begin(), x.end());
  rope_rotate_inplace(out, code.angles);
  return out;
}

RotaryCode grid_to_angles(GridIndex idx, std::size_t width) {
  const AxisSplit split = axis_split(width);
  RotaryCode code;
  code.angles.reserve(width / 2);
  fill_ladder(code.angles, split.t, idx.t);
  fill_ladder(code.angles, split.h, idx.h);
  fill_ladder(code.angles, split.w, idx.w);
  return code;
}

}  // namespace densecue::rope
