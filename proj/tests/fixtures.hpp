// Copyright 2026 The densecue Authors
// SPDX-License-Identifier: Apache-2.0
//
// Random inputs shared by the unit and acceptance tests.

#pragma once

#include <cstdint>
#include <random>

#include "densecue/joint_attention.hpp"
#include "densecue/matrix.hpp"
#include "densecue/rope_math.hpp"

namespace fixture {

inline densecue::Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& g, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  densecue::Matrix m(r, c);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = n(g);
  return m;
}

struct SeqShape {
  std::size_t text = 2, video = 3, motion = 2, width = 8, cue_channels = 4, heads = 1;
};

inline densecue::attention::TokenSequence random_sequence(const SeqShape& s, std::mt19937_64& g) {
  using densecue::rope::grid_to_angles;
  std::uniform_int_distribution<int> pos(0, 5);
  const std::size_t code_width = s.width / s.heads;
  std::vector<densecue::rope::RotaryCode> video, motion;
  for (std::size_t i = 0; i < s.video; ++i) video.push_back(grid_to_angles({pos(g), pos(g), pos(g)}, code_width));
  for (std::size_t i = 0; i < s.motion; ++i) motion.push_back(grid_to_angles({0, pos(g), pos(g)}, code_width));
  return densecue::attention::build_sequence(random_matrix(s.text, s.width, g), random_matrix(s.video, s.width, g),
                                             random_matrix(s.video, s.width, g),
                                             random_matrix(s.motion, s.cue_channels, g), video, motion);
}

/// Perturb every parameter away from its structured initialization so the
/// aux path, domain vector and gain all carry independent values.
inline void scramble(densecue::attention::BlockParams& p, std::mt19937_64& g) {
  std::normal_distribution<double> n(0.0, 0.3);
  p.for_each([&](std::string_view, std::span<double> t) {
    for (double& v : t) v += n(g);
  });
}

}  // namespace fixture
