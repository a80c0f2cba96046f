// Copyright 2026 The densecue Authors
// SPDX-License-Identifier: Apache-2.0
//
// physics-iq-lite: four motion-coherence checks between a generated and a
// reference clip, averaged and rescaled to 0..100. The aggregation is this
// project's own symmetric mean; scores are comparable only with each other.

#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "densecue/grid.hpp"

namespace densecue::metrics {

/// Default motion threshold: 2% of the intensity range.
inline constexpr double kDefaultThreshold = 0.02;

using Frames = std::vector<Grid<std::uint8_t>>;

struct MotionMask {
  Grid<std::uint8_t> spatial;                 ///< OR over time
  std::vector<Grid<std::uint8_t>> per_frame;  ///< F - 1 transitions
  Grid<double> magnitude;                     ///< summed |diff| in [0, 1] units
};

/// Frame t's transition mask marks pixels whose normalized absolute
/// difference from frame t - 1 exceeds the threshold.
MotionMask motion_masks(const Frames& frames, double threshold = kDefaultThreshold);

struct Score {
  double spatial_iou = 0.0;
  double st_iou = 0.0;
  double weighted_iou = 0.0;
  double mse_sim = 0.0;
  double aggregate = 0.0;
};

/// IoU of two binary masks; two empty masks agree perfectly (1).
double iou(const Grid<std::uint8_t>& a, const Grid<std::uint8_t>& b);

Score score(const Frames& gen, const Frames& ref, double threshold = kDefaultThreshold);

}  // namespace densecue::metrics
