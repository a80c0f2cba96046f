// Copyright 2026 The densecue Authors
// SPDX-License-Identifier: Apache-2.0

#include "densecue/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "densecue/error.hpp"

namespace densecue::metrics {

MotionMask motion_masks(const Frames& frames, double threshold) {
  if (frames.size() < 2) throw Error(ErrorCode::kTooFewFrames, "motion needs at least two frames");
  const int w = frames.front().width();
  const int h = frames.front().height();
  for (const auto& f : frames) {
    if (!f.same_shape(w, h)) throw Error(ErrorCode::kDimensionMismatch, "frames differ in size");
  }
  MotionMask out{Grid<std::uint8_t>(w, h), {}, Grid<double>(w, h)};
  for (std::size_t t = 1; t < frames.size(); ++t) {
    Grid<std::uint8_t> moving(w, h);
    for (std::size_t p = 0; p < moving.size(); ++p) {
      const double diff = std::abs(static_cast<int>(frames[t][p]) - static_cast<int>(frames[t - 1][p])) / 255.0;
      out.magnitude[p] += diff;
      if (diff > threshold) {
        moving[p] = 1;
        out.spatial[p] = 1;
      }
    }
    out.per_frame.push_back(std::move(moving));
  }
  return out;
}

double iou(const Grid<std::uint8_t>& a, const Grid<std::uint8_t>& b) {
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t p = 0; p < a.size(); ++p) {
    const bool x = a[p] != 0;
    const bool y = b[p] != 0;
    inter += x && y;
    uni += x || y;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

Score score(const Frames& gen, const Frames& ref, double threshold) {
  if (gen.size() != ref.size() || gen.empty() || !gen.front().same_shape(ref.front())) {
    throw Error(ErrorCode::kDimensionMismatch, "clips differ in frame count or size");
  }
  const MotionMask mg = motion_masks(gen, threshold);
  const MotionMask mr = motion_masks(ref, threshold);

  Score s;
  s.spatial_iou = iou(mg.spatial, mr.spatial);

  double st = 0.0;
  for (std::size_t t = 0; t < mg.per_frame.size(); ++t) st += iou(mg.per_frame[t], mr.per_frame[t]);
  s.st_iou = st / static_cast<double>(mg.per_frame.size());

  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t p = 0; p < mg.magnitude.size(); ++p) {
    lo += std::min(mg.magnitude[p], mr.magnitude[p]);
    hi += std::max(mg.magnitude[p], mr.magnitude[p]);
  }
  s.weighted_iou = hi == 0.0 ? 1.0 : lo / hi;

  double sq = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < gen.size(); ++t) {
    for (std::size_t p = 0; p < gen[t].size(); ++p) {
      const double d = (static_cast<double>(gen[t][p]) - static_cast<double>(ref[t][p])) / 255.0;
      sq += d * d;
      ++count;
    }
  }
  s.mse_sim = 1.0 / (1.0 + sq / static_cast<double>(count));

  s.aggregate = 100.0 * ((s.spatial_iou + s.st_iou + s.weighted_iou + s.mse_sim) / 4.0);
  return s;
}

}  // namespace densecue::metrics
