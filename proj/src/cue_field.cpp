// Copyright 2026 The densecue Authors
// SPDX-License-Identifier: Apache-2.0

#include "densecue/cue_field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "densecue/error.hpp"

namespace densecue::cue {

namespace {

void require_nonempty(const InstanceMask& mask) {
  if (mask.empty() || mask_count(mask) == 0) {
    throw Error(ErrorCode::kEmptyMask, "instance mask has no set pixels");
  }
}

void validate(const InstanceSpec& spec, double sigma) {
  require_nonempty(spec.mask);
  const Arrow& a = spec.arrow;
  if (!(a.depth_delta >= -1.0 && a.depth_delta <= 1.0)) {
    throw Error(ErrorCode::kOutOfRange,
                "depth delta " + std::to_string(a.depth_delta) + " outside [-1, 1]");
  }
  if (a.start.x == a.end.x && a.start.y == a.end.y && a.depth_delta == 0.0) {
    throw Error(ErrorCode::kDegenerateArrow, "zero-length arrow with no depth delta");
  }
  if (!(spec.mass > 0.0 && spec.mass <= 1.0)) {
    throw Error(ErrorCode::kOutOfRange,
                "normalized mass " + std::to_string(spec.mass) + " outside (0, 1]");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::kOutOfRange, "sigma must be positive");
  }
}

}  // namespace

std::vector<float> CueField::interleaved() const {
  std::vector<float> out;
  out.reserve(u.size() * kChannels);
  for (std::size_t i = 0; i < u.size(); ++i) {
    out.push_back(u[i]);
    out.push_back(v[i]);
    out.push_back(dz[i]);
    out.push_back(mass[i]);
  }
  return out;
}

double default_sigma(int width, int height) {
  return static_cast<double>(std::min(width, height)) / 20.0;
}

double distance_to_segment(Point p, Point a, Point b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) {
    t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
  }
  const double cx = a.x + t * dx - p.x;
  const double cy = a.y + t * dy - p.y;
  return std::sqrt(cx * cx + cy * cy);
}

Rasterized rasterize_instance(const InstanceSpec& spec, double sigma) {
  validate(spec, sigma);
  const int w = spec.mask.width();
  const int h = spec.mask.height();
  const Arrow& arrow = spec.arrow;

  double ux = 0.0;
  double uy = 0.0;
  const double len = std::hypot(arrow.end.x - arrow.start.x, arrow.end.y - arrow.start.y);
  if (len > 0.0) {
    ux = (arrow.end.x - arrow.start.x) / len;
    uy = (arrow.end.y - arrow.start.y) / len;
  }

  Rasterized out{Grid<double>(w, h), CueField(w, h)};
  const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (spec.mask(x, y) == 0) continue;
      const double d = distance_to_segment({x + 0.5, y + 0.5}, arrow.start, arrow.end);
      const double alpha = std::clamp(std::exp(-d * d * inv_two_sigma2), 0.0, 1.0);
      out.alpha(x, y) = alpha;
      out.field.set(x, y,
                    {static_cast<float>(alpha * ux), static_cast<float>(alpha * uy),
                     static_cast<float>(arrow.depth_delta), static_cast<float>(spec.mass)});
    }
  }
  return out;
}

CueField compose_cue_field(const std::vector<InstanceSpec>& specs, double sigma) {
  if (specs.empty()) {
    throw Error(ErrorCode::kDimensionMismatch, "at least one instance is required");
  }
  const int w = specs.front().mask.width();
  const int h = specs.front().mask.height();
  for (const auto& s : specs) {
    if (!s.mask.same_shape(w, h)) {
      throw Error(ErrorCode::kDimensionMismatch, "instance masks differ in size");
    }
  }

  std::vector<Rasterized> layers;
  layers.reserve(specs.size());
  for (const auto& s : specs) layers.push_back(rasterize_instance(s, sigma));

  CueField out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int best = -1;
      double best_alpha = -1.0;
      for (std::size_t i = 0; i < specs.size(); ++i) {
        if (specs[i].mask(x, y) == 0) continue;
        if (layers[i].alpha(x, y) > best_alpha) {
          best_alpha = layers[i].alpha(x, y);
          best = static_cast<int>(i);
        }
      }
      if (best >= 0) out.set(x, y, layers[static_cast<std::size_t>(best)].field.at(x, y));
    }
  }
  return out;
}

Vec2 derive_mean_flow(const FlowField& flow, const InstanceMask& mask) {
  require_nonempty(mask);
  if (!mask.same_shape(flow.u) || !mask.same_shape(flow.v)) {
    throw Error(ErrorCode::kDimensionMismatch, "flow and mask differ in size");
  }
  double sx = 0.0;
  double sy = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == 0) continue;
    sx += flow.u[i];
    sy += flow.v[i];
    ++n;
  }
  return {sx / static_cast<double>(n), sy / static_cast<double>(n)};
}

double derive_delta_depth(const DepthMap& d_t, const DepthMap& d_t1, const InstanceMask& mask) {
  require_nonempty(mask);
  if (!mask.same_shape(d_t) || !mask.same_shape(d_t1)) {
    throw Error(ErrorCode::kDimensionMismatch, "depth maps and mask differ in size");
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] == 0) continue;
    sum += static_cast<double>(d_t1[i]) - static_cast<double>(d_t[i]);
    ++n;
  }
  return sum / static_cast<double>(n);
}

CueField paint_training_cue(Vec2 mean_vec, double delta_z, double mass,
                            const InstanceMask& mask, double speed_norm) {
  require_nonempty(mask);
  if (!(speed_norm > 0.0)) {
    throw Error(ErrorCode::kOutOfRange, "speed normalization must be positive");
  }
  double vx = mean_vec.x / speed_norm;
  double vy = mean_vec.y / speed_norm;
  const double norm = std::hypot(vx, vy);
  if (norm > 1.0) {
    vx /= norm;
    vy /= norm;
  }
  const double dz = std::clamp(delta_z, -1.0, 1.0);
  const std::array<float, 4> value{static_cast<float>(vx), static_cast<float>(vy),
                                   static_cast<float>(dz), static_cast<float>(mass)};
  CueField out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask(x, y) != 0) out.set(x, y, value);
    }
  }
  return out;
}

CueField merge_painted(const std::vector<CueField>& painted) {
  if (painted.empty()) {
    throw Error(ErrorCode::kDimensionMismatch, "nothing to merge");
  }
  const int w = painted.front().width();
  const int h = painted.front().height();
  CueField out(w, h);
  Grid<std::uint8_t> taken(w, h);
  for (const auto& layer : painted) {
    if (layer.width() != w || layer.height() != h) {
      throw Error(ErrorCode::kDimensionMismatch, "painted cues differ in size");
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (taken(x, y)) continue;
        const auto value = layer.at(x, y);
        if (value == std::array<float, 4>{}) continue;
        out.set(x, y, value);
        taken(x, y) = 1;
      }
    }
  }
  return out;
}

}  // namespace densecue::cue
