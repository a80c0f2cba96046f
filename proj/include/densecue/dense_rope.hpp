// Copyright 2026 The densecue Authors
// SPDX-License-Identifier: Apache-2.0
//
// Motion-token preparation: keep only the active control sites of a token
// mask, pad or thin them to a fixed budget, tag each kept token with the
// rotary code of its first-frame site and project it to model width.
//
// Sampling is reproducible across implementations. Item b of a batch draws
// from std::mt19937_64 seeded with (seed + b). A bounded draw in [0, r)
// takes raw 64-bit outputs u, rejects u >= 2^64 - (2^64 mod r), and returns
// u mod r. Thinning (m > N) runs N steps of a partial Fisher-Yates shuffle
// over positions 0..m-1 (step i swaps i with i + draw(m - i)), keeps the
// first N, and sorts the resulting sites. Replacement mode takes N
// independent draw(m) and sorts them.

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "densecue/grid.hpp"
#include "densecue/matrix.hpp"
#include "densecue/rope_math.hpp"

namespace densecue::dense_rope {

inline constexpr const char* kSamplerName = "mt19937_64-fisher-yates-v1";

/// Paired cos/sin tables with one row per token position.
class RopeBank {
 public:
  RopeBank() = default;
  explicit RopeBank(std::size_t half_width) : half_width_(half_width) {}

  static RopeBank from_codes(std::span<const rope::RotaryCode> codes);

  std::size_t rows() const noexcept {
    return half_width_ == 0 ? 0 : cos_.size() / half_width_;
  }
  std::size_t half_width() const noexcept { return half_width_; }

  std::span<const double> cos_row(std::size_t r) const {
    return {cos_.data() + r * half_width_, half_width_};
  }
  std::span<const double> sin_row(std::size_t r) const {
    return {sin_.data() + r * half_width_, half_width_};
  }

  void append_row(std::span<const double> cos_values, std::span<const double> sin_values);
  void append_angles(std::span<const double> angles);

  const std::vector<double>& cos_table() const noexcept { return cos_; }
  const std::vector<double>& sin_table() const noexcept { return sin_; }

  friend bool operator==(const RopeBank&, const RopeBank&) = default;

 private:
  std::size_t half_width_ = 0;
  std::vector<double> cos_;
  std::vector<double> sin_;
};

struct ActiveIndexSet {
  std::vector<std::size_t> indices;
  std::size_t size() const noexcept { return indices.size(); }
};

/// Policy when the active set is no larger than the budget.
enum class SmallSetMode {
  kTile,     ///< repeat the sorted set cyclically and truncate
  kReplace,  ///< draw with replacement, then sort
};

struct SampledIndices {
  std::vector<std::size_t> indices;
  std::size_t size() const noexcept { return indices.size(); }
};

/// Uniform integer in [0, bound) via rejection on raw 64-bit outputs.
std::uint64_t bounded_draw(std::mt19937_64& engine, std::uint64_t bound);

ActiveIndexSet collect_active(std::span<const std::uint8_t> mask_tokens);

SampledIndices sample_budget(const ActiveIndexSet& omega, std::size_t budget,
                             std::uint64_t seed, SmallSetMode mode = SmallSetMode::kTile);

struct SplitGather {
  RopeBank base;
  RopeBank gathered;
};

/// The last n rows of the bank belong to the image stream; the rest pass
/// through as the base. Gathered rows come from the image part at the
/// sampled positions, in sample order.
SplitGather split_and_gather(const RopeBank& bank, std::size_t n, const SampledIndices& sampled);

/// B x C x H x W feature tensor.
struct FeatureBatch {
  std::size_t batch = 0;
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> data;

  FeatureBatch() = default;
  FeatureBatch(std::size_t b, std::size_t c, std::size_t h, std::size_t w)
      : batch(b), channels(c), height(h), width(w), data(b * c * h * w, 0.0) {}

  double& at(std::size_t b, std::size_t c, std::size_t y, std::size_t x) {
    return data[((b * channels + c) * height + y) * width + x];
  }
  double at(std::size_t b, std::size_t c, std::size_t y, std::size_t x) const {
    return data[((b * channels + c) * height + y) * width + x];
  }
};

/// Non-overlapping patch x patch mean pooling of item b, flattened row-major
/// over the token grid. Result is n x C.
Matrix patchify(const FeatureBatch& features, std::size_t item, std::size_t patch);

struct MotionTokenBatch {
  std::vector<Matrix> tokens;             ///< per item, N x d
  std::vector<Matrix> gathered_features;  ///< per item, N x C' (pre-projection)
  std::vector<SampledIndices> indices;    ///< per item, length N
  double gain = 1.0;
};

struct PreparedMotion {
  MotionTokenBatch motion;
  std::vector<RopeBank> banks;  ///< per item, (T - n) + N rows
};

/// Full preparation for a batch. masks[b] is the h x w token-grid mask of
/// item b; the patch size is H / h and must also equal W / w. flow_proj maps
/// C' = C channels to model width d.
PreparedMotion prepare_motion_tokens(const std::vector<InstanceMask>& masks,
                                     const FeatureBatch& features, std::size_t budget,
                                     const RopeBank& bank, const Matrix& flow_proj,
                                     std::uint64_t seed, double gain = 1.0,
                                     SmallSetMode mode = SmallSetMode::kTile);

struct CueQK {
  std::vector<double> q;
  std::vector<double> k;
};

/// q = rot(x Wq), k = gain * rot(x Wk) with the token's first-frame code.
CueQK project_cue_qk(std::span<const double> token, const rope::RotaryCode& code, double gain,
                     const Matrix& w_q, const Matrix& w_k);

}  // namespace densecue::dense_rope
