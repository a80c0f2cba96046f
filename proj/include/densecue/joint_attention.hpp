// Copyright 2026 The densecue Authors
// SPDX-License-Identifier: Apache-2.0
//
// Toy transformer block with full self-attention over [text; rgb; aux; motion].
// RGB and aux tokens at the same index share a rotary code; aux tokens get the
// domain vector added and use their own projections; motion tokens come in as
// gathered cue features, go through the cue projection, carry first-frame
// codes, and have their keys scaled by a learnable gain.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "densecue/matrix.hpp"
#include "densecue/rope_math.hpp"

namespace densecue::attention {

enum class Stream : std::uint8_t { kText, kRgb, kAux, kMotion };

struct TokenSequence {
  Matrix text;    ///< T x d, no positional code
  Matrix rgb;     ///< L x d
  Matrix aux;     ///< L x d
  Matrix motion;  ///< N x C', gathered cue features before projection
  std::vector<rope::RotaryCode> video_codes;   ///< L, shared by rgb[m] and aux[m]
  std::vector<rope::RotaryCode> motion_codes;  ///< N, first-frame site codes

  std::size_t text_count() const noexcept { return text.rows(); }
  std::size_t video_count() const noexcept { return rgb.rows(); }
  std::size_t motion_count() const noexcept { return motion.rows(); }
  std::size_t total() const noexcept { return text.rows() + 2 * rgb.rows() + motion.rows(); }

  std::size_t rgb_offset() const noexcept { return text.rows(); }
  std::size_t aux_offset() const noexcept { return text.rows() + rgb.rows(); }
  std::size_t motion_offset() const noexcept { return text.rows() + 2 * rgb.rows(); }

  Stream stream_of(std::size_t i) const noexcept;
  /// Code applied to token i, or nullptr for text tokens.
  const rope::RotaryCode* code_of(std::size_t i) const noexcept;
};

/// Checks the layout rules and assembles the sequence.
TokenSequence build_sequence(Matrix text, Matrix rgb, Matrix aux, Matrix motion,
                             std::vector<rope::RotaryCode> video_codes,
                             std::vector<rope::RotaryCode> motion_codes);

struct BlockParams {
  std::size_t heads = 1;
  Matrix w_q, w_k, w_v;              ///< d x d, text / rgb / motion path
  Matrix aux_w_q, aux_w_k, aux_w_v;  ///< d x d, aux path
  Matrix w_o;                        ///< d x d
  Matrix flow_proj;                  ///< C' x d
  std::vector<double> d_aux;         ///< zero at init
  double gain = 1.0;

  std::size_t width() const noexcept { return w_q.rows(); }
  std::size_t head_width() const noexcept { return width() / heads; }

  /// Random projections with std 1/sqrt(d); aux projections are copies of
  /// the shared ones, d_aux is zero and the gain is one.
  static BlockParams init(std::size_t width, std::size_t cue_channels, std::size_t heads,
                          std::uint64_t seed);
  /// Same shapes, every entry zero (gradient accumulator).
  static BlockParams zeros_like(const BlockParams& other);

  /// Visits every trainable tensor; the gain is a one-element span.
  void for_each(const std::function<void(std::string_view, std::span<double>)>& fn);
};

struct ForwardResult {
  Matrix attn;  ///< per-token attention output O = softmax(QK^T / sqrt(d_h)) V
  Matrix out;   ///< block output Y = X + O W_o

  // Cached intermediates for the backward pass.
  Matrix proj_in;           ///< per-token input to the q/k/v projections
  Matrix q, k, v;           ///< rotated (and, for motion keys, gained)
  Matrix motion_k_ungained; ///< N x d, rotated motion keys before the gain
  std::vector<Matrix> probs;  ///< per head, n x n
};

ForwardResult attention_forward(const TokenSequence& seq, const BlockParams& params);

struct Gradients {
  BlockParams params;
  Matrix text, rgb, aux, motion;
};

/// Exact gradients of sum(upstream .* Y). upstream is total() x d.
Gradients attention_backward(const TokenSequence& seq, const BlockParams& params,
                             const ForwardResult& fwd, const Matrix& upstream);

}  // namespace densecue::attention
