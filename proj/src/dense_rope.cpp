// Copyright 2026 The densecue Authors
// SPDX-License-Identifier: Apache-2.0

#include "densecue/dense_rope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "densecue/error.hpp"

namespace densecue::dense_rope {

RopeBank RopeBank::from_codes(std::span<const rope::RotaryCode> codes) {
  if (codes.empty()) return {};
  RopeBank bank(codes.front().angles.size());
  for (const auto& code : codes) bank.append_angles(code.angles);
  return bank;
}

void RopeBank::append_row(std::span<const double> cos_values, std::span<const double> sin_values) {
  if (cos_values.size() != half_width_ || sin_values.size() != half_width_) {
    throw Error(ErrorCode::kShapeMismatch, "bank row width mismatch");
  }
  cos_.insert(cos_.end(), cos_values.begin(), cos_values.end());
  sin_.insert(sin_.end(), sin_values.begin(), sin_values.end());
}

void RopeBank::append_angles(std::span<const double> angles) {
  if (angles.size() != half_width_) {
    throw Error(ErrorCode::kShapeMismatch, "bank row width mismatch");
  }
  for (double a : angles) {
    cos_.push_back(std::cos(a));
    sin_.push_back(std::sin(a));
  }
}

std::uint64_t bounded_draw(std::mt19937_64& engine, std::uint64_t bound) {
  // 2^64 mod bound, computed without overflow.
  const std::uint64_t rem = (std::numeric_limits<std::uint64_t>::max() % bound + 1) % bound;
  for (;;) {
    const std::uint64_t u = engine();
    if (rem == 0 || u < std::numeric_limits<std::uint64_t>::max() - rem + 1) return u % bound;
  }
}

ActiveIndexSet collect_active(std::span<const std::uint8_t> mask_tokens) {
  ActiveIndexSet out;
  for (std::size_t i = 0; i < mask_tokens.size(); ++i) {
    if (mask_tokens[i] != 0) out.indices.push_back(i);
  }
  return out;
}

SampledIndices sample_budget(const ActiveIndexSet& omega, std::size_t budget,
                             std::uint64_t seed, SmallSetMode mode) {
  const std::size_t m = omega.size();
  if (m == 0) {
    throw Error(ErrorCode::kEmptyActiveSet, "no active control sites");
  }
  if (budget == 0) {
    throw Error(ErrorCode::kOutOfRange, "token budget must be positive");
  }

  SampledIndices out;
  out.indices.reserve(budget);
  if (m > budget) {
    std::mt19937_64 engine(seed);
    std::vector<std::size_t> pos(m);
    std::iota(pos.begin(), pos.end(), std::size_t{0});
    for (std::size_t i = 0; i < budget; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(bounded_draw(engine, m - i));
      std::swap(pos[i], pos[j]);
    }
    for (std::size_t i = 0; i < budget; ++i) out.indices.push_back(omega.indices[pos[i]]);
    std::sort(out.indices.begin(), out.indices.end());
  } else if (mode == SmallSetMode::kTile) {
    for (std::size_t i = 0; i < budget; ++i) out.indices.push_back(omega.indices[i % m]);
  } else {
    std::mt19937_64 engine(seed);
    for (std::size_t i = 0; i < budget; ++i) {
      out.indices.push_back(omega.indices[bounded_draw(engine, m)]);
    }
    std::sort(out.indices.begin(), out.indices.end());
  }
  return out;
}

SplitGather split_and_gather(const RopeBank& bank, std::size_t n, const SampledIndices& sampled) {
  const std::size_t total = bank.rows();
  if (total < n) {
    throw Error(ErrorCode::kBankTooSmall, "bank has " + std::to_string(total) +
                                              " rows, image stream needs " + std::to_string(n));
  }
  const std::size_t base_rows = total - n;
  SplitGather out{RopeBank(bank.half_width()), RopeBank(bank.half_width())};
  for (std::size_t r = 0; r < base_rows; ++r) out.base.append_row(bank.cos_row(r), bank.sin_row(r));
  for (std::size_t idx : sampled.indices) {
    if (idx >= n) {
      throw Error(ErrorCode::kOutOfRange, "sampled index outside the image stream");
    }
    out.gathered.append_row(bank.cos_row(base_rows + idx), bank.sin_row(base_rows + idx));
  }
  return out;
}

Matrix patchify(const FeatureBatch& features, std::size_t item, std::size_t patch) {
  if (patch == 0 || features.height % patch != 0 || features.width % patch != 0) {
    throw Error(ErrorCode::kShapeMismatch, "feature grid is not divisible by the patch size");
  }
  const std::size_t th = features.height / patch;
  const std::size_t tw = features.width / patch;
  const double area = static_cast<double>(patch * patch);
  Matrix out(th * tw, features.channels);
  for (std::size_t ty = 0; ty < th; ++ty) {
    for (std::size_t tx = 0; tx < tw; ++tx) {
      for (std::size_t c = 0; c < features.channels; ++c) {
        double acc = 0.0;
        for (std::size_t y = 0; y < patch; ++y) {
          for (std::size_t x = 0; x < patch; ++x) {
            acc += features.at(item, c, ty * patch + y, tx * patch + x);
          }
        }
        out(ty * tw + tx, c) = acc / area;
      }
    }
  }
  return out;
}

PreparedMotion prepare_motion_tokens(const std::vector<InstanceMask>& masks,
                                     const FeatureBatch& features, std::size_t budget,
                                     const RopeBank& bank, const Matrix& flow_proj,
                                     std::uint64_t seed, double gain, SmallSetMode mode) {
  if (masks.size() != features.batch || masks.empty()) {
    throw Error(ErrorCode::kShapeMismatch, "mask batch and feature batch differ");
  }
  const int h = masks.front().height();
  const int w = masks.front().width();
  for (const auto& m : masks) {
    if (!m.same_shape(w, h)) throw Error(ErrorCode::kShapeMismatch, "token masks differ in size");
  }
  if (h <= 0 || w <= 0 || features.height % static_cast<std::size_t>(h) != 0 ||
      features.width % static_cast<std::size_t>(w) != 0 ||
      features.height / static_cast<std::size_t>(h) != features.width / static_cast<std::size_t>(w)) {
    throw Error(ErrorCode::kShapeMismatch, "mask token grid does not match the patchified features");
  }
  if (flow_proj.rows() != features.channels) {
    throw Error(ErrorCode::kShapeMismatch, "projection input width differs from feature channels");
  }
  const std::size_t patch = features.height / static_cast<std::size_t>(h);
  const std::size_t n = static_cast<std::size_t>(h) * static_cast<std::size_t>(w);

  PreparedMotion out;
  out.motion.gain = gain;
  for (std::size_t b = 0; b < masks.size(); ++b) {
    const Matrix x = patchify(features, b, patch);
    const ActiveIndexSet omega = collect_active(masks[b].data());
    if (omega.size() == 0) {
      throw Error(ErrorCode::kEmptyActiveSet, "batch item " + std::to_string(b) + " has no active sites");
    }
    SampledIndices sampled = sample_budget(omega, budget, seed + b, mode);
    SplitGather split = split_and_gather(bank, n, sampled);

    Matrix gathered(budget, features.channels);
    for (std::size_t i = 0; i < budget; ++i) {
      const auto src = x.row(sampled.indices[i]);
      std::copy(src.begin(), src.end(), gathered.row(i).begin());
    }

    RopeBank updated = std::move(split.base);
    for (std::size_t r = 0; r < split.gathered.rows(); ++r) {
      updated.append_row(split.gathered.cos_row(r), split.gathered.sin_row(r));
    }

    out.motion.tokens.push_back(matmul(gathered, flow_proj));
    out.motion.gathered_features.push_back(std::move(gathered));
    out.motion.indices.push_back(std::move(sampled));
    out.banks.push_back(std::move(updated));
  }
  return out;
}

CueQK project_cue_qk(std::span<const double> token, const rope::RotaryCode& code, double gain,
                     const Matrix& w_q, const Matrix& w_k) {
  if (token.size() != w_q.rows() || token.size() != w_k.rows() || w_q.cols() != w_k.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "token width differs from projection input");
  }
  CueQK out{std::vector<double>(w_q.cols()), std::vector<double>(w_k.cols())};
  row_times(token, w_q, out.q);
  row_times(token, w_k, out.k);
  rope::rotate_heads_inplace(out.q, code.angles);
  rope::rotate_heads_inplace(out.k, code.angles);
  for (double& v : out.k) v *= gain;
  return out;
}

}  // namespace densecue::dense_rope
