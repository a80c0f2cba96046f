// Copyright 2026 The densecue Authors
// SPDX-License-Identifier: Apache-2.0

#include "densecue/joint_attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "densecue/error.hpp"

namespace densecue::attention {

Stream TokenSequence::stream_of(std::size_t i) const noexcept {
  if (i < rgb_offset()) return Stream::kText;
  if (i < aux_offset()) return Stream::kRgb;
  if (i < motion_offset()) return Stream::kAux;
  return Stream::kMotion;
}

const rope::RotaryCode* TokenSequence::code_of(std::size_t i) const noexcept {
  switch (stream_of(i)) {
    case Stream::kText: return nullptr;
    case Stream::kRgb: return &video_codes[i - rgb_offset()];
    case Stream::kAux: return &video_codes[i - aux_offset()];
    case Stream::kMotion: return &motion_codes[i - motion_offset()];
  }
  return nullptr;
}

TokenSequence build_sequence(Matrix text, Matrix rgb, Matrix aux, Matrix motion,
                             std::vector<rope::RotaryCode> video_codes,
                             std::vector<rope::RotaryCode> motion_codes) {
  if (rgb.rows() != aux.rows()) {
    throw Error(ErrorCode::kLengthMismatch, "rgb has " + std::to_string(rgb.rows()) +
                                                " tokens, aux has " + std::to_string(aux.rows()));
  }
  if (video_codes.size() != rgb.rows() || motion_codes.size() != motion.rows()) {
    throw Error(ErrorCode::kLengthMismatch, "positional codes do not cover every video/motion token");
  }
  const std::size_t d = rgb.cols();
  if (aux.cols() != d || (text.rows() > 0 && text.cols() != d)) {
    throw Error(ErrorCode::kShapeMismatch, "token widths differ");
  }
  return TokenSequence{std::move(text), std::move(rgb), std::move(aux), std::move(motion),
                       std::move(video_codes), std::move(motion_codes)};
}

BlockParams BlockParams::init(std::size_t width, std::size_t cue_channels, std::size_t heads,
                              std::uint64_t seed) {
  if (heads == 0 || width % heads != 0) {
    throw Error(ErrorCode::kShapeMismatch, "width is not divisible by the head count");
  }
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(width)));
  auto random = [&](std::size_t r, std::size_t c) {
    Matrix m(r, c);
    for (double& x : m.data()) x = normal(engine);
    return m;
  };
  BlockParams p;
  p.heads = heads;
  p.w_q = random(width, width);
  p.w_k = random(width, width);
  p.w_v = random(width, width);
  p.w_o = random(width, width);
  p.flow_proj = random(cue_channels, width);
  p.aux_w_q = p.w_q;
  p.aux_w_k = p.w_k;
  p.aux_w_v = p.w_v;
  p.d_aux.assign(width, 0.0);
  p.gain = 1.0;
  return p;
}

BlockParams BlockParams::zeros_like(const BlockParams& o) {
  BlockParams p;
  p.heads = o.heads;
  p.w_q = Matrix(o.w_q.rows(), o.w_q.cols());
  p.w_k = Matrix(o.w_k.rows(), o.w_k.cols());
  p.w_v = Matrix(o.w_v.rows(), o.w_v.cols());
  p.aux_w_q = Matrix(o.aux_w_q.rows(), o.aux_w_q.cols());
  p.aux_w_k = Matrix(o.aux_w_k.rows(), o.aux_w_k.cols());
  p.aux_w_v = Matrix(o.aux_w_v.rows(), o.aux_w_v.cols());
  p.w_o = Matrix(o.w_o.rows(), o.w_o.cols());
  p.flow_proj = Matrix(o.flow_proj.rows(), o.flow_proj.cols());
  p.d_aux.assign(o.d_aux.size(), 0.0);
  p.gain = 0.0;
  return p;
}

void BlockParams::for_each(const std::function<void(std::string_view, std::span<double>)>& fn) {
  fn("w_q", w_q.data());
  fn("w_k", w_k.data());
  fn("w_v", w_v.data());
  fn("aux_w_q", aux_w_q.data());
  fn("aux_w_k", aux_w_k.data());
  fn("aux_w_v", aux_w_v.data());
  fn("w_o", w_o.data());
  fn("flow_proj", flow_proj.data());
  fn("d_aux", d_aux);
  fn("gain", std::span<double>(&gain, 1));
}

namespace {

struct PathWeights {
  const Matrix* q;
  const Matrix* k;
  const Matrix* v;
};

PathWeights path_for(Stream s, const BlockParams& p) {
  if (s == Stream::kAux) return {&p.aux_w_q, &p.aux_w_k, &p.aux_w_v};
  return {&p.w_q, &p.w_k, &p.w_v};
}

void check_shapes(const TokenSequence& seq, const BlockParams& p) {
  const std::size_t d = p.width();
  if (p.heads == 0 || d % p.heads != 0) {
    throw Error(ErrorCode::kShapeMismatch, "width is not divisible by the head count");
  }
  if (seq.rgb.cols() != d || seq.aux.cols() != d || (seq.text.rows() && seq.text.cols() != d)) {
    throw Error(ErrorCode::kShapeMismatch, "token width differs from block width");
  }
  if (seq.motion.rows() && seq.motion.cols() != p.flow_proj.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "motion feature width differs from cue projection");
  }
  const std::size_t half = p.head_width() / 2;
  for (const auto& c : seq.video_codes) {
    if (c.angles.size() != half) throw Error(ErrorCode::kShapeMismatch, "video code width");
  }
  for (const auto& c : seq.motion_codes) {
    if (c.angles.size() != half) throw Error(ErrorCode::kShapeMismatch, "motion code width");
  }
}

}  // namespace

ForwardResult attention_forward(const TokenSequence& seq, const BlockParams& params) {
  check_shapes(seq, params);
  const std::size_t n = seq.total();
  const std::size_t d = params.width();
  const std::size_t heads = params.heads;
  const std::size_t dh = params.head_width();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  ForwardResult r;
  r.proj_in = Matrix(n, d);
  r.q = Matrix(n, d);
  r.k = Matrix(n, d);
  r.v = Matrix(n, d);
  r.motion_k_ungained = Matrix(seq.motion_count(), d);
  Matrix residual(n, d);

  for (std::size_t i = 0; i < n; ++i) {
    const Stream s = seq.stream_of(i);
    auto u = r.proj_in.row(i);
    switch (s) {
      case Stream::kText: {
        auto x = seq.text.row(i);
        std::copy(x.begin(), x.end(), u.begin());
        break;
      }
      case Stream::kRgb: {
        auto x = seq.rgb.row(i - seq.rgb_offset());
        std::copy(x.begin(), x.end(), u.begin());
        break;
      }
      case Stream::kAux: {
        auto x = seq.aux.row(i - seq.aux_offset());
        for (std::size_t c = 0; c < d; ++c) u[c] = x[c] + params.d_aux[c];
        break;
      }
      case Stream::kMotion:
        row_times(seq.motion.row(i - seq.motion_offset()), params.flow_proj, u);
        break;
    }
    auto res = residual.row(i);
    if (s == Stream::kAux) {
      auto x = seq.aux.row(i - seq.aux_offset());
      std::copy(x.begin(), x.end(), res.begin());
    } else {
      std::copy(u.begin(), u.end(), res.begin());
    }

    const PathWeights w = path_for(s, params);
    row_times(u, *w.q, r.q.row(i));
    row_times(u, *w.k, r.k.row(i));
    row_times(u, *w.v, r.v.row(i));
    if (const rope::RotaryCode* code = seq.code_of(i)) {
      rope::rotate_heads_inplace(r.q.row(i), code->angles);
      rope::rotate_heads_inplace(r.k.row(i), code->angles);
    }
    if (s == Stream::kMotion) {
      auto kg = r.k.row(i);
      auto ku = r.motion_k_ungained.row(i - seq.motion_offset());
      std::copy(kg.begin(), kg.end(), ku.begin());
      for (double& x : kg) x *= params.gain;
    }
  }

  r.attn = Matrix(n, d);
  r.probs.assign(heads, Matrix(n, n));
  std::vector<double> scores(n);
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t off = h * dh;
    Matrix& p = r.probs[h];
    for (std::size_t i = 0; i < n; ++i) {
      const auto qi = r.q.row(i).subspan(off, dh);
      double row_max = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        scores[j] = dot(qi, r.k.row(j).subspan(off, dh)) * scale;
        row_max = std::max(row_max, scores[j]);
      }
      double denom = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        scores[j] = std::exp(scores[j] - row_max);
        denom += scores[j];
      }
      auto oi = r.attn.row(i).subspan(off, dh);
      for (std::size_t j = 0; j < n; ++j) {
        const double pij = scores[j] / denom;
        p(i, j) = pij;
        const auto vj = r.v.row(j).subspan(off, dh);
        for (std::size_t c = 0; c < dh; ++c) oi[c] += pij * vj[c];
      }
    }
  }

  r.out = matmul(r.attn, params.w_o);
  for (std::size_t i = 0; i < r.out.size(); ++i) r.out.data()[i] += residual.data()[i];
  return r;
}

namespace {

void accumulate_outer(Matrix& grad, std::span<const double> in, std::span<const double> dout) {
  for (std::size_t a = 0; a < in.size(); ++a) {
    if (in[a] == 0.0) continue;
    for (std::size_t b = 0; b < dout.size(); ++b) grad(a, b) += in[a] * dout[b];
  }
}

void accumulate_back(std::span<double> din, std::span<const double> dout, const Matrix& w) {
  for (std::size_t a = 0; a < w.rows(); ++a) din[a] += dot(w.row(a), dout);
}

}  // namespace

Gradients attention_backward(const TokenSequence& seq, const BlockParams& params,
                             const ForwardResult& fwd, const Matrix& upstream) {
  const std::size_t n = seq.total();
  const std::size_t d = params.width();
  const std::size_t dh = params.head_width();
  if (upstream.rows() != n || upstream.cols() != d) {
    throw Error(ErrorCode::kShapeMismatch, "upstream gradient shape differs from block output");
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Gradients g{BlockParams::zeros_like(params), Matrix(seq.text.rows(), seq.text.cols()),
              Matrix(seq.rgb.rows(), seq.rgb.cols()), Matrix(seq.aux.rows(), seq.aux.cols()),
              Matrix(seq.motion.rows(), seq.motion.cols())};

  g.params.w_o = matmul_tn(fwd.attn, upstream);
  const Matrix d_attn = matmul_nt(upstream, params.w_o);

  Matrix dq(n, d), dk(n, d), dv(n, d);
  std::vector<double> dp(n);
  for (std::size_t h = 0; h < params.heads; ++h) {
    const std::size_t off = h * dh;
    const Matrix& p = fwd.probs[h];
    for (std::size_t i = 0; i < n; ++i) {
      const auto doi = d_attn.row(i).subspan(off, dh);
      double weighted = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        dp[j] = dot(doi, fwd.v.row(j).subspan(off, dh));
        weighted += p(i, j) * dp[j];
      }
      const auto qi = fwd.q.row(i).subspan(off, dh);
      auto dqi = dq.row(i).subspan(off, dh);
      for (std::size_t j = 0; j < n; ++j) {
        const double pij = p(i, j);
        const double ds = pij * (dp[j] - weighted) * scale;
        const auto kj = fwd.k.row(j).subspan(off, dh);
        auto dkj = dk.row(j).subspan(off, dh);
        auto dvj = dv.row(j).subspan(off, dh);
        for (std::size_t c = 0; c < dh; ++c) {
          dqi[c] += ds * kj[c];
          dkj[c] += ds * qi[c];
          dvj[c] += pij * doi[c];
        }
      }
    }
  }

  std::vector<double> du(d);
  for (std::size_t i = 0; i < n; ++i) {
    const Stream s = seq.stream_of(i);
    auto dqi = dq.row(i);
    auto dki = dk.row(i);
    if (s == Stream::kMotion) {
      const auto ku = fwd.motion_k_ungained.row(i - seq.motion_offset());
      g.params.gain += dot(dki, ku);
      for (double& x : dki) x *= params.gain;
    }
    if (const rope::RotaryCode* code = seq.code_of(i)) {
      rope::unrotate_heads_inplace(dqi, code->angles);
      rope::unrotate_heads_inplace(dki, code->angles);
    }

    const auto u = fwd.proj_in.row(i);
    const bool aux = s == Stream::kAux;
    Matrix& gq = aux ? g.params.aux_w_q : g.params.w_q;
    Matrix& gk = aux ? g.params.aux_w_k : g.params.w_k;
    Matrix& gv = aux ? g.params.aux_w_v : g.params.w_v;
    accumulate_outer(gq, u, dqi);
    accumulate_outer(gk, u, dki);
    accumulate_outer(gv, u, dv.row(i));

    const PathWeights w = path_for(s, params);
    std::fill(du.begin(), du.end(), 0.0);
    accumulate_back(du, dqi, *w.q);
    accumulate_back(du, dki, *w.k);
    accumulate_back(du, dv.row(i), *w.v);

    const auto dyi = upstream.row(i);
    switch (s) {
      case Stream::kText: {
        auto dx = g.text.row(i);
        for (std::size_t c = 0; c < d; ++c) dx[c] = du[c] + dyi[c];
        break;
      }
      case Stream::kRgb: {
        auto dx = g.rgb.row(i - seq.rgb_offset());
        for (std::size_t c = 0; c < d; ++c) dx[c] = du[c] + dyi[c];
        break;
      }
      case Stream::kAux: {
        auto dx = g.aux.row(i - seq.aux_offset());
        for (std::size_t c = 0; c < d; ++c) {
          dx[c] = du[c] + dyi[c];
          g.params.d_aux[c] += du[c];
        }
        break;
      }
      case Stream::kMotion: {
        for (std::size_t c = 0; c < d; ++c) du[c] += dyi[c];
        const auto f = seq.motion.row(i - seq.motion_offset());
        accumulate_outer(g.params.flow_proj, f, du);
        auto df = g.motion.row(i - seq.motion_offset());
        accumulate_back(df, du, params.flow_proj);
        break;
      }
    }
  }
  return g;
}

}  // namespace densecue::attention
