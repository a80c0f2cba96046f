// Copyright 2026 The densecue Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <random>

#include "densecue/error.hpp"
#include "densecue/joint_attention.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace densecue;
using namespace densecue::attention;

TEST_CASE("build_sequence checks lengths") {
  std::mt19937_64 g(1);
  const auto m = [&](std::size_t r, std::size_t c) { return fixture::random_matrix(r, c, g); };
  const auto code = rope::grid_to_angles({0, 0, 0}, 8);
  CHECK_THROWS_AS(build_sequence(m(1, 8), m(2, 8), m(3, 8), m(0, 4), {code, code}, {}), Error);
  CHECK_THROWS_AS(build_sequence(m(1, 8), m(2, 8), m(2, 8), m(0, 4), {code}, {}), Error);
  CHECK_THROWS_AS(build_sequence(m(1, 8), m(2, 8), m(2, 8), m(2, 4), {code, code}, {code}), Error);
  try {
    build_sequence(m(1, 8), m(2, 8), m(3, 8), m(0, 4), {code, code}, {});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kLengthMismatch);
  }
  const auto seq = build_sequence(m(1, 8), m(2, 8), m(2, 8), m(1, 4), {code, code}, {code});
  CHECK(seq.total() == 6);
  CHECK(seq.stream_of(0) == Stream::kText);
  CHECK(seq.stream_of(2) == Stream::kRgb);
  CHECK(seq.stream_of(4) == Stream::kAux);
  CHECK(seq.stream_of(5) == Stream::kMotion);
  CHECK(seq.code_of(0) == nullptr);
  CHECK(seq.code_of(1) == seq.code_of(3));
}

TEST_CASE("single token attends to itself") {
  std::mt19937_64 g(2);
  const auto seq = build_sequence(fixture::random_matrix(1, 8, g), Matrix(0, 8), Matrix(0, 8), Matrix(0, 4), {}, {});
  const auto p = BlockParams::init(8, 4, 1, 5);
  const auto fwd = attention_forward(seq, p);
  const Matrix v = matmul(seq.text, p.w_v);
  for (std::size_t c = 0; c < 8; ++c) CHECK(fwd.attn(0, c) == v(0, c));
}

TEST_CASE("identical keys average the values") {
  std::mt19937_64 g(3);
  Matrix text = fixture::random_matrix(5, 8, g);
  auto p = BlockParams::init(8, 4, 1, 6);
  // Zero key projection makes every score equal.
  p.w_k = Matrix(8, 8);
  const auto seq = build_sequence(text, Matrix(0, 8), Matrix(0, 8), Matrix(0, 4), {}, {});
  const auto fwd = attention_forward(seq, p);
  const Matrix v = matmul(text, p.w_v);
  for (std::size_t c = 0; c < 8; ++c) {
    double mean = 0;
    for (std::size_t j = 0; j < 5; ++j) mean += v(j, c) / 5.0;
    for (std::size_t i = 0; i < 5; ++i) CHECK(fwd.attn(i, c) == doctest::Approx(mean).epsilon(1e-13));
  }
}

TEST_CASE("forward matches the naive reference") {
  for (std::size_t heads : {1u, 2u}) {
    std::mt19937_64 g(10 + heads);
    fixture::SeqShape shape{1, 2, 1, 8 * heads, 3, heads};
    const auto seq = fixture::random_sequence(shape, g);
    auto p = BlockParams::init(shape.width, shape.cue_channels, heads, 4);
    fixture::scramble(p, g);
    const auto fwd = attention_forward(seq, p);
    const auto ref = oracle::naive_attention(seq, p);
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(fwd.attn.data()[i] - ref.data()[i]) < 1e-12);
    for (const auto& pr : fwd.probs)
      for (std::size_t r = 0; r < pr.rows(); ++r) {
        double s = 0;
        for (std::size_t c = 0; c < pr.cols(); ++c) {
          CHECK(pr(r, c) >= 0.0);
          s += pr(r, c);
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
      }
  }
}

TEST_CASE("large scores stay finite") {
  std::mt19937_64 g(4);
  const auto seq = fixture::random_sequence({}, g);
  auto p = BlockParams::init(8, 4, 1, 1);
  for (std::size_t i = 0; i < p.w_q.size(); ++i) p.w_q.data()[i] *= 300.0;
  const auto fwd = attention_forward(seq, p);
  for (double v : fwd.out.data()) CHECK(std::isfinite(v));
}

TEST_CASE("zero upstream gives zero gradients") {
  std::mt19937_64 g(5);
  const auto seq = fixture::random_sequence({}, g);
  auto p = BlockParams::init(8, 4, 1, 2);
  fixture::scramble(p, g);
  const auto fwd = attention_forward(seq, p);
  auto grads = attention_backward(seq, p, fwd, Matrix(seq.total(), 8));
  grads.params.for_each([](std::string_view, std::span<double> t) {
    for (double v : t) CHECK(v == 0.0);
  });
  for (const Matrix* m : {&grads.text, &grads.rgb, &grads.aux, &grads.motion})
    for (double v : m->data()) CHECK(v == 0.0);
}

TEST_CASE("backward matches central differences") {
  std::mt19937_64 g(6);
  fixture::SeqShape shape{2, 3, 3, 8, 4};
  const auto seq = fixture::random_sequence(shape, g);
  auto p = BlockParams::init(8, 4, 1, 3);
  fixture::scramble(p, g);
  const Matrix up = fixture::random_matrix(seq.total(), 8, g);
  const auto objective = [&](const BlockParams& q) {
    const auto f = attention_forward(seq, q);
    double s = 0;
    for (std::size_t i = 0; i < up.size(); ++i) s += up.data()[i] * f.out.data()[i];
    return s;
  };
  const auto grads = attention_backward(seq, p, attention_forward(seq, p), up);
  std::vector<double> analytic;
  auto gp = grads.params;
  gp.for_each([&](std::string_view, std::span<double> t) { analytic.insert(analytic.end(), t.begin(), t.end()); });
  std::size_t idx = 0;
  double worst = 0;
  p.for_each([&](std::string_view, std::span<double> t) {
    for (double& v : t) {
      const double keep = v;
      v = keep + 1e-5;
      const double hi = objective(p);
      v = keep - 1e-5;
      const double lo = objective(p);
      v = keep;
      worst = std::max(worst, oracle::rel_err(analytic[idx++], (hi - lo) / 2e-5));
    }
  });
  CHECK(idx == analytic.size());
  CHECK(worst < 1e-4);
}

TEST_CASE("key gain sharpens attention onto a matching motion token") {
  std::mt19937_64 g(8);
  auto p = BlockParams::init(8, 8, 1, 9);
  p.flow_proj = Matrix::identity(8);
  p.w_q = Matrix::identity(8);
  p.w_k = Matrix::identity(8);
  // One text query aligned with the single motion token's key.
  Matrix text(1, 8), motion(1, 8);
  for (std::size_t c = 0; c < 8; ++c) text(0, c) = motion(0, c) = c % 2 ? 0.5 : -0.5;
  Matrix rgb = fixture::random_matrix(2, 8, g, 0.1);
  const auto code = rope::grid_to_angles({0, 0, 0}, 8);
  const auto seq = build_sequence(text, rgb, rgb, motion, {code, code}, {code});
  double last = -1;
  for (double gain : {0.0, 1.0, 2.0, 4.0}) {
    p.gain = gain;
    const auto fwd = attention_forward(seq, p);
    const double w = fwd.probs[0](0, seq.motion_offset());
    CHECK(w > last);
    last = w;
  }
}
