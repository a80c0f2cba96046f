// Copyright 2026 The densecue Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <random>

#include "densecue/error.hpp"
#include "densecue/rope_math.hpp"

using namespace densecue;
using namespace densecue::rope;

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

TEST_CASE("absolute_pe at position 0 alternates 0 and 1") {
  const auto pe = absolute_pe(0, 8);
  for (std::size_t i = 0; i < 8; ++i) CHECK(pe[i] == (i % 2 == 0 ? 0.0 : 1.0));
}

TEST_CASE("absolute_pe width 4 at position 1") {
  const auto pe = absolute_pe(1, 4);
  CHECK(pe[0] == doctest::Approx(0.8414709848078965).epsilon(1e-15));
  CHECK(pe[1] == doctest::Approx(0.5403023058681398).epsilon(1e-15));
  CHECK(pe[2] == doctest::Approx(0.009999833334166664).epsilon(1e-14));
  CHECK(pe[3] == doctest::Approx(0.9999500004166653).epsilon(1e-15));
}

TEST_CASE("absolute_pe stays in [-1, 1] and rejects odd widths") {
  for (double m : {0.0, 3.0, 17.5, 1e5})
    for (double v : absolute_pe(m, 16)) CHECK(std::abs(v) <= 1.0);
  CHECK_THROWS_AS(absolute_pe(1, 5), Error);
}

TEST_CASE("rope_rotate basics") {
  const std::vector<double> x{0.3, -1.2, 2.0, 0.5};
  CHECK(rope_rotate(x, RotaryCode{{0.0, 0.0}}) == x);
  const double theta = 0.7;
  const auto r = rope_rotate(std::vector<double>{1.0, 0.0}, RotaryCode{{theta}});
  CHECK(r[0] == std::cos(theta));
  CHECK(r[1] == std::sin(theta));
  try {
    rope_rotate(std::vector<double>{1, 2, 3}, RotaryCode{{0.0}});
    FAIL("odd width accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kOddWidth);
  }
}

TEST_CASE("unrotate inverts rotate") {
  std::vector<double> x{1, 2, 3, 4, 5, 6};
  const std::vector<double> a{0.1, -2.0, 5.0};
  auto y = x;
  rope_rotate_inplace(y, a);
  rope_unrotate_inplace(y, a);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-14));
}

TEST_CASE("grid_to_angles") {
  for (double a : grid_to_angles({0, 0, 0}, 16).angles) CHECK(a == 0.0);
  const auto s = axis_split(16);
  CHECK(s.t == 8);
  CHECK(s.h == 4);
  CHECK(s.w == 4);
  const auto c1 = grid_to_angles({1, 2, 3}, 16);
  const auto c2 = grid_to_angles({5, 2, 3}, 16);
  for (std::size_t j = 0; j < 8; ++j) {
    if (j < s.t / 2) {
      CHECK(c1.angles[j] != c2.angles[j]);
    } else {
      CHECK(c1.angles[j] == c2.angles[j]);
    }
  }
  // Width-group ladder: pair j of a group of width g turns at base^(-2j/g).
  CHECK(c1.angles[4] == 2.0);
  CHECK(c1.angles[5] == doctest::Approx(2.0 * std::pow(10000.0, -0.5)).epsilon(1e-15));
  CHECK(c1.angles[6] == 3.0);
  try {
    grid_to_angles({0, 0, 0}, 12);
    FAIL("split accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIndivisibleSplit);
  }
}

TEST_CASE("rotation preserves norms and scores depend only on the offset") {
  std::mt19937_64 g(3);
  std::normal_distribution<double> n(0, 1);
  std::uniform_int_distribution<int> pos(-40, 40);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> q(16), k(16);
    for (auto& v : q) v = n(g);
    for (auto& v : k) v = n(g);
    const GridIndex a{pos(g), pos(g), pos(g)}, b{pos(g), pos(g), pos(g)};
    const GridIndex shift{pos(g), pos(g), pos(g)};
    const auto qa = rope_rotate(q, grid_to_angles(a, 16));
    CHECK(std::sqrt(dot(qa, qa)) == doctest::Approx(std::sqrt(dot(q, q))).epsilon(1e-13));
    const double s0 = dot(qa, rope_rotate(k, grid_to_angles(b, 16)));
    const double s1 = dot(rope_rotate(q, grid_to_angles({a.t + shift.t, a.h + shift.h, a.w + shift.w}, 16)),
                          rope_rotate(k, grid_to_angles({b.t + shift.t, b.h + shift.h, b.w + shift.w}, 16)));
    CHECK(std::abs(s0 - s1) < 1e-9);
  }
}

TEST_CASE("multi-head rotation applies the same code to every head") {
  std::vector<double> x{1, 2, 3, 4, 1, 2, 3, 4};
  const std::vector<double> a{0.4, 1.1};
  rotate_heads_inplace(x, a);
  for (std::size_t i = 0; i < 4; ++i) CHECK(x[i] == x[i + 4]);
  CHECK_THROWS_AS(rotate_heads_inplace(std::span<double>(x.data(), 6), std::vector<double>{1, 2, 3, 4}), Error);
}
