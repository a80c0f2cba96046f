// Copyright 2026 The densecue Authors
// SPDX-License-Identifier: Apache-2.0

#include "densecue/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "densecue/cue_field.hpp"
#include "densecue/dense_rope.hpp"
#include "densecue/diffusion_loss.hpp"
#include "densecue/error.hpp"
#include "densecue/io.hpp"
#include "densecue/joint_attention.hpp"
#include "densecue/metrics.hpp"
#include "densecue/rope_math.hpp"
#include "densecue/sim.hpp"

namespace densecue::selfcheck {

namespace {

using Engine = std::mt19937_64;

double uniform(Engine& e, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(e);
}

std::size_t pick(Engine& e, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(e);
}

Matrix random_matrix(Engine& e, std::size_t r, std::size_t c) {
  Matrix m(r, c);
  for (double& x : m.data()) x = uniform(e, -1.0, 1.0);
  return m;
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(3);
  ss << v;
  return ss.str();
}

CheckResult budget_invariants(std::uint64_t seed) {
  Engine e(seed);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = pick(e, 1, 128);
    std::vector<std::uint8_t> mask(n);
    const double density = uniform(e, 0.0, 1.0);
    for (auto& b : mask) b = uniform(e, 0.0, 1.0) < density;
    mask[pick(e, 0, n - 1)] = 1;
    const auto omega = dense_rope::collect_active(mask);
    const std::size_t budget = pick(e, 1, 96);
    const std::uint64_t s = e();
    const auto mode = trial % 2 ? dense_rope::SmallSetMode::kReplace : dense_rope::SmallSetMode::kTile;
    const auto a = dense_rope::sample_budget(omega, budget, s, mode);
    const auto b = dense_rope::sample_budget(omega, budget, s, mode);
    if (a.size() != budget) return {"dense_rope.budget", false, "wrong token count"};
    if (a.indices != b.indices) return {"dense_rope.budget", false, "not deterministic"};
    for (auto i : a.indices) {
      if (i >= n || mask[i] == 0) return {"dense_rope.budget", false, "sampled an inactive site"};
    }
    if (omega.size() > budget && std::set<std::size_t>(a.indices.begin(), a.indices.end()).size() != budget) {
      return {"dense_rope.budget", false, "duplicate sites while thinning"};
    }
  }
  return {"dense_rope.budget", true, "2000 random masks"};
}

CheckResult bank_conservation(std::uint64_t seed) {
  Engine e(seed);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t half = 2 * pick(e, 1, 4);
    const std::size_t n = pick(e, 1, 40);
    const std::size_t base = pick(e, 0, 8);
    std::vector<rope::RotaryCode> codes(n + base);
    for (auto& c : codes) {
      c.angles.resize(half);
      for (auto& a : c.angles) a = uniform(e, -10.0, 10.0);
    }
    const auto bank = dense_rope::RopeBank::from_codes(codes);
    std::vector<std::uint8_t> mask(n);
    for (auto& b : mask) b = uniform(e, 0.0, 1.0) < 0.5;
    mask[0] = 1;
    const auto sampled = dense_rope::sample_budget(dense_rope::collect_active(mask), pick(e, 1, 20), e());
    const auto split = dense_rope::split_and_gather(bank, n, sampled);
    for (std::size_t r = 0; r < base; ++r) {
      if (!std::ranges::equal(split.base.cos_row(r), bank.cos_row(r)) ||
          !std::ranges::equal(split.base.sin_row(r), bank.sin_row(r))) {
        return {"dense_rope.bank", false, "base rows modified"};
      }
    }
    for (std::size_t r = 0; r < sampled.size(); ++r) {
      if (!std::ranges::equal(split.gathered.cos_row(r), bank.cos_row(base + sampled.indices[r])) ||
          !std::ranges::equal(split.gathered.sin_row(r), bank.sin_row(base + sampled.indices[r]))) {
        return {"dense_rope.bank", false, "gathered row differs from source"};
      }
    }
  }
  return {"dense_rope.bank", true, "200 random banks"};
}

CheckResult rope_properties(std::uint64_t seed) {
  Engine e(seed);
  double worst_norm = 0.0;
  double worst_shift = 0.0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t d = 8 * pick(e, 1, 4);
    std::vector<double> q(d), k(d);
    for (auto& x : q) x = uniform(e, -1.0, 1.0);
    for (auto& x : k) x = uniform(e, -1.0, 1.0);
    const rope::GridIndex a{static_cast<int>(pick(e, 0, 40)), static_cast<int>(pick(e, 0, 40)),
                            static_cast<int>(pick(e, 0, 40))};
    const auto rq = rope::rope_rotate(q, rope::grid_to_angles(a, d));
    double n0 = 0.0, n1 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      n0 += q[i] * q[i];
      n1 += rq[i] * rq[i];
    }
    worst_norm = std::max(worst_norm, std::abs(std::sqrt(n0) - std::sqrt(n1)));
    const rope::GridIndex b{static_cast<int>(pick(e, 0, 40)), static_cast<int>(pick(e, 0, 40)),
                            static_cast<int>(pick(e, 0, 40))};
    const int s = static_cast<int>(pick(e, 0, 30));
    const rope::GridIndex as{a.t + s, a.h + s, a.w + s};
    const rope::GridIndex bs{b.t + s, b.h + s, b.w + s};
    const double d0 = dot(rope::rope_rotate(q, rope::grid_to_angles(a, d)), rope::rope_rotate(k, rope::grid_to_angles(b, d)));
    const double d1 = dot(rope::rope_rotate(q, rope::grid_to_angles(as, d)), rope::rope_rotate(k, rope::grid_to_angles(bs, d)));
    worst_shift = std::max(worst_shift, std::abs(d0 - d1));
  }
  const bool ok = worst_norm <= 1e-12 && worst_shift <= 1e-9;
  return {"rope.properties", ok, "norm err " + fmt(worst_norm) + ", shift err " + fmt(worst_shift)};
}

attention::TokenSequence random_sequence(Engine& e, std::size_t d, std::size_t heads, std::size_t cue_c) {
  const std::size_t t = pick(e, 0, 2);
  const std::size_t l = pick(e, 1, 4);
  const std::size_t n = pick(e, 1, 3);
  std::vector<rope::RotaryCode> vc, mc;
  for (std::size_t i = 0; i < l; ++i) {
    vc.push_back(rope::grid_to_angles({static_cast<int>(pick(e, 0, 3)), static_cast<int>(pick(e, 0, 3)),
                                       static_cast<int>(pick(e, 0, 3))}, d / heads));
  }
  for (std::size_t i = 0; i < n; ++i) {
    mc.push_back(rope::first_frame_code(static_cast<int>(pick(e, 0, 3)), static_cast<int>(pick(e, 0, 3)), d / heads));
  }
  return attention::build_sequence(random_matrix(e, t, d), random_matrix(e, l, d), random_matrix(e, l, d),
                                   random_matrix(e, n, cue_c), vc, mc);
}

CheckResult gradient_fidelity(std::uint64_t seed) {
  Engine e(seed);
  double worst = 0.0;
  for (int cfg = 0; cfg < 3; ++cfg) {
    const std::size_t heads = cfg == 2 ? 2 : 1;
    const std::size_t d = 8 * heads;
    const auto seq = random_sequence(e, d, heads, 3);
    diffusion::ToyModel model = diffusion::ToyModel::init(d, 3, heads, d, e());
    for (double& x : model.head_rgb.data()) x = uniform(e, -0.5, 0.5);
    for (double& x : model.head_aux.data()) x = uniform(e, -0.5, 0.5);
    for (double& x : model.block.d_aux) x = uniform(e, -0.3, 0.3);
    model.block.gain = uniform(e, 0.5, 2.0);
    diffusion::ToyExample ex{seq, random_matrix(e, seq.video_count(), d)};
    const double lambda = uniform(e, 0.1, 2.0);
    const auto lg = diffusion::loss_and_grad(model, ex, lambda);
    std::vector<std::span<double>> analytic;
    diffusion::ToyModel grad = lg.grad;
    grad.for_each([&](std::string_view, std::span<double> s) { analytic.push_back(s); });
    std::size_t k = 0;
    model.for_each([&](std::string_view, std::span<double> s) {
      for (std::size_t i = 0; i < s.size(); ++i) {
        const double saved = s[i];
        const double h = 1e-5;
        s[i] = saved + h;
        const double up = diffusion::evaluate(model, ex, lambda).total;
        s[i] = saved - h;
        const double down = diffusion::evaluate(model, ex, lambda).total;
        s[i] = saved;
        const double fd = (up - down) / (2 * h);
        const double a = analytic[k][i];
        worst = std::max(worst, std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-6}));
      }
      ++k;
    });
  }
  return {"attention.gradients", worst < 1e-4, "max rel err " + fmt(worst)};
}

CheckResult init_equivalence(std::uint64_t seed) {
  Engine e(seed);
  const std::size_t d = 16;
  auto seq = random_sequence(e, d, 1, 4);
  seq.aux = seq.rgb;
  const auto params = attention::BlockParams::init(d, 4, 1, e());
  const auto fwd = attention::attention_forward(seq, params);
  for (std::size_t m = 0; m < seq.video_count(); ++m) {
    if (!std::ranges::equal(fwd.out.row(seq.rgb_offset() + m), fwd.out.row(seq.aux_offset() + m))) {
      return {"attention.init_equivalence", false, "rgb and aux outputs differ"};
    }
  }
  return {"attention.init_equivalence", true, "exact"};
}

CheckResult cue_composition(std::uint64_t seed) {
  Engine e(seed);
  for (int trial = 0; trial < 30; ++trial) {
    const int w = static_cast<int>(pick(e, 8, 40));
    const int h = static_cast<int>(pick(e, 8, 40));
    std::vector<cue::InstanceSpec> specs(pick(e, 1, 4));
    for (auto& s : specs) {
      s.mask = InstanceMask(w, h);
      const double cx = uniform(e, 0, w), cy = uniform(e, 0, h), r = uniform(e, 2, 10);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) s.mask(x, y) = std::hypot(x + 0.5 - cx, y + 0.5 - cy) <= r;
      s.mask(static_cast<int>(pick(e, 0, w - 1)), static_cast<int>(pick(e, 0, h - 1))) = 1;
      s.arrow = {{cx, cy}, {cx + uniform(e, -8, 8), cy + uniform(e, -8, 8)}, uniform(e, -1, 1)};
      s.mass = uniform(e, 0.1, 1.0);
    }
    const double sigma = cue::default_sigma(w, h);
    const auto field = cue::compose_cue_field(specs, sigma);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        bool inside = false;
        for (const auto& s : specs) inside = inside || s.mask(x, y);
        const auto v = field.at(x, y);
        if (!inside && v != std::array<float, 4>{}) return {"cue.compose", false, "nonzero outside masks"};
        if (std::hypot(v[0], v[1]) > 1.0 + 1e-6 || std::abs(v[2]) > 1.0f) {
          return {"cue.compose", false, "field out of bounds"};
        }
      }
    }
  }
  return {"cue.compose", true, "30 random specs"};
}

CheckResult training_closure(std::uint64_t seed) {
  Engine e(seed);
  double worst_flow = 0.0;
  double worst_depth = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    sim::Scene scene;
    scene.width = 48;
    scene.height = 48;
    scene.frames = 3;
    sim::Ball b;
    b.center = {uniform(e, 18, 30), uniform(e, 18, 30)};
    b.velocity = {uniform(e, -2, 2), uniform(e, -2, 2)};
    b.radius = uniform(e, 4, 7);
    b.z = uniform(e, 0.3, 0.7);
    b.vz = uniform(e, -0.02, 0.02);
    scene.balls = {b};
    const auto clip = sim::render_clip(scene);
    const auto mean = cue::derive_mean_flow(clip.flow[0], clip.masks[0][0]);
    worst_flow = std::max({worst_flow, std::abs(mean.x - b.velocity.x), std::abs(mean.y - b.velocity.y)});
    InstanceMask both = clip.masks[0][0];
    for (std::size_t p = 0; p < both.size(); ++p) both[p] = both[p] && clip.masks[1][0][p];
    const double dz = cue::derive_delta_depth(clip.depth[0], clip.depth[1], both);
    worst_depth = std::max(worst_depth, std::abs(dz - b.vz * scene.dt));
  }
  const bool ok = worst_flow < 0.01 && worst_depth < 1e-3;
  return {"sim.cue_closure", ok, "flow err " + fmt(worst_flow) + ", dz err " + fmt(worst_depth)};
}

CheckResult conservation(std::uint64_t seed) {
  Engine e(seed);
  double worst_p = 0.0;
  double worst_k = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    sim::Ball a, b;
    a.radius = uniform(e, 2, 6);
    b.radius = uniform(e, 2, 6);
    a.mass = uniform(e, 0.1, 10);
    b.mass = uniform(e, 0.1, 10);
    const double ang = uniform(e, 0, 2 * M_PI);
    const double reach = a.radius + b.radius;
    b.center = {reach * std::cos(ang), reach * std::sin(ang)};
    a.velocity = {uniform(e, -3, 3), uniform(e, -3, 3)};
    b.velocity = {uniform(e, -3, 3), uniform(e, -3, 3)};
    const double px = a.mass * a.velocity.x + b.mass * b.velocity.x;
    const double py = a.mass * a.velocity.y + b.mass * b.velocity.y;
    const double ke = 0.5 * (a.mass * (a.velocity.x * a.velocity.x + a.velocity.y * a.velocity.y) +
                             b.mass * (b.velocity.x * b.velocity.x + b.velocity.y * b.velocity.y));
    sim::resolve_contact(a, b);
    const double qx = a.mass * a.velocity.x + b.mass * b.velocity.x;
    const double qy = a.mass * a.velocity.y + b.mass * b.velocity.y;
    const double ke2 = 0.5 * (a.mass * (a.velocity.x * a.velocity.x + a.velocity.y * a.velocity.y) +
                              b.mass * (b.velocity.x * b.velocity.x + b.velocity.y * b.velocity.y));
    worst_p = std::max({worst_p, std::abs(px - qx), std::abs(py - qy)});
    worst_k = std::max(worst_k, std::abs(ke - ke2) / std::max(ke, 1e-12));
  }
  const auto light = sim::mass_sweep_outcome(sim::canonical_two_ball_scene(), 0.5);
  const auto heavy = sim::mass_sweep_outcome(sim::canonical_two_ball_scene(), 2.0);
  const bool ok = worst_p < 1e-12 && worst_k < 1e-9 && light == sim::Outcome::kDeflected &&
                  heavy == sim::Outcome::kPushesThrough;
  return {"sim.conservation", ok,
          "momentum err " + fmt(worst_p) + ", energy rel err " + fmt(worst_k) + ", sweep " +
              sim::outcome_name(light) + "/" + sim::outcome_name(heavy)};
}

CheckResult metrics_sanity(std::uint64_t seed) {
  const auto a = sim::render_clip(sim::random_scene(32, 32, 2, seed, 8));
  const auto b = sim::render_clip(sim::random_scene(32, 32, 2, seed + 1, 8));
  const auto self = metrics::score(a.frames, a.frames);
  const auto ab = metrics::score(a.frames, b.frames);
  const auto ba = metrics::score(b.frames, a.frames);
  const bool ok = self.aggregate == 100.0 && ab.aggregate == ba.aggregate && ab.aggregate >= 0.0 &&
                  ab.aggregate <= 100.0;
  return {"metrics.sanity", ok, "self " + fmt(self.aggregate) + ", pair " + fmt(ab.aggregate)};
}

CheckResult cue1_roundtrip(std::uint64_t seed) {
  Engine e(seed);
  for (int trial = 0; trial < 20; ++trial) {
    io::Tensor t{static_cast<std::uint32_t>(pick(e, 1, 9)), static_cast<std::uint32_t>(pick(e, 1, 9)),
                 static_cast<std::uint32_t>(pick(e, 1, 5)), {}};
    t.data.resize(static_cast<std::size_t>(t.height) * t.width * t.channels);
    for (auto& x : t.data) x = static_cast<float>(uniform(e, -1e6, 1e6));
    if (io::decode_cue1(io::encode_cue1(t)) != t) return {"io.cue1", false, "roundtrip mismatch"};
  }
  return {"io.cue1", true, "20 random tensors"};
}

CheckResult loss_examples() {
  Matrix eps(2, 3);
  for (std::size_t i = 0; i < eps.size(); ++i) eps.data()[i] = 0.1 * static_cast<double>(i) - 0.2;
  Matrix shifted = eps;
  for (double& x : shifted.data()) x += 1.0;
  const double a = diffusion::joint_loss(eps, eps, eps, 1.0);
  const double b = diffusion::joint_loss(shifted, eps, eps, 0.5);
  const bool ok = a == 0.0 && std::abs(b - 1.0) < 1e-12;
  return {"diffusion.joint_loss", ok, "zero " + fmt(a) + ", offset " + fmt(b)};
}

}  // namespace

std::vector<CheckResult> run_all(std::uint64_t seed, const std::function<void(const CheckResult&)>& on_result) {
  using Check = std::function<CheckResult()>;
  const std::vector<Check> checks = {
      [&] { return budget_invariants(seed); },
      [&] { return bank_conservation(seed + 1); },
      [&] { return rope_properties(seed + 2); },
      [&] { return gradient_fidelity(seed + 3); },
      [&] { return init_equivalence(seed + 4); },
      [&] { return cue_composition(seed + 5); },
      [&] { return training_closure(seed + 6); },
      [&] { return conservation(seed + 7); },
      [&] { return metrics_sanity(seed + 8); },
      [&] { return cue1_roundtrip(seed + 9); },
      [] { return loss_examples(); },
  };
  std::vector<CheckResult> results;
  for (const auto& check : checks) {
    CheckResult r;
    try {
      r = check();
    } catch (const std::exception& ex) {
      r = {"exception", false, ex.what()};
    }
    if (on_result) on_result(r);
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace densecue::selfcheck
