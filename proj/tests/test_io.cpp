// Copyright 2026 The densecue Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "densecue/error.hpp"
#include "densecue/io.hpp"
#include "densecue/sim.hpp"

using namespace densecue;
using namespace densecue::io;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("densecue_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kIo;
}

}  // namespace

TEST_CASE("CUE1 layout") {
  Tensor t{1, 2, 1, {1.0f, -2.5f}};
  const auto bytes = encode_cue1(t);
  REQUIRE(bytes.size() == 4 + 16 + 8);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "CUE1");
  CHECK(bytes[4] == 1);
  CHECK(bytes[8] == 1);   // height
  CHECK(bytes[12] == 2);  // width
  CHECK(bytes[16] == 1);  // channels
  CHECK(bytes[20 + 3] == 0x3f);  // 1.0f little-endian high byte
  CHECK(decode_cue1(bytes) == t);
}

TEST_CASE("CUE1 parse errors") {
  Tensor t{2, 2, 2, std::vector<float>(8, 0.5f)};
  auto bytes = encode_cue1(t);
  auto bad = bytes;
  bad[0] = 'X';
  CHECK(code_of([&] { decode_cue1(bad); }) == ErrorCode::kParse);
  bad = bytes;
  bad[4] = 2;
  CHECK(code_of([&] { decode_cue1(bad); }) == ErrorCode::kParse);
  bad = bytes;
  bad.pop_back();
  CHECK(code_of([&] { decode_cue1(bad); }) == ErrorCode::kParse);
  CHECK(code_of([&] { read_cue1("/nonexistent/densecue.cue"); }) == ErrorCode::kIo);
}

TEST_CASE("PGM roundtrip and errors") {
  const auto dir = scratch("pgm");
  Grid<std::uint8_t> g(5, 3);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<std::uint8_t>(i * 13);
  write_pgm(dir / "a.pgm", g);
  CHECK(read_pgm(dir / "a.pgm") == g);
  std::ofstream(dir / "b.pgm") << "P2\n1 1\n255\n0\n";
  CHECK(code_of([&] { read_pgm(dir / "b.pgm"); }) == ErrorCode::kParse);
  std::ofstream(dir / "c.pgm", std::ios::binary) << "P5\n# note\n2 2\n255\n\x01\x02";
  CHECK(code_of([&] { read_pgm(dir / "c.pgm"); }) == ErrorCode::kParse);
}

TEST_CASE("cue spec parsing") {
  const auto dir = scratch("spec");
  Grid<std::uint8_t> m(8, 6);
  for (int y = 1; y < 5; ++y)
    for (int x = 1; x < 7; ++x) m(x, y) = 255;
  write_pgm(dir / "m.pgm", m);
  const std::string ok = R"({"width":8,"height":6,"instances":[
      {"mask_path":"m.pgm","arrow":{"start":[1,1],"end":[6,4],"dz":0.5},"mass":2},
      {"mask_path":"m.pgm","arrow":{"start":[2,2],"end":[2,5],"dz":-0.5},"mass":4}]})";
  const auto spec = parse_cue_spec(ok, dir);
  CHECK(spec.instances.size() == 2);
  CHECK(spec.mass_max == 4.0);
  CHECK(spec.instances[0].mass == 0.5);
  CHECK(spec.instances[0].mask(3, 3) == 1);
  CHECK(code_of([&] { parse_cue_spec("{", dir); }) == ErrorCode::kParse);
  CHECK(code_of([&] {
          parse_cue_spec(R"({"width":8,"height":6,"instances":[{"mask_path":"m.pgm","arrow":{"start":[1,1],"end":[6,4],"dz":1.5}}]})", dir);
        }) == ErrorCode::kOutOfRange);
  CHECK(code_of([&] {
          parse_cue_spec(R"({"width":9,"height":6,"instances":[{"mask_path":"m.pgm","arrow":{"start":[1,1],"end":[6,4]}}]})", dir);
        }) == ErrorCode::kDimensionMismatch);
}

TEST_CASE("scene JSON and clip directories roundtrip") {
  const sim::Scene s = sim::random_scene(32, 24, 2, 9, 4);
  const sim::Scene back = scene_from_json(scene_to_json(s), std::nullopt);
  REQUIRE(back.balls.size() == 2);
  CHECK(back.balls[1].center.x == s.balls[1].center.x);
  CHECK(back.balls[0].vz == s.balls[0].vz);
  CHECK(scene_from_json(R"({"width":16,"height":16,"frames":3,"seed":5})", 7).seed == 7);

  const auto dir = scratch("clip");
  const sim::Clip c = sim::render_clip(s);
  write_clip(dir, c);
  const sim::Clip r = read_clip(dir);
  CHECK(r.frames == c.frames);
  CHECK(r.depth == c.depth);
  CHECK(r.masks == c.masks);
  CHECK(r.flow[2].u == c.flow[2].u);
  CHECK(read_frames(dir) == c.frames);
}
