// Copyright 2026 The densecue Authors
// SPDX-License-Identifier: Apache-2.0
//
// Exercises the shared library through its C header only.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "densecue/densecue.h"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("densecue_capi_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_mask(const fs::path& path, int w, int h, int x0, int y0, int x1, int y1) {
  std::ofstream out(path, std::ios::binary);
  out << "P5\n" << w << " " << h << "\n255\n";
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.put(x >= x0 && x < x1 && y >= y0 && y < y1 ? char(255) : char(0));
}

}  // namespace

TEST_CASE("version and null arguments") {
  CHECK(std::string(dc_version()).size() > 0);
  CHECK(dc_tensor_create(2, 2, 1, nullptr) == DC_ERR_ARGUMENT);
  CHECK(std::string(dc_last_error()).size() > 0);
  CHECK(dc_tensor_dims(nullptr, nullptr, nullptr, nullptr) == DC_ERR_ARGUMENT);
  dc_tensor_free(nullptr);
}

TEST_CASE("tensor handles roundtrip through CUE1") {
  dc_tensor* t = nullptr;
  REQUIRE(dc_tensor_create(3, 4, 2, &t) == DC_OK);
  float* d = dc_tensor_data(t);
  for (int i = 0; i < 24; ++i) d[i] = static_cast<float>(i) * 0.5f - 3.0f;
  const fs::path path = scratch("cue1") / "t.cue";
  REQUIRE(dc_cue1_write(path.c_str(), t) == DC_OK);
  dc_tensor* back = nullptr;
  REQUIRE(dc_cue1_read(path.c_str(), &back) == DC_OK);
  uint32_t h = 0, w = 0, c = 0;
  REQUIRE(dc_tensor_dims(back, &h, &w, &c) == DC_OK);
  CHECK(h == 3);
  CHECK(w == 4);
  CHECK(c == 2);
  CHECK(std::memcmp(dc_tensor_cdata(back), dc_tensor_cdata(t), 24 * sizeof(float)) == 0);
  dc_tensor_free(t);
  dc_tensor_free(back);

  dc_tensor* none = nullptr;
  CHECK(dc_cue1_read("/nonexistent/x.cue", &none) == DC_ERR_IO);
  CHECK(none == nullptr);
  std::ofstream(path.parent_path() / "bad.cue") << "CUE9junk";
  CHECK(dc_cue1_read((path.parent_path() / "bad.cue").c_str(), &none) == DC_ERR_PARSE);
}

TEST_CASE("budget sampling") {
  const uint32_t active[] = {3, 7};
  uint32_t out[5] = {};
  REQUIRE(dc_sample_budget(active, 2, 5, 0, DC_MODE_TILE, out) == DC_OK);
  const uint32_t want[] = {3, 7, 3, 7, 3};
  CHECK(std::memcmp(out, want, sizeof(want)) == 0);
  CHECK(dc_sample_budget(active, 0, 5, 0, DC_MODE_TILE, out) == DC_ERR_CONSTRAINT);
  CHECK(std::string(dc_last_error()).find("EmptyActiveSet") != std::string::npos);
  CHECK(dc_sample_budget(active, 2, 5, 0, static_cast<dc_small_set_mode>(9), out) == DC_ERR_ARGUMENT);
}

TEST_CASE("rasterize a spec file") {
  const fs::path dir = scratch("spec");
  write_mask(dir / "a.pgm", 12, 10, 1, 1, 11, 9);
  std::ofstream(dir / "spec.json")
      << R"({"width":12,"height":10,"instances":[{"mask_path":"a.pgm","arrow":{"start":[2.5,5.5],"end":[9.5,5.5],"dz":0.4},"mass":1}]})";
  dc_tensor* field = nullptr;
  REQUIRE(dc_rasterize_spec_file((dir / "spec.json").c_str(), 0.0, &field) == DC_OK);
  uint32_t h = 0, w = 0, c = 0;
  dc_tensor_dims(field, &h, &w, &c);
  CHECK(c == 4);
  const float* px = dc_tensor_cdata(field) + (5 * 12 + 5) * 4;
  CHECK(px[0] == 1.0f);
  CHECK(px[2] == 0.4f);
  CHECK(dc_tensor_cdata(field)[0] == 0.0f);
  CHECK(dc_write_cue_viz(field, (dir / "viz.ppm").c_str()) == DC_OK);
  dc_tensor_free(field);

  std::ofstream(dir / "bad.json")
      << R"({"width":12,"height":10,"instances":[{"mask_path":"a.pgm","arrow":{"start":[1,1],"end":[5,5],"dz":1.5}}]})";
  CHECK(dc_rasterize_spec_file((dir / "bad.json").c_str(), 0.0, &field) == DC_ERR_CONSTRAINT);
  std::ofstream(dir / "broken.json") << "{";
  CHECK(dc_rasterize_spec_file((dir / "broken.json").c_str(), 0.0, &field) == DC_ERR_PARSE);
}

TEST_CASE("simulate, derive cues and evaluate") {
  const fs::path dir = scratch("sim");
  std::ofstream(dir / "scene.json")
      << R"({"width":40,"height":24,"frames":4,"balls":[{"center":[10,12],"velocity":[0.75,-0.25],"radius":4}]})";
  REQUIRE(dc_simulate((dir / "scene.json").c_str(), (dir / "clip").c_str(), 0) == DC_OK);
  dc_tensor* cues = nullptr;
  REQUIRE(dc_derive_cues((dir / "clip").c_str(), 0, 1.0, &cues) == DC_OK);
  const float* px = dc_tensor_cdata(cues) + (12 * 40 + 10) * 4;
  CHECK(px[0] == 0.75f);
  CHECK(px[1] == -0.25f);
  CHECK(px[3] == 1.0f);
  dc_tensor_free(cues);

  dc_score s{};
  REQUIRE(dc_eval_dirs((dir / "clip").c_str(), (dir / "clip").c_str(), 0.0, &s) == DC_OK);
  CHECK(s.aggregate == 100.0);
  CHECK(dc_derive_cues((dir / "clip").c_str(), 3, 1.0, &cues) == DC_ERR_CONSTRAINT);
}

TEST_CASE("training trace") {
  dc_train_config cfg;
  dc_train_config_default(&cfg);
  cfg.steps = 3;
  cfg.clips = 2;
  cfg.frame_size = 16;
  dc_trace* trace = nullptr;
  REQUIRE(dc_train(&cfg, &trace) == DC_OK);
  CHECK(dc_trace_length(trace) == 4);
  double rgb = 0, aux = 0, total = 0;
  REQUIRE(dc_trace_row(trace, 0, &rgb, &aux, &total) == DC_OK);
  CHECK(total == doctest::Approx(rgb + cfg.lambda_aux * aux));
  CHECK(dc_trace_row(trace, 4, &rgb, &aux, &total) == DC_ERR_ARGUMENT);
  dc_trace_free(trace);
}

TEST_CASE("selfcheck reports every check") {
  int calls = 0, failures = -1;
  REQUIRE(dc_selfcheck(0, [](const char*, int, const char*, void* u) { ++*static_cast<int*>(u); }, &calls,
                       &failures) == DC_OK);
  CHECK(failures == 0);
  CHECK(calls == 11);
}
