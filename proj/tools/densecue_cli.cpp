// Copyright 2026 The densecue Authors
// SPDX-License-Identifier: Apache-2.0
//
// densecue command-line tool. Talks to the library only through the C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "densecue/densecue.h"

namespace {

// Exit codes: 0 success, 1 parse error, 2 constraint violation, 3 I/O,
// 4 numeric failure, 5 bad argument, 6 internal, 7 self-check failure.
constexpr int kExitCheckFailed = 7;

struct TensorDeleter {
  void operator()(dc_tensor* t) const { dc_tensor_free(t); }
};
struct TraceDeleter {
  void operator()(dc_trace* t) const { dc_trace_free(t); }
};
using TensorPtr = std::unique_ptr<dc_tensor, TensorDeleter>;
using TracePtr = std::unique_ptr<dc_trace, TraceDeleter>;

int report(dc_status status, const std::string& context) {
  if (status != DC_OK) std::cerr << "densecue " << context << ": " << dc_last_error() << "\n";
  return static_cast<int>(status);
}

dc_small_set_mode parse_mode(const std::string& mode) {
  return mode == "replace" ? DC_MODE_REPLACE : DC_MODE_TILE;
}

int run_rasterize(const std::string& spec, const std::string& out, const std::string& viz, double sigma) {
  dc_tensor* raw = nullptr;
  if (dc_status s = dc_rasterize_spec_file(spec.c_str(), sigma, &raw); s != DC_OK) return report(s, "rasterize");
  TensorPtr field(raw);
  if (dc_status s = dc_cue1_write(out.c_str(), field.get()); s != DC_OK) return report(s, "rasterize");
  if (!viz.empty()) {
    if (dc_status s = dc_write_cue_viz(field.get(), viz.c_str()); s != DC_OK) return report(s, "rasterize");
  }
  return 0;
}

int run_derive(const std::string& clip, const std::string& out, unsigned frame, double speed_norm) {
  dc_tensor* raw = nullptr;
  if (dc_status s = dc_derive_cues(clip.c_str(), frame, speed_norm, &raw); s != DC_OK) {
    return report(s, "derive-cues");
  }
  TensorPtr field(raw);
  return report(dc_cue1_write(out.c_str(), field.get()), "derive-cues");
}

int run_train(dc_train_config config, const std::string& config_path, const std::string& trace_out) {
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "densecue train: cannot open " << config_path << "\n";
      return DC_ERR_IO;
    }
    try {
      const auto doc = nlohmann::json::parse(in);
      config.steps = doc.value("steps", config.steps);
      config.learning_rate = doc.value("learning_rate", config.learning_rate);
      config.clips = doc.value("clips", config.clips);
      config.frame_size = doc.value("frame_size", config.frame_size);
      config.patch = doc.value("patch", config.patch);
      config.heads = doc.value("heads", config.heads);
      config.speed_norm = doc.value("speed_norm", config.speed_norm);
    } catch (const nlohmann::json::exception& e) {
      std::cerr << "densecue train: " << e.what() << "\n";
      return DC_ERR_PARSE;
    }
  }
  dc_trace* raw = nullptr;
  if (dc_status s = dc_train(&config, &raw); s != DC_OK) return report(s, "train");
  TracePtr trace(raw);
  if (dc_status s = dc_trace_write_csv(trace.get(), trace_out.c_str()); s != DC_OK) return report(s, "train");
  double first = 0.0, last = 0.0;
  dc_trace_row(trace.get(), 0, nullptr, nullptr, &first);
  dc_trace_row(trace.get(), dc_trace_length(trace.get()) - 1, nullptr, nullptr, &last);
  std::cout << "total loss " << first << " -> " << last << "\n";
  return 0;
}

int run_eval(const std::string& gen, const std::string& ref, const std::string& json_out, double threshold) {
  dc_score score{};
  if (dc_status s = dc_eval_dirs(gen.c_str(), ref.c_str(), threshold, &score); s != DC_OK) {
    return report(s, "eval");
  }
  nlohmann::ordered_json doc;
  doc["spatial_iou"] = score.spatial_iou;
  doc["st_iou"] = score.st_iou;
  doc["weighted_iou"] = score.weighted_iou;
  doc["mse_sim"] = score.mse_sim;
  doc["aggregate"] = score.aggregate;
  const std::string text = doc.dump();
  if (json_out.empty() || json_out == "-") {
    std::cout << text << "\n";
    return 0;
  }
  std::ofstream out(json_out);
  if (!out || !(out << text << "\n")) {
    std::cerr << "densecue eval: cannot write " << json_out << "\n";
    return DC_ERR_IO;
  }
  return 0;
}

void print_check(const char* name, int passed, const char* detail, void*) {
  std::cout << (passed ? "PASS " : "FAIL ") << name << " (" << detail << ")\n";
}

int run_selfcheck(std::uint64_t seed) {
  int failures = 0;
  if (dc_status s = dc_selfcheck(seed, print_check, nullptr, &failures); s != DC_OK) {
    return report(s, "selfcheck");
  }
  std::cout << (failures == 0 ? "all checks passed" : std::to_string(failures) + " check(s) failed") << "\n";
  return failures == 0 ? 0 : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"densecue: dense instance cues, motion tokens and physics-iq-lite"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::uint32_t budget = 64;
  double sigma = 0.0;
  double lambda_aux = 1.0;
  std::string mode = "tile";
  app.add_option("--seed", seed, "Deterministic seed")->capture_default_str();

  std::string spec, out, viz;
  auto* rasterize = app.add_subcommand("rasterize", "Rasterize a cue spec into a CUE1 field");
  rasterize->add_option("spec", spec, "Cue spec JSON")->required();
  rasterize->add_option("-o,--out", out, "Output CUE1 path")->required();
  rasterize->add_option("--viz", viz, "Optional PPM visualization");
  rasterize->add_option("--sigma", sigma, "Blur radius in pixels (default min(H,W)/20)");

  std::string scene, out_dir;
  auto* simulate = app.add_subcommand("simulate", "Simulate a scene into a clip directory");
  simulate->add_option("scene", scene, "Scene JSON")->required();
  simulate->add_option("-o,--out", out_dir, "Output clip directory")->required();

  std::string clip_dir;
  unsigned frame = 0;
  double speed_norm = 1.0;
  auto* derive = app.add_subcommand("derive-cues", "Derive the painted training cue of a clip");
  derive->add_option("clip", clip_dir, "Clip directory")->required();
  derive->add_option("-o,--out", out, "Output CUE1 path")->required();
  derive->add_option("--frame", frame, "Reference frame")->capture_default_str();
  derive->add_option("--speed-norm", speed_norm, "Pixels/frame mapped to unit cue length")->capture_default_str();

  std::string config_path, trace_out;
  std::uint32_t steps = 200;
  double lr = 0.0;
  auto* train = app.add_subcommand("train", "Train the toy joint model and write the loss trace");
  train->add_option("--config", config_path, "Optional JSON config");
  train->add_option("--trace-out", trace_out, "Loss trace CSV")->required();
  train->add_option("--steps", steps, "Gradient steps")->capture_default_str();
  train->add_option("--lr", lr, "Learning rate (default from the toy config)");
  train->add_option("--budget", budget, "Motion-token budget N")->capture_default_str();
  train->add_option("--lambda-aux", lambda_aux, "Aux loss weight")->capture_default_str();
  train->add_option("--mode", mode, "Rule when the active set fits the budget")
      ->check(CLI::IsMember({"tile", "replace"}))
      ->capture_default_str();

  std::string gen, ref, json_out;
  double threshold = 0.0;
  auto* eval = app.add_subcommand("eval", "Score a generated clip against a reference (physics-iq-lite)");
  eval->add_option("gen", gen, "Generated clip directory")->required();
  eval->add_option("ref", ref, "Reference clip directory")->required();
  eval->add_option("-o,--json-out", json_out, "Output JSON path (default stdout)");
  eval->add_option("--threshold", threshold, "Motion threshold as a fraction of intensity range");

  auto* selfcheck = app.add_subcommand("selfcheck", "Run the built-in invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(DC_ERR_PARSE);
  }

  if (rasterize->parsed()) return run_rasterize(spec, out, viz, sigma);
  if (simulate->parsed()) return report(dc_simulate(scene.c_str(), out_dir.c_str(), seed), "simulate");
  if (derive->parsed()) return run_derive(clip_dir, out, frame, speed_norm);
  if (train->parsed()) {
    dc_train_config config;
    dc_train_config_default(&config);
    config.seed = seed;
    config.steps = steps;
    config.budget = budget;
    config.lambda_aux = lambda_aux;
    config.mode = parse_mode(mode);
    if (lr > 0.0) config.learning_rate = lr;
    return run_train(config, config_path, trace_out);
  }
  if (eval->parsed()) return run_eval(gen, ref, json_out, threshold);
  if (selfcheck->parsed()) return run_selfcheck(seed);
  return 0;
}
