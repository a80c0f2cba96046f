// Copyright 2026 The densecue Authors
// SPDX-License-Identifier: Apache-2.0

#include "densecue/densecue.h"

#include <exception>
#include <filesystem>
#include <fstream>
#include <new>
#include <string>
#include <vector>

#include "densecue/cue_field.hpp"
#include "densecue/dense_rope.hpp"
#include "densecue/diffusion_loss.hpp"
#include "densecue/error.hpp"
#include "densecue/io.hpp"
#include "densecue/metrics.hpp"
#include "densecue/selfcheck.hpp"
#include "densecue/sim.hpp"

struct dc_tensor {
  densecue::io::Tensor tensor;
};

struct dc_trace {
  std::vector<densecue::diffusion::TraceRow> rows;
};

namespace {

thread_local std::string g_last_error;

dc_status status_for(densecue::ErrorCode code) {
  using densecue::ErrorCode;
  switch (code) {
    case ErrorCode::kParse: return DC_ERR_PARSE;
    case ErrorCode::kIo: return DC_ERR_IO;
    case ErrorCode::kNonFiniteLoss: return DC_ERR_NUMERIC;
    default: return DC_ERR_CONSTRAINT;
  }
}

template <class Fn>
dc_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return DC_OK;
  } catch (const densecue::Error& e) {
    g_last_error = e.what();
    return status_for(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return DC_ERR_INTERNAL;
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return DC_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DC_ERR_INTERNAL;
  }
}

dc_status bad_argument(const char* what) {
  g_last_error = what;
  return DC_ERR_ARGUMENT;
}

bool valid_mode(dc_small_set_mode mode) { return mode == DC_MODE_TILE || mode == DC_MODE_REPLACE; }

densecue::dense_rope::SmallSetMode to_mode(dc_small_set_mode mode) {
  return mode == DC_MODE_REPLACE ? densecue::dense_rope::SmallSetMode::kReplace
                                 : densecue::dense_rope::SmallSetMode::kTile;
}

}  // namespace

extern "C" {

const char* dc_version(void) { return "0.1.0"; }

const char* dc_last_error(void) { return g_last_error.c_str(); }

dc_status dc_tensor_create(uint32_t height, uint32_t width, uint32_t channels, dc_tensor** out) {
  if (!out) return bad_argument("null output handle");
  return guarded([&] {
    auto* t = new dc_tensor{{height, width, channels, {}}};
    t->tensor.data.assign(static_cast<std::size_t>(height) * width * channels, 0.0f);
    *out = t;
  });
}

void dc_tensor_free(dc_tensor* tensor) { delete tensor; }

dc_status dc_tensor_dims(const dc_tensor* tensor, uint32_t* height, uint32_t* width, uint32_t* channels) {
  if (!tensor) return bad_argument("null tensor");
  if (height) *height = tensor->tensor.height;
  if (width) *width = tensor->tensor.width;
  if (channels) *channels = tensor->tensor.channels;
  return DC_OK;
}

float* dc_tensor_data(dc_tensor* tensor) { return tensor ? tensor->tensor.data.data() : nullptr; }

const float* dc_tensor_cdata(const dc_tensor* tensor) {
  return tensor ? tensor->tensor.data.data() : nullptr;
}

dc_status dc_cue1_read(const char* path, dc_tensor** out) {
  if (!path || !out) return bad_argument("null argument");
  return guarded([&] { *out = new dc_tensor{densecue::io::read_cue1(path)}; });
}

dc_status dc_cue1_write(const char* path, const dc_tensor* tensor) {
  if (!path || !tensor) return bad_argument("null argument");
  return guarded([&] { densecue::io::write_cue1(path, tensor->tensor); });
}

dc_status dc_rasterize_spec_file(const char* spec_path, double sigma, dc_tensor** out_field) {
  if (!spec_path || !out_field) return bad_argument("null argument");
  return guarded([&] {
    const auto spec = densecue::io::load_cue_spec(spec_path);
    const double s = sigma > 0.0 ? sigma : densecue::cue::default_sigma(spec.width, spec.height);
    const auto field = densecue::cue::compose_cue_field(spec.instances, s);
    *out_field = new dc_tensor{densecue::io::to_tensor(field)};
  });
}

dc_status dc_write_cue_viz(const dc_tensor* field, const char* ppm_path) {
  if (!field || !ppm_path) return bad_argument("null argument");
  return guarded([&] {
    const auto cue = densecue::io::cue_field_from_tensor(field->tensor);
    densecue::io::write_ppm(ppm_path, cue.width(), cue.height(), densecue::io::render_cue_viz(cue));
  });
}

dc_status dc_simulate(const char* scene_path, const char* out_dir, uint64_t seed) {
  if (!scene_path || !out_dir) return bad_argument("null argument");
  return guarded([&] {
    const auto scene = densecue::io::load_scene(scene_path, seed);
    densecue::io::write_clip(out_dir, densecue::sim::render_clip(scene));
  });
}

dc_status dc_derive_cues(const char* clip_dir, uint32_t frame, double speed_norm, dc_tensor** out_field) {
  if (!clip_dir || !out_field) return bad_argument("null argument");
  return guarded([&] {
    const auto clip = densecue::io::read_clip(clip_dir);
    const auto field = densecue::sim::derive_training_cues(clip, frame, speed_norm);
    *out_field = new dc_tensor{densecue::io::to_tensor(field)};
  });
}

dc_status dc_sample_budget(const uint32_t* active, size_t active_count, size_t budget, uint64_t seed,
                           dc_small_set_mode mode, uint32_t* out) {
  if ((!active && active_count) || (!out && budget)) return bad_argument("null argument");
  if (!valid_mode(mode)) return bad_argument("unknown small-set mode");
  return guarded([&] {
    densecue::dense_rope::ActiveIndexSet omega;
    omega.indices.assign(active, active + active_count);
    const auto sampled = densecue::dense_rope::sample_budget(omega, budget, seed, to_mode(mode));
    for (std::size_t i = 0; i < sampled.size(); ++i) out[i] = static_cast<uint32_t>(sampled.indices[i]);
  });
}

void dc_train_config_default(dc_train_config* config) {
  if (!config) return;
  const densecue::diffusion::TrainConfig d;
  config->seed = d.seed;
  config->steps = static_cast<uint32_t>(d.steps);
  config->learning_rate = d.learning_rate;
  config->lambda_aux = d.lambda_aux;
  config->clips = static_cast<uint32_t>(d.clips);
  config->frame_size = static_cast<uint32_t>(d.frame_size);
  config->patch = static_cast<uint32_t>(d.patch);
  config->budget = static_cast<uint32_t>(d.budget);
  config->mode = DC_MODE_TILE;
  config->heads = static_cast<uint32_t>(d.heads);
  config->speed_norm = d.speed_norm;
}

dc_status dc_train(const dc_train_config* config, dc_trace** out) {
  if (!config || !out) return bad_argument("null argument");
  if (!valid_mode(config->mode)) return bad_argument("unknown small-set mode");
  return guarded([&] {
    densecue::diffusion::TrainConfig c;
    c.seed = config->seed;
    c.steps = config->steps;
    c.learning_rate = config->learning_rate;
    c.lambda_aux = config->lambda_aux;
    c.clips = config->clips;
    c.frame_size = static_cast<int>(config->frame_size);
    c.patch = config->patch;
    c.budget = config->budget;
    c.mode = to_mode(config->mode);
    c.heads = config->heads;
    c.speed_norm = config->speed_norm;
    *out = new dc_trace{densecue::diffusion::train_toy(c)};
  });
}

void dc_trace_free(dc_trace* trace) { delete trace; }

size_t dc_trace_length(const dc_trace* trace) { return trace ? trace->rows.size() : 0; }

dc_status dc_trace_row(const dc_trace* trace, size_t index, double* rgb_loss, double* aux_loss, double* total) {
  if (!trace) return bad_argument("null trace");
  if (index >= trace->rows.size()) return bad_argument("trace index out of range");
  const auto& r = trace->rows[index];
  if (rgb_loss) *rgb_loss = r.rgb;
  if (aux_loss) *aux_loss = r.aux;
  if (total) *total = r.total;
  return DC_OK;
}

dc_status dc_trace_write_csv(const dc_trace* trace, const char* path) {
  if (!trace || !path) return bad_argument("null argument");
  return guarded([&] {
    std::ofstream out(path);
    if (!out) throw densecue::Error(densecue::ErrorCode::kIo, std::string("cannot write ") + path);
    out << densecue::diffusion::trace_to_csv(trace->rows);
    if (!out) throw densecue::Error(densecue::ErrorCode::kIo, std::string("short write to ") + path);
  });
}

dc_status dc_eval_dirs(const char* gen_dir, const char* ref_dir, double threshold, dc_score* out) {
  if (!gen_dir || !ref_dir || !out) return bad_argument("null argument");
  return guarded([&] {
    const auto gen = densecue::io::read_frames(gen_dir);
    const auto ref = densecue::io::read_frames(ref_dir);
    const double t = threshold > 0.0 ? threshold : densecue::metrics::kDefaultThreshold;
    const auto s = densecue::metrics::score(gen, ref, t);
    *out = {s.spatial_iou, s.st_iou, s.weighted_iou, s.mse_sim, s.aggregate};
  });
}

dc_status dc_selfcheck(uint64_t seed, dc_check_callback callback, void* user, int* failures) {
  return guarded([&] {
    int failed = 0;
    densecue::selfcheck::run_all(seed, [&](const densecue::selfcheck::CheckResult& r) {
      failed += !r.passed;
      if (callback) callback(r.name.c_str(), r.passed ? 1 : 0, r.detail.c_str(), user);
    });
    if (failures) *failures = failed;
  });
}

}  // extern "C"
