/*
 * Copyright 2026 The densecue Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to densecue. Objects are opaque handles owned by the caller
 * and released with the matching *_free function. Every fallible call
 * returns a dc_status; on failure dc_last_error() describes the problem for
 * the calling thread until its next densecue call.
 */
#ifndef DENSECUE_DENSECUE_H
#define DENSECUE_DENSECUE_H

#include <stddef.h>
#include <stdint.h>

#if defined(DENSECUE_BUILDING_LIBRARY)
#define DC_API __attribute__((visibility("default")))
#else
#define DC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dc_status {
  DC_OK = 0,
  DC_ERR_PARSE = 1,       /* malformed input file or document */
  DC_ERR_CONSTRAINT = 2,  /* well-formed input violating a contract */
  DC_ERR_IO = 3,
  DC_ERR_NUMERIC = 4,     /* divergence, non-finite values */
  DC_ERR_ARGUMENT = 5,    /* bad pointer or flag value */
  DC_ERR_INTERNAL = 6
} dc_status;

typedef enum dc_small_set_mode {
  DC_MODE_TILE = 0,
  DC_MODE_REPLACE = 1
} dc_small_set_mode;

DC_API const char* dc_version(void);
DC_API const char* dc_last_error(void);

/* ---- H x W x C float32 tensors (CUE1 payloads) ------------------------ */

typedef struct dc_tensor dc_tensor;

DC_API dc_status dc_tensor_create(uint32_t height, uint32_t width, uint32_t channels, dc_tensor** out);
DC_API void dc_tensor_free(dc_tensor* tensor);
DC_API dc_status dc_tensor_dims(const dc_tensor* tensor, uint32_t* height, uint32_t* width,
                                uint32_t* channels);
/* Row-major, channel-minor; valid until the tensor is freed. */
DC_API float* dc_tensor_data(dc_tensor* tensor);
DC_API const float* dc_tensor_cdata(const dc_tensor* tensor);

DC_API dc_status dc_cue1_read(const char* path, dc_tensor** out);
DC_API dc_status dc_cue1_write(const char* path, const dc_tensor* tensor);

/* ---- cue authoring ----------------------------------------------------- */

/* Rasterizes a cue spec JSON into an H x W x 4 (u, v, dz, mass) field.
 * sigma <= 0 selects min(H, W) / 20. */
DC_API dc_status dc_rasterize_spec_file(const char* spec_path, double sigma, dc_tensor** out_field);
/* Writes a P6 visualization of a 4-channel cue tensor. */
DC_API dc_status dc_write_cue_viz(const dc_tensor* field, const char* ppm_path);

/* ---- simulation and training cues ------------------------------------- */

/* Simulates the scene JSON and writes the clip directory. */
DC_API dc_status dc_simulate(const char* scene_path, const char* out_dir, uint64_t seed);
/* Derives the painted training cue for `frame` of a clip directory. */
DC_API dc_status dc_derive_cues(const char* clip_dir, uint32_t frame, double speed_norm,
                                dc_tensor** out_field);

/* ---- motion-token sampling -------------------------------------------- */

/* Picks exactly `budget` entries of the active index set (sorted, m >= 1)
 * into out (capacity budget). */
DC_API dc_status dc_sample_budget(const uint32_t* active, size_t active_count, size_t budget,
                                  uint64_t seed, dc_small_set_mode mode, uint32_t* out);

/* ---- toy joint training ----------------------------------------------- */

typedef struct dc_train_config {
  uint64_t seed;
  uint32_t steps;
  double learning_rate;
  double lambda_aux;
  uint32_t clips;
  uint32_t frame_size;
  uint32_t patch;
  uint32_t budget;
  dc_small_set_mode mode;
  uint32_t heads;
  double speed_norm;
} dc_train_config;

typedef struct dc_trace dc_trace;

DC_API void dc_train_config_default(dc_train_config* config);
DC_API dc_status dc_train(const dc_train_config* config, dc_trace** out);
DC_API void dc_trace_free(dc_trace* trace);
DC_API size_t dc_trace_length(const dc_trace* trace);
DC_API dc_status dc_trace_row(const dc_trace* trace, size_t index, double* rgb_loss, double* aux_loss,
                              double* total);
/* CSV with header step,rgb_loss,aux_loss,total. */
DC_API dc_status dc_trace_write_csv(const dc_trace* trace, const char* path);

/* ---- physics-iq-lite evaluation --------------------------------------- */

typedef struct dc_score {
  double spatial_iou;
  double st_iou;
  double weighted_iou;
  double mse_sim;
  double aggregate;
} dc_score;

/* threshold <= 0 selects the default (2% of the intensity range). */
DC_API dc_status dc_eval_dirs(const char* gen_dir, const char* ref_dir, double threshold, dc_score* out);

/* ---- invariant suite -------------------------------------------------- */

typedef void (*dc_check_callback)(const char* name, int passed, const char* detail, void* user);

/* Runs every built-in check; *failures receives the failed count. Returns
 * DC_OK when the suite ran, regardless of failures. */
DC_API dc_status dc_selfcheck(uint64_t seed, dc_check_callback callback, void* user, int* failures);

#ifdef __cplusplus
}
#endif

#endif /* DENSECUE_DENSECUE_H */
