// Copyright 2026 The densecue Authors
// SPDX-License-Identifier: Apache-2.0
//
// File formats: CUE1 float tensors, PGM/PPM images, the cue authoring JSON,
// scene JSON and the clip directory layout.
//
// CUE1 layout, little-endian regardless of host:
//   bytes 0..3   "CUE1"
//   u32          version (1)
//   u32 H, u32 W, u32 C
//   H*W*C f32    row-major, channel-minor

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "densecue/cue_field.hpp"
#include "densecue/grid.hpp"
#include "densecue/sim.hpp"

namespace densecue::io {

inline constexpr std::uint32_t kCue1Version = 1;

struct Tensor {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t channels = 0;
  std::vector<float> data;

  float& at(std::uint32_t y, std::uint32_t x, std::uint32_t c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  float at(std::uint32_t y, std::uint32_t x, std::uint32_t c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  friend bool operator==(const Tensor&, const Tensor&) = default;
};

std::vector<std::uint8_t> encode_cue1(const Tensor& t);
Tensor decode_cue1(std::span<const std::uint8_t> bytes);
void write_cue1(const std::filesystem::path& path, const Tensor& t);
Tensor read_cue1(const std::filesystem::path& path);

Tensor to_tensor(const cue::CueField& field);
cue::CueField cue_field_from_tensor(const Tensor& t);
Tensor to_tensor(const FlowField& flow);
FlowField flow_from_tensor(const Tensor& t);
Tensor to_tensor(const DepthMap& depth);
DepthMap depth_from_tensor(const Tensor& t);

void write_pgm(const std::filesystem::path& path, const Grid<std::uint8_t>& image);
Grid<std::uint8_t> read_pgm(const std::filesystem::path& path);
/// rgb holds width * height * 3 bytes.
void write_ppm(const std::filesystem::path& path, int width, int height,
               std::span<const std::uint8_t> rgb);

/// Hue from the in-plane direction, brightness from its magnitude, tinted
/// red for dz > 0 (into the screen) and blue for dz < 0.
std::vector<std::uint8_t> render_cue_viz(const cue::CueField& field);

struct CueSpecFile {
  int width = 0;
  int height = 0;
  double mass_max = 0.0;
  std::vector<cue::InstanceSpec> instances;  ///< masses already normalized
};

/// Parses the authoring JSON. Mask paths are resolved against the spec
/// file's directory. Throws Error(kParse) for malformed input and
/// Error(kOutOfRange / kDimensionMismatch / kEmptyMask) for constraint
/// violations.
CueSpecFile parse_cue_spec(const std::string& json_text, const std::filesystem::path& base_dir);
CueSpecFile load_cue_spec(const std::filesystem::path& path);

std::string scene_to_json(const sim::Scene& scene);
/// Explicit "balls" are taken as given; otherwise "random_balls" discs are
/// drawn from the seed. seed_override wins over the file's "seed" key.
sim::Scene scene_from_json(const std::string& json_text, std::optional<std::uint64_t> seed_override);
sim::Scene load_scene(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override);

void write_clip(const std::filesystem::path& dir, const sim::Clip& clip);
/// Reads frames, masks, depth, flow and scene.json. states stays empty.
sim::Clip read_clip(const std::filesystem::path& dir);
/// Reads only the frame_%03d.pgm sequence.
std::vector<Grid<std::uint8_t>> read_frames(const std::filesystem::path& dir);

}  // namespace densecue::io
