// Copyright 2026 The densecue Authors
// SPDX-License-Identifier: Apache-2.0

#include "densecue/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "densecue/error.hpp"

namespace densecue::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t off) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[off + i]) << (8 * i);
  return v;
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string numbered(const char* pattern, int a, int b = -1) {
  char buf[64];
  if (b < 0) {
    std::snprintf(buf, sizeof buf, pattern, a);
  } else {
    std::snprintf(buf, sizeof buf, pattern, a, b);
  }
  return buf;
}

}  // namespace

std::vector<std::uint8_t> encode_cue1(const Tensor& t) {
  const std::size_t count = static_cast<std::size_t>(t.height) * t.width * t.channels;
  if (t.data.size() != count) {
    throw Error(ErrorCode::kShapeMismatch, "tensor payload does not match H*W*C");
  }
  std::vector<std::uint8_t> out{'C', 'U', 'E', '1'};
  out.reserve(20 + 4 * count);
  put_u32(out, kCue1Version);
  put_u32(out, t.height);
  put_u32(out, t.width);
  put_u32(out, t.channels);
  for (float f : t.data) put_u32(out, std::bit_cast<std::uint32_t>(f));
  return out;
}

Tensor decode_cue1(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 20 || std::memcmp(bytes.data(), "CUE1", 4) != 0) {
    throw Error(ErrorCode::kParse, "missing CUE1 header");
  }
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kCue1Version) {
    throw Error(ErrorCode::kParse, "unsupported CUE1 version " + std::to_string(version));
  }
  Tensor t;
  t.height = get_u32(bytes, 8);
  t.width = get_u32(bytes, 12);
  t.channels = get_u32(bytes, 16);
  const std::uint64_t count = static_cast<std::uint64_t>(t.height) * t.width * t.channels;
  if (bytes.size() - 20 != 4 * count) {
    throw Error(ErrorCode::kParse, "CUE1 payload length does not match its header");
  }
  t.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) t.data[i] = std::bit_cast<float>(get_u32(bytes, 20 + 4 * i));
  return t;
}

void write_cue1(const fs::path& path, const Tensor& t) { write_bytes(path, encode_cue1(t)); }

Tensor read_cue1(const fs::path& path) { return decode_cue1(read_bytes(path)); }

Tensor to_tensor(const cue::CueField& field) {
  return Tensor{static_cast<std::uint32_t>(field.height()), static_cast<std::uint32_t>(field.width()),
                cue::CueField::kChannels, field.interleaved()};
}

cue::CueField cue_field_from_tensor(const Tensor& t) {
  if (t.channels != cue::CueField::kChannels) {
    throw Error(ErrorCode::kShapeMismatch, "cue tensors have 4 channels");
  }
  cue::CueField f(static_cast<int>(t.width), static_cast<int>(t.height));
  for (std::uint32_t y = 0; y < t.height; ++y) {
    for (std::uint32_t x = 0; x < t.width; ++x) {
      f.set(static_cast<int>(x), static_cast<int>(y),
            {t.at(y, x, 0), t.at(y, x, 1), t.at(y, x, 2), t.at(y, x, 3)});
    }
  }
  return f;
}

Tensor to_tensor(const FlowField& flow) {
  Tensor t{static_cast<std::uint32_t>(flow.height()), static_cast<std::uint32_t>(flow.width()), 2, {}};
  t.data.reserve(flow.u.size() * 2);
  for (std::size_t p = 0; p < flow.u.size(); ++p) {
    t.data.push_back(flow.u[p]);
    t.data.push_back(flow.v[p]);
  }
  return t;
}

FlowField flow_from_tensor(const Tensor& t) {
  if (t.channels != 2) throw Error(ErrorCode::kShapeMismatch, "flow tensors have 2 channels");
  FlowField f(static_cast<int>(t.width), static_cast<int>(t.height));
  for (std::size_t p = 0; p < f.u.size(); ++p) {
    f.u[p] = t.data[2 * p];
    f.v[p] = t.data[2 * p + 1];
  }
  return f;
}

Tensor to_tensor(const DepthMap& depth) {
  return Tensor{static_cast<std::uint32_t>(depth.height()), static_cast<std::uint32_t>(depth.width()), 1,
                depth.data()};
}

DepthMap depth_from_tensor(const Tensor& t) {
  if (t.channels != 1) throw Error(ErrorCode::kShapeMismatch, "depth tensors have 1 channel");
  DepthMap d(static_cast<int>(t.width), static_cast<int>(t.height));
  d.data() = t.data;
  return d;
}

void write_pgm(const fs::path& path, const Grid<std::uint8_t>& image) {
  std::string header = "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.insert(bytes.end(), image.data().begin(), image.data().end());
  write_bytes(path, bytes);
}

Grid<std::uint8_t> read_pgm(const fs::path& path) {
  const std::vector<std::uint8_t> bytes = read_bytes(path);
  std::size_t pos = 0;
  auto skip_space = [&] {
    for (;;) {
      while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        return;
      }
    }
  };
  auto number = [&] {
    skip_space();
    long v = 0;
    std::size_t digits = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      if (++digits > 9) throw Error(ErrorCode::kParse, "PGM header number too large");
    }
    if (digits == 0) throw Error(ErrorCode::kParse, "malformed PGM header in " + path.string());
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw Error(ErrorCode::kParse, path.string() + " is not a binary PGM (P5)");
  }
  pos = 2;
  const long w = number();
  const long h = number();
  const long maxval = number();
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255) {
    throw Error(ErrorCode::kParse, "unsupported PGM geometry or depth in " + path.string());
  }
  ++pos;  // single whitespace before the raster
  const std::size_t count = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (bytes.size() < pos + count) throw Error(ErrorCode::kParse, "truncated PGM raster in " + path.string());
  Grid<std::uint8_t> img(static_cast<int>(w), static_cast<int>(h));
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), count, img.data().begin());
  return img;
}

void write_ppm(const fs::path& path, int width, int height, std::span<const std::uint8_t> rgb) {
  if (rgb.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3) {
    throw Error(ErrorCode::kShapeMismatch, "PPM payload size");
  }
  std::string header = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.insert(bytes.end(), rgb.begin(), rgb.end());
  write_bytes(path, bytes);
}

std::vector<std::uint8_t> render_cue_viz(const cue::CueField& field) {
  std::vector<std::uint8_t> out;
  out.reserve(field.u.size() * 3);
  for (std::size_t p = 0; p < field.u.size(); ++p) {
    double r = 0.0, g = 0.0, b = 0.0;
    const double u = field.u[p];
    const double v = field.v[p];
    const double mag = std::min(1.0, std::hypot(u, v));
    if (mag > 0.0) {
      // HSV with s = 1, value = magnitude.
      double hue = std::atan2(v, u) / (2.0 * M_PI);
      if (hue < 0.0) hue += 1.0;
      const double hh = hue * 6.0;
      const int sector = static_cast<int>(hh) % 6;
      const double frac = hh - std::floor(hh);
      const double rise = frac * mag;
      const double fall = (1.0 - frac) * mag;
      switch (sector) {
        case 0: r = mag; g = rise; break;
        case 1: r = fall; g = mag; break;
        case 2: g = mag; b = rise; break;
        case 3: g = fall; b = mag; break;
        case 4: r = rise; b = mag; break;
        default: r = mag; b = fall; break;
      }
    }
    const double dz = field.dz[p];
    const double tint = 0.5 * std::min(1.0, std::abs(dz));
    if (dz > 0.0) {
      r = r + (1.0 - r) * tint;
      g *= 1.0 - tint;
      b *= 1.0 - tint;
    } else if (dz < 0.0) {
      b = b + (1.0 - b) * tint;
      r *= 1.0 - tint;
      g *= 1.0 - tint;
    }
    out.push_back(static_cast<std::uint8_t>(std::lround(255.0 * r)));
    out.push_back(static_cast<std::uint8_t>(std::lround(255.0 * g)));
    out.push_back(static_cast<std::uint8_t>(std::lround(255.0 * b)));
  }
  return out;
}

CueSpecFile parse_cue_spec(const std::string& json_text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, e.what());
  }

  CueSpecFile spec;
  std::vector<double> raw_mass;
  try {
    spec.width = doc.at("width").get<int>();
    spec.height = doc.at("height").get<int>();
    if (spec.width <= 0 || spec.height <= 0) {
      throw Error(ErrorCode::kOutOfRange, "width and height must be positive");
    }
    const auto& instances = doc.at("instances");
    if (!instances.is_array() || instances.empty()) {
      throw Error(ErrorCode::kParse, "\"instances\" must be a non-empty array");
    }
    for (const auto& inst : instances) {
      cue::InstanceSpec s;
      const auto& arrow = inst.at("arrow");
      const auto start = arrow.at("start").get<std::vector<double>>();
      const auto end = arrow.at("end").get<std::vector<double>>();
      if (start.size() != 2 || end.size() != 2) {
        throw Error(ErrorCode::kParse, "arrow endpoints must be [x, y]");
      }
      s.arrow.start = {start[0], start[1]};
      s.arrow.end = {end[0], end[1]};
      s.arrow.depth_delta = arrow.value("dz", 0.0);
      if (!(s.arrow.depth_delta >= -1.0 && s.arrow.depth_delta <= 1.0)) {
        throw Error(ErrorCode::kOutOfRange, "arrow dz " + std::to_string(s.arrow.depth_delta) +
                                                " outside [-1, 1]");
      }
      const double mass = inst.value("mass", 1.0);
      if (!(mass > 0.0) || !std::isfinite(mass)) {
        throw Error(ErrorCode::kOutOfRange, "instance mass must be positive");
      }
      raw_mass.push_back(mass);

      fs::path mask_path = inst.at("mask_path").get<std::string>();
      if (mask_path.is_relative()) mask_path = base_dir / mask_path;
      s.mask = read_pgm(mask_path);
      for (auto& b : s.mask.data()) b = b != 0;
      if (!s.mask.same_shape(spec.width, spec.height)) {
        throw Error(ErrorCode::kDimensionMismatch, mask_path.string() + " does not match the declared size");
      }
      spec.instances.push_back(std::move(s));
    }
    spec.mass_max = doc.value("mass_max", *std::max_element(raw_mass.begin(), raw_mass.end()));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, e.what());
  }
  for (std::size_t i = 0; i < raw_mass.size(); ++i) {
    if (raw_mass[i] > spec.mass_max) {
      throw Error(ErrorCode::kOutOfRange, "instance mass exceeds mass_max");
    }
    spec.instances[i].mass = raw_mass[i] / spec.mass_max;
  }
  return spec;
}

CueSpecFile load_cue_spec(const fs::path& path) {
  return parse_cue_spec(read_text(path), path.parent_path());
}

std::string scene_to_json(const sim::Scene& scene) {
  json doc;
  doc["width"] = scene.width;
  doc["height"] = scene.height;
  doc["frames"] = scene.frames;
  doc["fps"] = scene.fps;
  doc["dt"] = scene.dt;
  doc["seed"] = scene.seed;
  doc["balls"] = json::array();
  for (const auto& b : scene.balls) {
    doc["balls"].push_back({{"center", {b.center.x, b.center.y}},
                            {"velocity", {b.velocity.x, b.velocity.y}},
                            {"radius", b.radius},
                            {"mass", b.mass},
                            {"z", b.z},
                            {"vz", b.vz}});
  }
  return doc.dump(2);
}

sim::Scene scene_from_json(const std::string& json_text, std::optional<std::uint64_t> seed_override) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, e.what());
  }
  try {
    const int width = doc.value("width", 64);
    const int height = doc.value("height", 64);
    const int frames = doc.value("frames", 49);
    if (width <= 0 || height <= 0 || frames < 2) {
      throw Error(ErrorCode::kOutOfRange, "scene needs positive size and at least two frames");
    }
    const std::uint64_t seed = seed_override ? *seed_override : doc.value("seed", std::uint64_t{0});
    sim::Scene scene;
    if (doc.contains("balls")) {
      scene.width = width;
      scene.height = height;
      scene.frames = frames;
      scene.seed = seed;
      for (const auto& jb : doc.at("balls")) {
        sim::Ball b;
        const auto c = jb.at("center").get<std::vector<double>>();
        const auto v = jb.value("velocity", std::vector<double>{0.0, 0.0});
        if (c.size() != 2 || v.size() != 2) throw Error(ErrorCode::kParse, "center/velocity must be [x, y]");
        b.center = {c[0], c[1]};
        b.velocity = {v[0], v[1]};
        b.radius = jb.value("radius", 4.0);
        b.mass = jb.value("mass", 1.0);
        b.z = jb.value("z", 0.5);
        b.vz = jb.value("vz", 0.0);
        if (!(b.radius > 0.0) || !(b.mass > 0.0) || b.z < 0.0 || b.z > 1.0) {
          throw Error(ErrorCode::kOutOfRange, "ball needs radius > 0, mass > 0, z in [0, 1]");
        }
        scene.balls.push_back(b);
      }
    } else {
      const auto count = doc.value("random_balls", std::size_t{2});
      scene = sim::random_scene(width, height, count, seed, frames);
    }
    scene.fps = doc.value("fps", 16.0);
    scene.dt = doc.value("dt", 1.0);
    if (!(scene.dt > 0.0)) throw Error(ErrorCode::kOutOfRange, "dt must be positive");
    return scene;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, e.what());
  }
}

sim::Scene load_scene(const fs::path& path, std::optional<std::uint64_t> seed_override) {
  return scene_from_json(read_text(path), seed_override);
}

void write_clip(const fs::path& dir, const sim::Clip& clip) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  for (std::size_t f = 0; f < clip.frames.size(); ++f) {
    const int fi = static_cast<int>(f);
    write_pgm(dir / numbered("frame_%03d.pgm", fi), clip.frames[f]);
    write_cue1(dir / numbered("depth_%03d.cue", fi), to_tensor(clip.depth[f]));
    for (std::size_t i = 0; i < clip.masks[f].size(); ++i) {
      Grid<std::uint8_t> m = clip.masks[f][i];
      for (auto& b : m.data()) b = b ? 255 : 0;
      write_pgm(dir / numbered("mask_%03d_%02d.pgm", fi, static_cast<int>(i)), m);
    }
  }
  for (std::size_t f = 0; f < clip.flow.size(); ++f) {
    write_cue1(dir / numbered("flow_%03d.cue", static_cast<int>(f)), to_tensor(clip.flow[f]));
  }
  std::ofstream out(dir / "scene.json");
  if (!out) throw Error(ErrorCode::kIo, "cannot write scene.json");
  out << scene_to_json(clip.scene) << "\n";
}

std::vector<Grid<std::uint8_t>> read_frames(const fs::path& dir) {
  std::vector<Grid<std::uint8_t>> frames;
  for (int f = 0;; ++f) {
    const fs::path p = dir / numbered("frame_%03d.pgm", f);
    if (!fs::exists(p)) break;
    frames.push_back(read_pgm(p));
  }
  if (frames.empty()) throw Error(ErrorCode::kIo, "no frame_000.pgm in " + dir.string());
  return frames;
}

sim::Clip read_clip(const fs::path& dir) {
  sim::Clip clip;
  clip.scene = load_scene(dir / "scene.json", std::nullopt);
  clip.frames = read_frames(dir);
  clip.width = clip.frames.front().width();
  clip.height = clip.frames.front().height();
  const std::size_t count = clip.scene.balls.size();
  for (std::size_t f = 0; f < clip.frames.size(); ++f) {
    const int fi = static_cast<int>(f);
    clip.depth.push_back(depth_from_tensor(read_cue1(dir / numbered("depth_%03d.cue", fi))));
    std::vector<InstanceMask> masks;
    for (std::size_t i = 0; i < count; ++i) {
      InstanceMask m = read_pgm(dir / numbered("mask_%03d_%02d.pgm", fi, static_cast<int>(i)));
      for (auto& b : m.data()) b = b != 0;
      masks.push_back(std::move(m));
    }
    clip.masks.push_back(std::move(masks));
    if (f + 1 < clip.frames.size()) {
      clip.flow.push_back(flow_from_tensor(read_cue1(dir / numbered("flow_%03d.cue", fi))));
    }
  }
  return clip;
}

}  // namespace densecue::io
