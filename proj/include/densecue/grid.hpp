// Copyright 2026 The densecue Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace densecue {

/// Row-major 2D raster. Pixel (x, y) has its center at (x + 0.5, y + 0.5).
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  bool same_shape(int width, int height) const noexcept {
    return width_ == width && height_ == height;
  }
  template <class U>
  bool same_shape(const Grid<U>& other) const noexcept {
    return same_shape(other.width(), other.height());
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
  }

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Binary instance mask; nonzero means inside.
using InstanceMask = Grid<std::uint8_t>;

inline std::size_t mask_count(const InstanceMask& mask) {
  std::size_t n = 0;
  for (auto b : mask.data()) n += b != 0;
  return n;
}

/// Per-pixel displacement in pixels/frame.
struct FlowField {
  Grid<float> u;
  Grid<float> v;

  FlowField() = default;
  FlowField(int width, int height) : u(width, height), v(width, height) {}
  int width() const noexcept { return u.width(); }
  int height() const noexcept { return u.height(); }
};

/// Normalized camera-relative depth; larger is farther.
using DepthMap = Grid<float>;

}  // namespace densecue
