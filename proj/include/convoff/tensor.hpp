#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "convoff/errors.hpp"

namespace convoff {

/// Dense rank-3 tensor, channel-major layout: index = (c * height + h) * width + w.
struct Tensor3 {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  Tensor3() = default;
  Tensor3(int c, int h, int w, double fill = 0.0)
      : channels(c), height(h), width(w),
        data(static_cast<size_t>(c) * h * w, fill) {
    if (c <= 0 || h <= 0 || w <= 0)
      throw ShapeError("Tensor3: dimensions must be positive");
  }

  size_t size() const { return data.size(); }

  double& at(int c, int h, int w) { return data[index(c, h, w)]; }
  double at(int c, int h, int w) const { return data[index(c, h, w)]; }

  size_t index(int c, int h, int w) const {
    return (static_cast<size_t>(c) * height + h) * width + w;
  }

  bool same_shape(const Tensor3& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }

  bool operator==(const Tensor3& o) const {
    return same_shape(o) && data == o.data;
  }
};

/// Zero-fill spatial padding; channels are untouched.
inline Tensor3 pad_spatial(const Tensor3& t, int top, int bottom, int left, int right) {
  if (top < 0 || bottom < 0 || left < 0 || right < 0)
    throw ShapeError("pad_spatial: negative padding");
  Tensor3 out(t.channels, t.height + top + bottom, t.width + left + right, 0.0);
  for (int c = 0; c < t.channels; ++c)
    for (int h = 0; h < t.height; ++h)
      for (int w = 0; w < t.width; ++w)
        out.at(c, h + top, w + left) = t.at(c, h, w);
  return out;
}

/// Small-integer random tensor. Values are drawn as lo + (engine() % span) so
/// the stream is identical on every platform for a given seed.
inline Tensor3 random_int_tensor(int c, int h, int w, std::mt19937& engine,
                                 int lo = -8, int hi = 8) {
  Tensor3 t(c, h, w);
  const std::uint32_t span = static_cast<std::uint32_t>(hi - lo + 1);
  for (auto& v : t.data) v = static_cast<double>(lo + static_cast<int>(engine() % span));
  return t;
}

}  // namespace convoff
