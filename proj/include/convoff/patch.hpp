#pragma once

#include <set>
#include <vector>

#include "convoff/layer.hpp"

namespace convoff {

/// One spatial input position carrying all C_in channel scalars.
struct PixelId {
  int h = 0;
  int w = 0;
  auto operator<=>(const PixelId&) const = default;
};

inline int pixel_linear(const PixelId& p, const LayerSpec& layer) {
  return p.h * layer.w_in + p.w;
}
inline PixelId pixel_from_linear(int id, const LayerSpec& layer) {
  return {id / layer.w_in, id % layer.w_in};
}

/// The input slice that produces output spatial position (i, j); its footprint
/// is always the H_K x W_K pixel window anchored at (s_h*i, s_w*j).
struct Patch {
  int i = 0;
  int j = 0;
  auto operator<=>(const Patch&) const = default;
};

inline int patch_linear(const Patch& p, const LayerSpec& layer) {
  return p.i * layer.w_out() + p.j;  // row-major
}
inline Patch patch_from_linear(int id, const LayerSpec& layer) {
  return {id / layer.w_out(), id % layer.w_out()};
}

/// Pixels covered by one patch.
inline std::set<PixelId> patch_footprint(const Patch& p, const LayerSpec& layer) {
  std::set<PixelId> out;
  const int h0 = layer.s_h * p.i;
  const int w0 = layer.s_w * p.j;
  for (int dh = 0; dh < layer.h_k; ++dh)
    for (int dw = 0; dw < layer.w_k; ++dw)
      out.insert({h0 + dh, w0 + dw});
  return out;
}

/// Same footprint as linear pixel ids, ascending.
inline std::vector<int> patch_footprint_linear(int patch_id, const LayerSpec& layer) {
  const Patch p = patch_from_linear(patch_id, layer);
  std::vector<int> out;
  out.reserve(static_cast<size_t>(layer.h_k) * layer.w_k);
  const int h0 = layer.s_h * p.i;
  const int w0 = layer.s_w * p.j;
  for (int dh = 0; dh < layer.h_k; ++dh)
    for (int dw = 0; dw < layer.w_k; ++dw)
      out.push_back((h0 + dh) * layer.w_in + (w0 + dw));
  return out;
}

/// All patches of the layer, in row-major order.
struct PatchSet {
  explicit PatchSet(const LayerSpec& layer) {
    layer.validate();
    patches.reserve(static_cast<size_t>(layer.n_patches()));
    for (int i = 0; i < layer.h_out(); ++i)
      for (int j = 0; j < layer.w_out(); ++j)
        patches.push_back({i, j});
  }
  std::vector<Patch> patches;
  size_t size() const { return patches.size(); }
};

/// patch id -> covered pixel ids, for every patch. Index with the row-major
/// patch id.
inline std::vector<std::vector<int>> footprints_by_patch(const LayerSpec& layer) {
  std::vector<std::vector<int>> out(static_cast<size_t>(layer.n_patches()));
  for (int p = 0; p < layer.n_patches(); ++p)
    out[static_cast<size_t>(p)] = patch_footprint_linear(p, layer);
  return out;
}

/// pixel id -> patches whose window covers it.
inline std::vector<std::vector<int>> patches_by_pixel(const LayerSpec& layer) {
  std::vector<std::vector<int>> out(static_cast<size_t>(layer.n_pixels()));
  for (int p = 0; p < layer.n_patches(); ++p)
    for (int px : patch_footprint_linear(p, layer))
      out[static_cast<size_t>(px)].push_back(p);
  return out;
}

}  // namespace convoff
