#pragma once

#include <tuple>

#include "convoff/errors.hpp"

namespace convoff {

/// 2D convolution layer description. The spatial input dimensions are the
/// padded ones: padding is applied to the data up front (see pad_spatial) and
/// the original amounts are only recorded here for provenance.
struct LayerSpec {
  int c_in = 1;
  int h_in = 1;   // already padded
  int w_in = 1;   // already padded
  int n_kernels = 1;
  int h_k = 1;
  int w_k = 1;
  int s_h = 1;
  int s_w = 1;
  int p_top = 0, p_bottom = 0, p_left = 0, p_right = 0;

  void validate() const {
    if (c_in < 1 || h_in < 1 || w_in < 1 || n_kernels < 1)
      throw ShapeError("LayerSpec: counts must be >= 1");
    if (h_k < 1 || w_k < 1 || s_h < 1 || s_w < 1)
      throw ShapeError("LayerSpec: kernel dims and strides must be >= 1");
    if (h_in < h_k || w_in < w_k)
      throw ShapeError("LayerSpec: kernel larger than (padded) input");
    if (p_top < 0 || p_bottom < 0 || p_left < 0 || p_right < 0)
      throw ShapeError("LayerSpec: negative padding");
  }

  int c_out() const { return n_kernels; }
  int h_out() const { return (h_in - h_k) / s_h + 1; }
  int w_out() const { return (w_in - w_k) / s_w + 1; }

  int n_pixels() const { return h_in * w_in; }          // 2D spatial positions
  int n_patches() const { return h_out() * w_out(); }   // |X|
  long long kernel_elements() const {                    // all kernels, in scalars
    return 1LL * n_kernels * c_in * h_k * w_k;
  }
  long long input_elements() const { return 1LL * c_in * h_in * w_in; }
  long long output_elements() const { return 1LL * c_out() * h_out() * w_out(); }
};

/// (C_out, H_out, W_out) of the layer.
inline std::tuple<int, int, int> output_dims(const LayerSpec& layer) {
  layer.validate();
  return {layer.c_out(), layer.h_out(), layer.w_out()};
}

/// MAC operations needed for one output scalar: C_in * H_K * W_K.
inline long long nb_op_value(const LayerSpec& layer) {
  return 1LL * layer.c_in * layer.h_k * layer.w_k;
}

}  // namespace convoff
