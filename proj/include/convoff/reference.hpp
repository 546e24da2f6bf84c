#pragma once

#include <vector>

#include "convoff/layer.hpp"
#include "convoff/tensor.hpp"

namespace convoff {

/// Plain cross-correlation:
///   O[l,i,j] = sum_c sum_h sum_w I[c, i*s_h + h, j*s_w + w] * K_l[c,h,w]
inline Tensor3 reference_convolution(const Tensor3& input,
                                     const std::vector<Tensor3>& kernels,
                                     const LayerSpec& layer) {
  layer.validate();
  if (input.channels != layer.c_in || input.height != layer.h_in ||
      input.width != layer.w_in)
    throw ShapeError("reference_convolution: input does not match layer");
  if (static_cast<int>(kernels.size()) != layer.n_kernels)
    throw ShapeError("reference_convolution: kernel count mismatch");
  for (const auto& k : kernels)
    if (k.channels != layer.c_in || k.height != layer.h_k || k.width != layer.w_k)
      throw ShapeError("reference_convolution: kernel shape mismatch");

  Tensor3 out(layer.c_out(), layer.h_out(), layer.w_out(), 0.0);
  for (int l = 0; l < layer.c_out(); ++l)
    for (int i = 0; i < layer.h_out(); ++i)
      for (int j = 0; j < layer.w_out(); ++j) {
        double acc = 0.0;
        for (int c = 0; c < layer.c_in; ++c)
          for (int h = 0; h < layer.h_k; ++h)
            for (int w = 0; w < layer.w_k; ++w)
              acc += input.at(c, i * layer.s_h + h, j * layer.s_w + w) *
                     kernels[static_cast<size_t>(l)].at(c, h, w);
        out.at(l, i, j) = acc;
      }
  return out;
}

}  // namespace convoff
