#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "convoff/layer.hpp"
#include "convoff/patch.hpp"
#include "convoff/reference.hpp"
#include "convoff/tensor.hpp"

using namespace convoff;

namespace {

LayerSpec make_layer(int c_in, int h_in, int w_in, int n, int h_k, int w_k,
                     int s_h = 1, int s_w = 1) {
  LayerSpec l;
  l.c_in = c_in;
  l.h_in = h_in;
  l.w_in = w_in;
  l.n_kernels = n;
  l.h_k = h_k;
  l.w_k = w_k;
  l.s_h = s_h;
  l.s_w = s_w;
  return l;
}

// naive oracle, written independently of reference_convolution
Tensor3 six_loop_conv(const Tensor3& in, const std::vector<Tensor3>& ks,
                      const LayerSpec& l) {
  Tensor3 out(l.c_out(), l.h_out(), l.w_out(), 0.0);
  for (size_t lk = 0; lk < ks.size(); ++lk)
    for (int i = 0; i + l.h_k <= l.h_in; i += l.s_h)
      for (int j = 0; j + l.w_k <= l.w_in; j += l.s_w) {
        double acc = 0.0;
        for (int c = 0; c < l.c_in; ++c)
          for (int h = 0; h < l.h_k; ++h)
            for (int w = 0; w < l.w_k; ++w)
              acc += in.at(c, i + h, j + w) * ks[lk].at(c, h, w);
        out.at(static_cast<int>(lk), i / l.s_h, j / l.s_w) = acc;
      }
  return out;
}

}  // namespace

TEST_CASE("output dims") {
  SECTION("two-channel 5x5 layer with two 3x3 kernels") {
    const auto [c, h, w] = output_dims(make_layer(2, 5, 5, 2, 3, 3));
    CHECK(c == 2);
    CHECK(h == 3);
    CHECK(w == 3);
    CHECK(PatchSet(make_layer(2, 5, 5, 2, 3, 3)).size() == 9);
  }
  SECTION("identity case") {
    const auto [c, h, w] = output_dims(make_layer(1, 1, 1, 1, 1, 1));
    CHECK(c == 1);
    CHECK(h == 1);
    CHECK(w == 1);
  }
  SECTION("strided 8x8 against placement enumeration") {
    const LayerSpec l = make_layer(3, 8, 8, 4, 3, 3, 2, 2);
    // oracle: count anchors where the kernel fits
    int rows = 0, cols = 0;
    for (int h0 = 0; h0 + l.h_k <= l.h_in; h0 += l.s_h) ++rows;
    for (int w0 = 0; w0 + l.w_k <= l.w_in; w0 += l.s_w) ++cols;
    CHECK(rows == 3);
    CHECK(cols == 3);
    const auto [c, h, w] = output_dims(l);
    CHECK(c == 4);
    CHECK(h == rows);
    CHECK(w == cols);
  }
}

TEST_CASE("reference convolution") {
  SECTION("all ones") {
    const LayerSpec l = make_layer(1, 3, 3, 1, 3, 3);
    const Tensor3 in(1, 3, 3, 1.0);
    const std::vector<Tensor3> ks{Tensor3(1, 3, 3, 1.0)};
    const Tensor3 out = reference_convolution(in, ks, l);
    REQUIRE(out.size() == 1);
    CHECK(out.at(0, 0, 0) == 9.0);
  }
  SECTION("all zeros input") {
    const LayerSpec l = make_layer(2, 4, 5, 3, 2, 2);
    std::mt19937 eng(11);
    const Tensor3 in(2, 4, 5, 0.0);
    std::vector<Tensor3> ks;
    for (int k = 0; k < 3; ++k) ks.push_back(random_int_tensor(2, 2, 2, eng));
    for (double v : reference_convolution(in, ks, l).data) CHECK(v == 0.0);
  }
  SECTION("matches the independent oracle on random integer data") {
    std::mt19937 eng(20240);
    for (int trial = 0; trial < 30; ++trial) {
      const int c_in = 1 + static_cast<int>(eng() % 3);
      const int h_k = 1 + static_cast<int>(eng() % 3);
      const int w_k = 1 + static_cast<int>(eng() % 3);
      const int h_in = h_k + static_cast<int>(eng() % 5);
      const int w_in = w_k + static_cast<int>(eng() % 5);
      const int n = 1 + static_cast<int>(eng() % 3);
      const int s_h = 1 + static_cast<int>(eng() % 2);
      const int s_w = 1 + static_cast<int>(eng() % 2);
      const LayerSpec l = make_layer(c_in, h_in, w_in, n, h_k, w_k, s_h, s_w);
      const Tensor3 in = random_int_tensor(c_in, h_in, w_in, eng);
      std::vector<Tensor3> ks;
      for (int k = 0; k < n; ++k) ks.push_back(random_int_tensor(c_in, h_k, w_k, eng));
      CHECK(reference_convolution(in, ks, l) == six_loop_conv(in, ks, l));
    }
  }
  SECTION("dimension mismatch") {
    const LayerSpec l = make_layer(2, 5, 5, 2, 3, 3);
    const Tensor3 in(1, 5, 5, 0.0);  // wrong channel count
    const std::vector<Tensor3> ks{Tensor3(2, 3, 3), Tensor3(2, 3, 3)};
    CHECK_THROWS_AS(reference_convolution(in, ks, l), ShapeError);
  }
}

TEST_CASE("patch footprints") {
  const LayerSpec l = make_layer(2, 5, 5, 2, 3, 3);
  SECTION("corner patches of the 5x5 layer") {
    std::set<PixelId> want;
    for (int h = 0; h < 3; ++h)
      for (int w = 0; w < 3; ++w) want.insert({h, w});
    CHECK(patch_footprint({0, 0}, l) == want);

    want.clear();
    for (int h = 2; h < 5; ++h)
      for (int w = 2; w < 5; ++w) want.insert({h, w});
    CHECK(patch_footprint({2, 2}, l) == want);
  }
  SECTION("1x1 kernel touches a single pixel") {
    const LayerSpec one = make_layer(1, 4, 4, 1, 1, 1, 2, 2);
    CHECK(patch_footprint({1, 1}, one) == std::set<PixelId>{{2, 2}});
  }
  SECTION("footprint is always h_k * w_k pixels") {
    for (int p = 0; p < l.n_patches(); ++p)
      CHECK(patch_footprint_linear(p, l).size() ==
            static_cast<size_t>(l.h_k) * l.w_k);
  }
}

TEST_CASE("nb_op_value") {
  CHECK(nb_op_value(make_layer(2, 5, 5, 2, 3, 3)) == 18);
  CHECK(nb_op_value(make_layer(1, 1, 1, 1, 1, 1)) == 1);
  CHECK(nb_op_value(make_layer(3, 9, 9, 1, 5, 5)) == 75);
}

TEST_CASE("patch set and pixel algebra properties") {
  std::mt19937 eng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int h_k = 1 + static_cast<int>(eng() % 4);
    const int w_k = 1 + static_cast<int>(eng() % 4);
    const LayerSpec l = make_layer(1 + static_cast<int>(eng() % 3),
                                   h_k + static_cast<int>(eng() % 6),
                                   w_k + static_cast<int>(eng() % 6), 1, h_k, w_k);
    CHECK(static_cast<int>(PatchSet(l).size()) == l.h_out() * l.w_out());

    // stride 1: every pixel of the grid is covered by some patch
    std::set<int> covered;
    for (int p = 0; p < l.n_patches(); ++p)
      for (int px : patch_footprint_linear(p, l)) covered.insert(px);
    CHECK(static_cast<int>(covered.size()) == l.n_pixels());
  }

  SECTION("horizontally adjacent patches overlap in (w_k - s_w)+ columns") {
    for (int s_w = 1; s_w <= 4; ++s_w) {
      const LayerSpec l = make_layer(1, 6, 12, 1, 3, 3, 1, s_w);
      if (l.w_out() < 2) continue;
      const auto a = patch_footprint({0, 0}, l);
      const auto b = patch_footprint({0, 1}, l);
      std::set<PixelId> inter;
      for (const auto& px : a)
        if (b.count(px)) inter.insert(px);
      const int cols = std::max(0, l.w_k - s_w);
      CHECK(static_cast<int>(inter.size()) == cols * l.h_k);
    }
  }

  SECTION("linear ids round-trip") {
    const LayerSpec l = make_layer(2, 7, 6, 1, 3, 2, 2, 1);
    for (int p = 0; p < l.n_patches(); ++p)
      CHECK(patch_linear(patch_from_linear(p, l), l) == p);
    for (int px = 0; px < l.n_pixels(); ++px)
      CHECK(pixel_linear(pixel_from_linear(px, l), l) == px);
  }
}

TEST_CASE("padding folds into the layer") {
  const Tensor3 raw(1, 3, 3, 5.0);
  const Tensor3 padded = pad_spatial(raw, 1, 1, 2, 0);
  CHECK(padded.height == 5);
  CHECK(padded.width == 5);
  CHECK(padded.at(0, 0, 0) == 0.0);
  CHECK(padded.at(0, 1, 2) == 5.0);
  CHECK(padded.at(0, 4, 4) == 0.0);
}
