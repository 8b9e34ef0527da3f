// Copyright 2026 The FocusLite Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>

#include "focuslite/tensor.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace focuslite {
namespace {

TEST(Conv2d, ResponseShapeFormula) {
  Rng rng(1);
  auto img = testutil::random_image(235, 235, 3, rng);
  KernelBank<float> k(4, 3, 7, 7);
  std::vector<float> bias(4, 0.f);
  auto g = conv2d_strided(img.view(), k, std::span<const float>(bias), 5, 1);
  EXPECT_EQ(g.rows(), 47u);
  EXPECT_EQ(g.cols(), 47u);
  EXPECT_EQ(g.kernels(), 4u);
  // (H - h + 7) / 5 when exact.
  EXPECT_EQ(g.rows(), (235u - 7u + 7u) / 5u);
}

TEST(Conv2d, DeltaKernelIsIdentity) {
  Rng rng(2);
  auto img = testutil::random_image<double>(9, 11, 1, rng);
  KernelBank<double> k(1, 1, 1, 1);
  k.at(0, 0, 0, 0) = 1.0;
  std::vector<double> bias{0.0};
  auto g = conv2d_strided(img.view(), k, std::span<const double>(bias), 1, 0);
  ASSERT_EQ(g.rows(), 9u);
  ASSERT_EQ(g.cols(), 11u);
  for (std::size_t r = 0; r < 9; ++r)
    for (std::size_t c = 0; c < 11; ++c) EXPECT_EQ(g.at(r, c, 0), img.at(r, c, 0));
}

TEST(Conv2d, MatchesQuadrupleLoopReference) {
  Rng rng(3);
  auto img = testutil::random_image<double>(16, 16, 3, rng);
  KernelBank<double> k(2, 3, 7, 7);
  for (auto& v : k.data) v = rng.uniform(-1, 1);
  std::vector<double> bias{0.25, -0.5};
  auto g = conv2d_strided(img.view(), k, std::span<const double>(bias), 5, 1);
  auto ref = oracle::conv(testutil::to_raster(img), testutil::to_kernels(k), bias, 5, 1);
  ASSERT_EQ(g.rows(), ref.rows);
  ASSERT_EQ(g.cols(), ref.cols);
  for (std::size_t i = 0; i < ref.v.size(); ++i) {
    EXPECT_NEAR(g.data()[i], ref.v[i], 1e-12);
  }
}

TEST(Conv2d, RandomInstancesAgreeWithReference) {
  Rng rng(4);
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t h = 3 + rng.below(14), w = 3 + rng.below(14);
    const std::size_t c = 1 + rng.below(3), n = 1 + rng.below(3);
    const std::size_t kh = 1 + rng.below(5), kw = 1 + rng.below(5);
    const std::size_t stride = 1 + rng.below(4), pad = rng.below(3);
    if (kh > h + 2 * pad || kw > w + 2 * pad) continue;
    auto img = testutil::random_image<double>(h, w, c, rng);
    KernelBank<double> k(n, c, kh, kw);
    for (auto& v : k.data) v = rng.uniform(-1, 1);
    std::vector<double> bias(n);
    for (auto& b : bias) b = rng.uniform(-1, 1);
    auto g = conv2d_strided(img.view(), k, std::span<const double>(bias), stride, pad);
    auto ref = oracle::conv(testutil::to_raster(img), testutil::to_kernels(k), bias, stride, pad);
    ASSERT_EQ(g.rows(), ref.rows);
    ASSERT_EQ(g.cols(), ref.cols);
    // Output extents obey the floor formula.
    EXPECT_EQ(g.rows(), (h + 2 * pad - kh) / stride + 1);
    EXPECT_EQ(g.cols(), (w + 2 * pad - kw) / stride + 1);
    for (std::size_t i = 0; i < ref.v.size(); ++i) {
      ASSERT_NEAR(g.data()[i], ref.v[i], 1e-12) << "trial " << trial;
    }
  }
}

TEST(Conv2d, IsLinearWithZeroBias) {
  Rng rng(5);
  auto x = testutil::random_image<double>(20, 18, 3, rng);
  auto y = testutil::random_image<double>(20, 18, 3, rng);
  KernelBank<double> k(3, 3, 7, 7);
  for (auto& v : k.data) v = rng.uniform(-1, 1);
  std::vector<double> zero(3, 0.0);
  const double a = 1.7, b = -0.6;
  Image<double> mix(20, 18, 3);
  for (std::size_t i = 0; i < mix.size(); ++i)
    mix.data()[i] = a * x.data()[i] + b * y.data()[i];
  auto gx = conv2d_strided(x.view(), k, std::span<const double>(zero), 5, 1);
  auto gy = conv2d_strided(y.view(), k, std::span<const double>(zero), 5, 1);
  auto gm = conv2d_strided(mix.view(), k, std::span<const double>(zero), 5, 1);
  for (std::size_t i = 0; i < gm.data().size(); ++i) {
    const double expect = a * gx.data()[i] + b * gy.data()[i];
    EXPECT_LE(std::abs(gm.data()[i] - expect), 1e-10 * std::max(1.0, std::abs(expect)));
  }
}

TEST(Conv2d, Errors) {
  Image<float> img(4, 4, 3);
  KernelBank<float> big(1, 3, 7, 7);
  std::vector<float> bias{0.f};
  EXPECT_THROW(conv2d_strided(img.view(), big, std::span<const float>(bias), 1, 1),
               DimensionError);
  KernelBank<float> wrong_channels(1, 1, 3, 3);
  EXPECT_THROW(conv2d_strided(img.view(), wrong_channels, std::span<const float>(bias), 1, 0),
               ShapeError);
}

TEST(ChannelMinMax, ConstantGrid) {
  ResponseGrid<double> g(4, 5, 3);
  for (auto& v : g.data()) v = 2.5;
  auto e = channel_min_max(g);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(e.min[k], 2.5);
    EXPECT_EQ(e.max[k], 2.5);
    EXPECT_EQ(e.argmin[k], 0u);
    EXPECT_EQ(e.argmax[k], 0u);
  }
}

TEST(ChannelMinMax, RampGrid) {
  ResponseGrid<double> g(3, 3, 1);
  for (std::size_t i = 0; i < 9; ++i) g.data()[i] = static_cast<double>(i);
  auto e = channel_min_max(g);
  EXPECT_EQ(e.min[0], 0.0);
  EXPECT_EQ(e.argmin[0], 0u);
  EXPECT_EQ(e.max[0], 8.0);
  EXPECT_EQ(e.argmax[0], 8u);
}

TEST(ChannelMinMax, MatchesExhaustiveScanWithDuplicates) {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    ResponseGrid<double> g(5, 5, 4);
    // Few distinct values, so extremes repeat.
    for (auto& v : g.data()) v = static_cast<double>(rng.below(4));
    auto e = channel_min_max(g);
    oracle::Grid og{5, 5, 4, std::vector<double>(g.data().begin(), g.data().end())};
    for (std::size_t k = 0; k < 4; ++k) {
      const auto mn = oracle::min_of(og, k);
      const auto mx = oracle::max_of(og, k);
      EXPECT_EQ(e.min[k], mn.value);
      EXPECT_EQ(e.argmin[k], mn.index);
      EXPECT_EQ(e.max[k], mx.value);
      EXPECT_EQ(e.argmax[k], mx.index);
      for (std::size_t p = 0; p < 25; ++p) {
        EXPECT_LE(e.min[k], og.at(p / 5, p % 5, k));
        EXPECT_GE(e.max[k], og.at(p / 5, p % 5, k));
      }
    }
  }
}

TEST(ChannelMinMax, EmptyGridThrows) {
  ResponseGrid<double> g;
  EXPECT_THROW(channel_min_max(g), DimensionError);
}

TEST(Grayscale, KnownColours) {
  Image<double> img(1, 2, 3);
  img.at(0, 0, 0) = img.at(0, 0, 1) = img.at(0, 0, 2) = 1.0;
  img.at(0, 1, 0) = 1.0;
  auto g = to_grayscale(img);
  EXPECT_NEAR(g.at(0, 0, 0), 1.0, 1e-15);
  EXPECT_NEAR(g.at(0, 1, 0), 0.299, 1e-15);
}

TEST(Grayscale, MatchesScalarFormula) {
  Rng rng(7);
  auto img = testutil::random_image<double>(6, 7, 3, rng);
  auto g = to_grayscale(img);
  for (std::size_t r = 0; r < 6; ++r)
    for (std::size_t c = 0; c < 7; ++c) {
      const double expect = 0.299 * img.at(r, c, 0) + 0.587 * img.at(r, c, 1) +
                            0.114 * img.at(r, c, 2);
      EXPECT_NEAR(g.at(r, c, 0), expect, 1e-15);
    }
  EXPECT_THROW(to_grayscale(Image<double>(2, 2, 1)), ShapeError);
}

TEST(BilinearResize, SameSizeIsBitIdentical) {
  Rng rng(8);
  auto img = testutil::random_image(5, 9, 3, rng);
  EXPECT_EQ(bilinear_resize(img, 5, 9), img);
}

TEST(BilinearResize, LinearRampMidpoint) {
  Image<double> img(1, 2, 1, std::vector<double>{0.0, 1.0});
  auto out = bilinear_resize(img, 1, 3);
  EXPECT_DOUBLE_EQ(out.at(0, 0, 0), 0.0);
  EXPECT_DOUBLE_EQ(out.at(0, 1, 0), 0.5);
  EXPECT_DOUBLE_EQ(out.at(0, 2, 0), 1.0);
}

TEST(BilinearResize, MatchesClosedForm) {
  Image<double> img(4, 4, 1);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) img.at(r, c, 0) = 3.0 * r + 0.5 * c + r * c;
  auto out = bilinear_resize(img, 7, 7);
  for (std::size_t r = 0; r < 7; ++r)
    for (std::size_t c = 0; c < 7; ++c) {
      // Corner-aligned: source coordinate = index * 3 / 6.
      const double y = r * 0.5, x = c * 0.5;
      const auto y0 = static_cast<std::size_t>(std::floor(y));
      const auto x0 = static_cast<std::size_t>(std::floor(x));
      const auto y1 = std::min<std::size_t>(y0 + 1, 3), x1 = std::min<std::size_t>(x0 + 1, 3);
      const double fy = y - y0, fx = x - x0;
      const double expect = (1 - fy) * ((1 - fx) * img.at(y0, x0, 0) + fx * img.at(y0, x1, 0)) +
                            fy * ((1 - fx) * img.at(y1, x0, 0) + fx * img.at(y1, x1, 0));
      EXPECT_NEAR(out.at(r, c, 0), expect, 1e-12);
      // Bilinear interpolation reproduces a bilinear function exactly.
      EXPECT_NEAR(out.at(r, c, 0), 3.0 * y + 0.5 * x + y * x, 1e-12);
    }
  EXPECT_THROW(bilinear_resize(img, 0, 3), DimensionError);
}

TEST(ImageTensor, ByteNormalisationInUnitInterval) {
  ByteImage b(2, 2, 3);
  b.data()[0] = 255;
  b.data()[1] = 128;
  auto f = normalize_bytes(b);
  EXPECT_FLOAT_EQ(f.data()[0], 1.0f);
  EXPECT_FLOAT_EQ(f.data()[1], 128.0f / 255.0f);
  for (float v : f.data()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
  EXPECT_EQ(quantize_bytes(f), b);
  EXPECT_THROW(Image<float>(0, 3, 3), DimensionError);
  EXPECT_THROW(Image<float>(2, 2, 3, std::vector<float>(5)), ShapeError);
}

}  // namespace
}  // namespace focuslite
