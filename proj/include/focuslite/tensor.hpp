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

#pragma once

#include <algorithm>
#include <cmath>
#include <type_traits>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "focuslite/errors.hpp"

namespace focuslite {

// Non-owning view of an interleaved H x W x C raster. Pixels inside a row are
// contiguous; rows are `row_stride` elements apart so crops of a larger tile
// can be viewed without copying.
template <typename T>
struct ImageView {
  const T* data = nullptr;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::size_t row_stride = 0;

  const T& at(std::size_t row, std::size_t col, std::size_t ch) const {
    return data[row * row_stride + col * channels + ch];
  }
  const T* row_ptr(std::size_t row) const { return data + row * row_stride; }

  ImageView crop(std::size_t top, std::size_t left, std::size_t h,
                 std::size_t w) const {
    if (top + h > height || left + w > width) {
      throw DimensionError("crop " + std::to_string(h) + "x" +
                           std::to_string(w) + " at (" + std::to_string(top) +
                           "," + std::to_string(left) +
                           ") exceeds image bounds");
    }
    return {data + top * row_stride + left * channels, h, w, channels,
            row_stride};
  }
};

// Owning H x W x C raster, row-major [row][col][channel].
template <typename T>
class Image {
 public:
  using value_type = T;

  Image() = default;
  Image(std::size_t height, std::size_t width, std::size_t channels,
        T fill = T{})
      : height_(height), width_(width), channels_(channels),
        data_(height * width * channels, fill) {
    if (height == 0 || width == 0 || channels == 0) {
      throw DimensionError("image dimensions must be positive");
    }
  }
  Image(std::size_t height, std::size_t width, std::size_t channels,
        std::vector<T> data)
      : height_(height), width_(width), channels_(channels),
        data_(std::move(data)) {
    if (height == 0 || width == 0 || channels == 0) {
      throw DimensionError("image dimensions must be positive");
    }
    if (data_.size() != height * width * channels) {
      throw ShapeError("image data length does not match dimensions");
    }
  }
  explicit Image(ImageView<T> view)
      : Image(view.height, view.width, view.channels) {
    const std::size_t row_len = width_ * channels_;
    for (std::size_t r = 0; r < height_; ++r) {
      std::copy_n(view.row_ptr(r), row_len, data_.data() + r * row_len);
    }
  }

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& at(std::size_t row, std::size_t col, std::size_t ch) {
    return data_[(row * width_ + col) * channels_ + ch];
  }
  const T& at(std::size_t row, std::size_t col, std::size_t ch) const {
    return data_[(row * width_ + col) * channels_ + ch];
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  ImageView<T> view() const {
    return {data_.data(), height_, width_, channels_, width_ * channels_};
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::vector<T> data_;
};

using ImageTensor = Image<float>;
using ByteImage = Image<std::uint8_t>;

// value = byte / 255.
template <typename T = float>
Image<T> normalize_bytes(const ByteImage& bytes) {
  std::vector<T> out(bytes.size());
  auto src = bytes.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<T>(src[i]) / static_cast<T>(255);
  }
  return Image<T>(bytes.height(), bytes.width(), bytes.channels(),
                  std::move(out));
}

// Rounds [0,1] intensities to bytes, clamping out-of-range values.
template <typename T>
ByteImage quantize_bytes(const Image<T>& image) {
  std::vector<std::uint8_t> out(image.size());
  auto src = image.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = std::clamp(static_cast<double>(src[i]), 0.0, 1.0);
    out[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  return ByteImage(image.height(), image.width(), image.channels(),
                   std::move(out));
}

template <typename To, typename From>
Image<To> convert_image(const Image<From>& image) {
  std::vector<To> out(image.size());
  auto src = image.data();
  std::transform(src.begin(), src.end(), out.begin(),
                 [](From v) { return static_cast<To>(v); });
  return Image<To>(image.height(), image.width(), image.channels(),
                   std::move(out));
}

// Convolution output lattice, row-major [row][col][kernel].
template <typename T>
class ResponseGrid {
 public:
  ResponseGrid() = default;
  ResponseGrid(std::size_t rows, std::size_t cols, std::size_t kernels)
      : rows_(rows), cols_(cols), kernels_(kernels),
        data_(rows * cols * kernels) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t kernels() const noexcept { return kernels_; }
  bool empty() const noexcept { return data_.empty(); }

  T& at(std::size_t row, std::size_t col, std::size_t k) {
    return data_[(row * cols_ + col) * kernels_ + k];
  }
  const T& at(std::size_t row, std::size_t col, std::size_t k) const {
    return data_[(row * cols_ + col) * kernels_ + k];
  }
  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t kernels_ = 0;
  std::vector<T> data_;
};

// Bank of N kernels stored [N][C][h][w].
template <typename T>
struct KernelBank {
  std::size_t count = 0;
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<T> data;

  KernelBank() = default;
  KernelBank(std::size_t n, std::size_t c, std::size_t h, std::size_t w)
      : count(n), channels(c), height(h), width(w), data(n * c * h * w) {}

  T& at(std::size_t n, std::size_t c, std::size_t i, std::size_t j) {
    return data[((n * channels + c) * height + i) * width + j];
  }
  const T& at(std::size_t n, std::size_t c, std::size_t i,
              std::size_t j) const {
    return data[((n * channels + c) * height + i) * width + j];
  }
  std::size_t per_kernel() const noexcept { return channels * height * width; }

  friend bool operator==(const KernelBank&, const KernelBank&) = default;
};

// floor((extent + 2 * padding - kernel) / stride) + 1.
inline std::size_t conv_output_extent(std::size_t extent, std::size_t kernel,
                                      std::size_t stride,
                                      std::size_t padding) {
  if (stride == 0) throw ArgumentError("stride must be at least 1");
  const std::size_t padded = extent + 2 * padding;
  if (kernel == 0 || kernel > padded) {
    throw DimensionError("kernel extent " + std::to_string(kernel) +
                         " exceeds padded input extent " +
                         std::to_string(padded));
  }
  return (padded - kernel) / stride + 1;
}

// Strided 2D cross-correlation over a zero-padded input:
//   out[r][c][n] = bias[n] + sum_{k,i,j} K[n][k][i][j] * X[r*s+i-p][c*s+j-p][k]
// Accumulates in double regardless of T.
template <typename In, typename T>
ResponseGrid<T> conv2d_strided(const ImageView<In>& input,
                               const KernelBank<T>& kernels,
                               std::span<const T> bias, std::size_t stride,
                               std::size_t padding) {
  if (input.channels != kernels.channels) {
    throw ShapeError("input has " + std::to_string(input.channels) +
                     " channels, kernels expect " +
                     std::to_string(kernels.channels));
  }
  if (bias.size() != kernels.count) {
    throw ShapeError("bias length does not match kernel count");
  }
  const std::size_t rows =
      conv_output_extent(input.height, kernels.height, stride, padding);
  const std::size_t cols =
      conv_output_extent(input.width, kernels.width, stride, padding);
  const std::size_t n_kernels = kernels.count;
  const std::size_t kh = kernels.height;
  const std::size_t kw = kernels.width;
  const std::size_t ch = kernels.channels;

  // Repack to [N][h][w][C] so each kernel row matches the input's memory run.
  std::vector<T> packed(kernels.data.size());
  for (std::size_t n = 0; n < n_kernels; ++n)
    for (std::size_t i = 0; i < kh; ++i)
      for (std::size_t j = 0; j < kw; ++j)
        for (std::size_t k = 0; k < ch; ++k)
          packed[((n * kh + i) * kw + j) * ch + k] = kernels.at(n, k, i, j);

  ResponseGrid<T> out(rows, cols, n_kernels);
  const auto h_in = static_cast<std::ptrdiff_t>(input.height);
  const auto w_in = static_cast<std::ptrdiff_t>(input.width);
  const auto pad = static_cast<std::ptrdiff_t>(padding);
  const auto skh = static_cast<std::ptrdiff_t>(kh);
  const auto skw = static_cast<std::ptrdiff_t>(kw);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::ptrdiff_t y0 = static_cast<std::ptrdiff_t>(r * stride) - pad;
    const std::ptrdiff_t i_lo = std::max<std::ptrdiff_t>(0, -y0);
    const std::ptrdiff_t i_hi = std::min<std::ptrdiff_t>(skh, h_in - y0);
    for (std::size_t c = 0; c < cols; ++c) {
      const std::ptrdiff_t x0 = static_cast<std::ptrdiff_t>(c * stride) - pad;
      const std::ptrdiff_t j_lo = std::max<std::ptrdiff_t>(0, -x0);
      const std::ptrdiff_t j_hi = std::min<std::ptrdiff_t>(skw, w_in - x0);
      const std::size_t run =
          j_hi > j_lo ? static_cast<std::size_t>(j_hi - j_lo) * ch : 0;
      for (std::size_t n = 0; n < n_kernels; ++n) {
        double acc = static_cast<double>(bias[n]);
        for (std::ptrdiff_t i = i_lo; i < i_hi; ++i) {
          const In* px = input.row_ptr(static_cast<std::size_t>(y0 + i)) +
                         static_cast<std::size_t>(x0 + j_lo) * ch;
          const T* kp = packed.data() +
                        ((n * kh + static_cast<std::size_t>(i)) * kw +
                         static_cast<std::size_t>(j_lo)) *
                            ch;
          for (std::size_t t = 0; t < run; ++t) {
            acc += static_cast<double>(kp[t]) * static_cast<double>(px[t]);
          }
        }
        out.at(r, c, n) = static_cast<T>(acc);
      }
    }
  }
  return out;
}

template <typename T>
struct ChannelExtrema {
  std::vector<T> min;
  std::vector<T> max;
  // Flat row-major (row * cols + col) positions of the first occurrence.
  std::vector<std::size_t> argmin;
  std::vector<std::size_t> argmax;
};

template <typename T>
ChannelExtrema<T> channel_min_max(const ResponseGrid<T>& grid) {
  if (grid.empty()) throw DimensionError("channel_min_max on an empty grid");
  const std::size_t n = grid.kernels();
  const std::size_t plane = grid.rows() * grid.cols();
  ChannelExtrema<T> ext{std::vector<T>(n), std::vector<T>(n),
                        std::vector<std::size_t>(n, 0),
                        std::vector<std::size_t>(n, 0)};
  auto data = grid.data();
  for (std::size_t k = 0; k < n; ++k) {
    ext.min[k] = ext.max[k] = data[k];
  }
  for (std::size_t p = 1; p < plane; ++p) {
    const T* v = data.data() + p * n;
    for (std::size_t k = 0; k < n; ++k) {
      if (v[k] < ext.min[k]) {
        ext.min[k] = v[k];
        ext.argmin[k] = p;
      }
      if (v[k] > ext.max[k]) {
        ext.max[k] = v[k];
        ext.argmax[k] = p;
      }
    }
  }
  return ext;
}

// Luma 0.299 R + 0.587 G + 0.114 B.
template <typename T>
Image<T> to_grayscale(const Image<T>& input) {
  if (input.channels() != 3) {
    throw ShapeError("grayscale conversion needs 3 channels, got " +
                     std::to_string(input.channels()));
  }
  Image<T> out(input.height(), input.width(), 1);
  auto src = input.data();
  auto dst = out.data();
  for (std::size_t p = 0; p < dst.size(); ++p) {
    const double v = 0.299 * static_cast<double>(src[3 * p]) +
                     0.587 * static_cast<double>(src[3 * p + 1]) +
                     0.114 * static_cast<double>(src[3 * p + 2]);
    if constexpr (std::is_integral_v<T>) {
      dst[p] = static_cast<T>(std::lround(v));
    } else {
      dst[p] = static_cast<T>(v);
    }
  }
  return out;
}

// Corner-aligned bilinear resampling: output index i maps to input
// coordinate i * (in - 1) / (out - 1).
template <typename T>
Image<T> bilinear_resize(const Image<T>& input, std::size_t out_h,
                         std::size_t out_w) {
  if (out_h == 0 || out_w == 0) {
    throw DimensionError("bilinear_resize target dimensions must be positive");
  }
  if (out_h == input.height() && out_w == input.width()) return input;

  struct Tap {
    std::size_t lo, hi;
    double frac;
  };
  auto taps = [](std::size_t in, std::size_t out) {
    std::vector<Tap> t(out);
    for (std::size_t i = 0; i < out; ++i) {
      const double pos = out == 1 ? 0.0
                                  : static_cast<double>(i * (in - 1)) /
                                        static_cast<double>(out - 1);
      const auto lo = std::min(static_cast<std::size_t>(pos), in - 1);
      const auto hi = std::min(lo + 1, in - 1);
      t[i] = {lo, hi, pos - static_cast<double>(lo)};
    }
    return t;
  };
  const auto ty = taps(input.height(), out_h);
  const auto tx = taps(input.width(), out_w);
  const std::size_t ch = input.channels();
  Image<T> out(out_h, out_w, ch);
  for (std::size_t r = 0; r < out_h; ++r) {
    const auto& yt = ty[r];
    for (std::size_t c = 0; c < out_w; ++c) {
      const auto& xt = tx[c];
      for (std::size_t k = 0; k < ch; ++k) {
        const double top =
            (1.0 - xt.frac) * static_cast<double>(input.at(yt.lo, xt.lo, k)) +
            xt.frac * static_cast<double>(input.at(yt.lo, xt.hi, k));
        const double bottom =
            (1.0 - xt.frac) * static_cast<double>(input.at(yt.hi, xt.lo, k)) +
            xt.frac * static_cast<double>(input.at(yt.hi, xt.hi, k));
        out.at(r, c, k) =
            static_cast<T>((1.0 - yt.frac) * top + yt.frac * bottom);
      }
    }
  }
  return out;
}

}  // namespace focuslite
