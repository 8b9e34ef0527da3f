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
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "focuslite/errors.hpp"
#include "focuslite/tensor.hpp"

namespace focuslite {

inline constexpr std::size_t kKernelSize = 7;
inline constexpr std::size_t kInputChannels = 3;
inline constexpr std::size_t kConvStride = 5;
inline constexpr std::size_t kConvPadding = 1;
// Trained input size; every crop fed to the model is kPatchSize^2 x 3.
inline constexpr std::size_t kPatchSize = 235;

enum class LossType : std::uint8_t { kPlcc = 0, kMse = 1 };

inline const char* to_string(LossType loss) {
  return loss == LossType::kPlcc ? "plcc" : "mse";
}

// Predicted focus score. Higher means blurrier.
struct SharpnessScore {
  double value = 0.0;
};

// Trainable parameters of an N-kernel model:
//   y = sum_n [pool_min_w[n] * min(x_n) + pool_max_w[n] * max(x_n)] + pool_bias
// where x_n is the n-th channel of conv(X, kernels) + conv_bias[n].
template <typename T>
struct BasicModelParams {
  KernelBank<T> kernels;
  std::vector<T> conv_bias;
  std::vector<T> pool_min_w;
  std::vector<T> pool_max_w;
  T pool_bias{};
  LossType trained_with = LossType::kPlcc;

  static BasicModelParams zeros(std::size_t n_kernels,
                                std::size_t kernel_size = kKernelSize,
                                std::size_t channels = kInputChannels) {
    if (n_kernels == 0) throw ArgumentError("model needs at least one kernel");
    BasicModelParams p;
    p.kernels = KernelBank<T>(n_kernels, channels, kernel_size, kernel_size);
    p.conv_bias.assign(n_kernels, T{});
    p.pool_min_w.assign(n_kernels, T{});
    p.pool_max_w.assign(n_kernels, T{});
    return p;
  }

  std::size_t n_kernels() const noexcept { return kernels.count; }

  template <typename U>
  BasicModelParams<U> cast() const {
    BasicModelParams<U> out = BasicModelParams<U>::zeros(
        kernels.count, kernels.height, kernels.channels);
    out.kernels.width = kernels.width;
    out.kernels.data.assign(kernels.data.begin(), kernels.data.end());
    out.conv_bias.assign(conv_bias.begin(), conv_bias.end());
    out.pool_min_w.assign(pool_min_w.begin(), pool_min_w.end());
    out.pool_max_w.assign(pool_max_w.begin(), pool_max_w.end());
    out.pool_bias = static_cast<U>(pool_bias);
    out.trained_with = trained_with;
    return out;
  }

  // Visits every scalar parameter in weight-file order.
  template <typename F>
  void for_each_value(F&& f) {
    for (auto& v : kernels.data) f(v);
    for (auto& v : conv_bias) f(v);
    for (auto& v : pool_min_w) f(v);
    for (auto& v : pool_max_w) f(v);
    f(pool_bias);
  }
  template <typename F>
  void for_each_value(F&& f) const {
    for (const auto& v : kernels.data) f(v);
    for (const auto& v : conv_bias) f(v);
    for (const auto& v : pool_min_w) f(v);
    for (const auto& v : pool_max_w) f(v);
    f(pool_bias);
  }

  bool all_finite() const {
    bool ok = true;
    for_each_value([&](const T& v) { ok = ok && std::isfinite(v); });
    return ok;
  }

  void validate() const {
    const std::size_t n = kernels.count;
    if (n == 0) throw ShapeError("model has no kernels");
    if (kernels.data.size() != n * kernels.per_kernel() ||
        conv_bias.size() != n || pool_min_w.size() != n ||
        pool_max_w.size() != n) {
      throw ShapeError("model parameter arrays disagree on kernel count");
    }
  }

  friend bool operator==(const BasicModelParams&,
                         const BasicModelParams&) = default;
};

using ModelParams = BasicModelParams<float>;

// Kernels + conv bias + pooling weights + pooling bias.
template <typename T>
std::size_t param_count(const BasicModelParams<T>& params) {
  const std::size_t n = params.n_kernels();
  return n * params.kernels.per_kernel() + n + 2 * n + 1;
}

// Reference parameter counts commonly quoted for this model family, for
// comparison with param_count(). Empty when none exists for `n_kernels`.
inline std::string reference_param_count(std::size_t n_kernels) {
  switch (n_kernels) {
    case 1: return "148";
    case 2: return "299";
    case 10: return "1.5K";
    default: return "";
  }
}

// Intermediate values of one forward pass, kept for backpropagation.
template <typename T>
struct ForwardTrace {
  ResponseGrid<T> responses;
  ChannelExtrema<T> extrema;
  double score = 0.0;
};

// Forward pass on an input of any size >= kernel - 2 * padding.
template <typename T, typename In>
ForwardTrace<T> forward_trace(const BasicModelParams<T>& params,
                              const ImageView<In>& input) {
  ForwardTrace<T> trace;
  trace.responses =
      conv2d_strided(input, params.kernels, std::span<const T>(params.conv_bias),
                     kConvStride, kConvPadding);
  trace.extrema = channel_min_max(trace.responses);
  double y = static_cast<double>(params.pool_bias);
  for (std::size_t n = 0; n < params.n_kernels(); ++n) {
    y += static_cast<double>(params.pool_min_w[n]) *
             static_cast<double>(trace.extrema.min[n]) +
         static_cast<double>(params.pool_max_w[n]) *
             static_cast<double>(trace.extrema.max[n]);
  }
  trace.score = y;
  return trace;
}

template <typename T, typename In>
SharpnessScore forward(const BasicModelParams<T>& params,
                       const ImageView<In>& patch) {
  if (patch.height != kPatchSize || patch.width != kPatchSize ||
      patch.channels != kInputChannels) {
    throw ShapeError("forward expects a 235x235x3 patch, got " +
                     std::to_string(patch.height) + "x" +
                     std::to_string(patch.width) + "x" +
                     std::to_string(patch.channels));
  }
  return {forward_trace(params, patch).score};
}

template <typename T, typename In>
SharpnessScore forward(const BasicModelParams<T>& params,
                       const Image<In>& patch) {
  return forward(params, patch.view());
}

// ---------------------------------------------------------------------------
// Weight file: little-endian
//   "FLNN" | u16 version=1 | u16 N | u8 h | u8 w | u8 channels | u8 loss tag
//   f32 kernels[N][C][h][w] | f32 conv_bias[N] | f32 pool_min_w[N]
//   f32 pool_max_w[N] | f32 pool_bias

inline constexpr std::uint16_t kWeightFormatVersion = 1;
inline constexpr std::size_t kWeightHeaderBytes = 12;

namespace detail {

template <typename U>
void put_le(std::vector<std::uint8_t>& out, U value) {
  static_assert(std::is_trivially_copyable_v<U>);
  std::uint8_t bytes[sizeof(U)];
  std::memcpy(bytes, &value, sizeof(U));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(std::begin(bytes), std::end(bytes));
  }
  out.insert(out.end(), std::begin(bytes), std::end(bytes));
}

template <typename U>
U get_le(std::span<const std::uint8_t> in, std::size_t& offset) {
  if (offset + sizeof(U) > in.size()) {
    throw FormatError("weight stream truncated at byte " +
                      std::to_string(offset));
  }
  std::uint8_t bytes[sizeof(U)];
  std::memcpy(bytes, in.data() + offset, sizeof(U));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(std::begin(bytes), std::end(bytes));
  }
  offset += sizeof(U);
  U value;
  std::memcpy(&value, bytes, sizeof(U));
  return value;
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize(const ModelParams& params) {
  params.validate();
  if (!params.all_finite()) throw FormatError("parameters are not finite");
  if (params.n_kernels() > 0xFFFF || params.kernels.height > 0xFF ||
      params.kernels.width > 0xFF || params.kernels.channels > 0xFF) {
    throw FormatError("model dimensions exceed the weight file header");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kWeightHeaderBytes + 4 * param_count(params));
  for (char c : {'F', 'L', 'N', 'N'}) out.push_back(static_cast<std::uint8_t>(c));
  detail::put_le<std::uint16_t>(out, kWeightFormatVersion);
  detail::put_le<std::uint16_t>(out,
                                static_cast<std::uint16_t>(params.n_kernels()));
  out.push_back(static_cast<std::uint8_t>(params.kernels.height));
  out.push_back(static_cast<std::uint8_t>(params.kernels.width));
  out.push_back(static_cast<std::uint8_t>(params.kernels.channels));
  out.push_back(static_cast<std::uint8_t>(params.trained_with));
  params.for_each_value([&](float v) { detail::put_le<float>(out, v); });
  return out;
}

inline ModelParams deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kWeightHeaderBytes) {
    throw FormatError("weight stream truncated: header needs 12 bytes");
  }
  if (std::memcmp(bytes.data(), "FLNN", 4) != 0) {
    throw FormatError("bad magic: not a FocusLite weight file");
  }
  std::size_t off = 4;
  const auto version = detail::get_le<std::uint16_t>(bytes, off);
  if (version != kWeightFormatVersion) {
    throw FormatError("unsupported weight format version " +
                      std::to_string(version));
  }
  const auto n = detail::get_le<std::uint16_t>(bytes, off);
  const std::size_t h = bytes[off++];
  const std::size_t w = bytes[off++];
  const std::size_t c = bytes[off++];
  const std::uint8_t loss_tag = bytes[off++];
  if (n == 0 || h == 0 || w == 0 || c == 0) {
    throw FormatError("weight header has a zero dimension");
  }
  if (loss_tag > 1) {
    throw FormatError("unknown loss-type tag " + std::to_string(loss_tag));
  }
  ModelParams p = ModelParams::zeros(n, h, c);
  p.kernels.width = w;
  p.kernels.data.resize(static_cast<std::size_t>(n) * c * h * w);
  p.trained_with = static_cast<LossType>(loss_tag);
  const std::size_t expected = kWeightHeaderBytes + 4 * param_count(p);
  if (bytes.size() < expected) {
    throw FormatError("weight stream truncated: expected " +
                      std::to_string(expected) + " bytes, got " +
                      std::to_string(bytes.size()));
  }
  if (bytes.size() > expected) {
    throw FormatError("weight stream has " +
                      std::to_string(bytes.size() - expected) +
                      " trailing bytes");
  }
  p.for_each_value([&](float& v) { v = detail::get_le<float>(bytes, off); });
  if (!p.all_finite()) throw FormatError("weight file holds non-finite values");
  return p;
}

inline void save_weights(const ModelParams& params,
                         const std::filesystem::path& path) {
  const auto bytes = serialize(params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path.string());
}

inline ModelParams load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open weight file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

// ---------------------------------------------------------------------------
// Frequency response of one learned kernel.

struct SpectrumGrid {
  std::size_t size = 0;
  std::vector<double> values;  // [size][size], row = vertical frequency

  double at(std::size_t row, std::size_t col) const {
    return values[row * size + col];
  }
};

struct KernelSpectrum {
  std::vector<SpectrumGrid> magnitude;  // one per input channel
  std::vector<SpectrumGrid> phase;      // unwrapped, radians
};

namespace detail {

inline double wrap_to_pi(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a <= 0.0) a += two_pi;
  return a - std::numbers::pi;
}

// Unwraps a centre-anchored phase grid: first along the centre row, then
// each column outward from the centre row.
inline std::vector<double> unwrap_from_center(const std::vector<double>& raw,
                                              std::size_t m) {
  std::vector<double> out(raw);
  const std::size_t c0 = m / 2;
  auto idx = [m](std::size_t r, std::size_t c) { return r * m + c; };
  for (std::size_t c = c0 + 1; c < m; ++c)
    out[idx(c0, c)] = out[idx(c0, c - 1)] +
                      wrap_to_pi(raw[idx(c0, c)] - raw[idx(c0, c - 1)]);
  for (std::size_t c = c0; c-- > 0;)
    out[idx(c0, c)] = out[idx(c0, c + 1)] +
                      wrap_to_pi(raw[idx(c0, c)] - raw[idx(c0, c + 1)]);
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t r = c0 + 1; r < m; ++r)
      out[idx(r, c)] =
          out[idx(r - 1, c)] + wrap_to_pi(raw[idx(r, c)] - raw[idx(r - 1, c)]);
    for (std::size_t r = c0; r-- > 0;)
      out[idx(r, c)] =
          out[idx(r + 1, c)] + wrap_to_pi(raw[idx(r, c)] - raw[idx(r + 1, c)]);
  }
  return out;
}

}  // namespace detail

// 2D DFT of the kernel zero-padded to fft_size x fft_size, DC-centred: grid
// index a corresponds to frequency bin (a - fft_size / 2) mod fft_size.
template <typename T>
KernelSpectrum kernel_spectrum(const BasicModelParams<T>& params,
                               std::size_t kernel_index,
                               std::size_t fft_size = 64) {
  if (kernel_index >= params.n_kernels()) {
    throw ArgumentError("kernel index " + std::to_string(kernel_index) +
                        " out of range for " +
                        std::to_string(params.n_kernels()) + " kernels");
  }
  const std::size_t kh = params.kernels.height;
  const std::size_t kw = params.kernels.width;
  if (fft_size < std::max(kh, kw)) {
    throw ArgumentError("fft_size smaller than the kernel");
  }
  const std::size_t m = fft_size;
  std::vector<std::complex<double>> twiddle(m);
  for (std::size_t t = 0; t < m; ++t) {
    twiddle[t] = std::polar(1.0, -2.0 * std::numbers::pi *
                                     static_cast<double>(t) /
                                     static_cast<double>(m));
  }
  const std::size_t shift = m / 2;

  KernelSpectrum spec;
  for (std::size_t ch = 0; ch < params.kernels.channels; ++ch) {
    // Transform rows first (only kh of them are non-zero), then columns.
    std::vector<std::complex<double>> rows(kh * m);
    for (std::size_t i = 0; i < kh; ++i)
      for (std::size_t v = 0; v < m; ++v) {
        std::complex<double> acc{};
        for (std::size_t j = 0; j < kw; ++j)
          acc += static_cast<double>(params.kernels.at(kernel_index, ch, i, j)) *
                 twiddle[(v * j) % m];
        rows[i * m + v] = acc;
      }
    SpectrumGrid mag{m, std::vector<double>(m * m)};
    std::vector<double> raw_phase(m * m);
    for (std::size_t a = 0; a < m; ++a) {
      const std::size_t u = (a + m - shift) % m;
      for (std::size_t b = 0; b < m; ++b) {
        const std::size_t v = (b + m - shift) % m;
        std::complex<double> acc{};
        for (std::size_t i = 0; i < kh; ++i)
          acc += rows[i * m + v] * twiddle[(u * i) % m];
        mag.values[a * m + b] = std::abs(acc);
        raw_phase[a * m + b] = std::arg(acc);
      }
    }
    spec.magnitude.push_back(std::move(mag));
    spec.phase.push_back({m, detail::unwrap_from_center(raw_phase, m)});
  }
  return spec;
}

}  // namespace focuslite
