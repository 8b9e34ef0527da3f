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
#include <array>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <ostream>
#include <string>
#include <type_traits>
#include <vector>

#include "focuslite/data.hpp"
#include "focuslite/errors.hpp"
#include "focuslite/model.hpp"
#include "focuslite/tensor.hpp"

namespace focuslite {

// Score lattice over a scan: one forward score per 235x235 crop, using the
// same crop enumeration as dense_score().
struct HeatmapGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> scores;  // [rows][cols]
  std::vector<std::size_t> row_offsets;
  std::vector<std::size_t> col_offsets;
  std::size_t crop_size = kPatchSize;
  std::size_t stride = kDenseStride;
  std::size_t scan_height = 0;
  std::size_t scan_width = 0;

  double at(std::size_t r, std::size_t c) const { return scores[r * cols + c]; }
  double& at(std::size_t r, std::size_t c) { return scores[r * cols + c]; }
};

template <typename T, typename In>
HeatmapGrid score_scan(const BasicModelParams<T>& params,
                       const ImageView<In>& scan,
                       const DenseScoreOptions& opts = {}) {
  auto crops = score_crops(params, scan, opts);
  HeatmapGrid grid;
  grid.rows = crops.row_offsets.size();
  grid.cols = crops.col_offsets.size();
  grid.scores = std::move(crops.scores);
  grid.row_offsets = std::move(crops.row_offsets);
  grid.col_offsets = std::move(crops.col_offsets);
  grid.scan_height = scan.height;
  grid.scan_width = scan.width;
  return grid;
}

struct Normalization {
  enum class Mode { kPerScan, kAbsolute };
  Mode mode = Mode::kPerScan;
  double lo = 0.0;
  double hi = 12.0;

  static Normalization per_scan() { return {Mode::kPerScan, 0.0, 0.0}; }
  // Fixed label scale; the default range covers z-levels of MSE-trained models.
  static Normalization absolute(double lo = 0.0, double hi = 12.0) {
    return {Mode::kAbsolute, lo, hi};
  }
};

// PER_SCAN: (x - min) / (max - min), or 0.5 everywhere for a constant grid.
// ABSOLUTE: clamp((x - lo) / (hi - lo), 0, 1).
inline HeatmapGrid normalize_grid(const HeatmapGrid& grid,
                                  const Normalization& norm) {
  if (grid.scores.empty()) throw DimensionError("cannot normalize an empty grid");
  HeatmapGrid out = grid;
  if (norm.mode == Normalization::Mode::kPerScan) {
    const auto [mn, mx] = std::minmax_element(grid.scores.begin(), grid.scores.end());
    const double lo = *mn, hi = *mx;
    for (auto& v : out.scores) v = hi > lo ? (v - lo) / (hi - lo) : 0.5;
  } else {
    if (!(norm.hi > norm.lo)) {
      throw ArgumentError("absolute normalization needs hi > lo");
    }
    for (auto& v : out.scores) {
      v = std::clamp((v - norm.lo) / (norm.hi - norm.lo), 0.0, 1.0);
    }
  }
  return out;
}

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;
};

// Piecewise-linear blue -> cyan -> green -> yellow -> red ramp.
inline Rgb colormap(double v) {
  static constexpr std::array<Rgb, 5> kStops = {
      Rgb{0, 0, 1}, Rgb{0, 1, 1}, Rgb{0, 1, 0}, Rgb{1, 1, 0}, Rgb{1, 0, 0}};
  v = std::clamp(std::isnan(v) ? 0.0 : v, 0.0, 1.0);
  const double pos = v * 4.0;
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(pos), 3);
  const double f = pos - static_cast<double>(i);
  const Rgb& a = kStops[i];
  const Rgb& b = kStops[i + 1];
  return {a.r + f * (b.r - a.r), a.g + f * (b.g - a.g), a.b + f * (b.b - a.b)};
}

namespace detail {

struct AxisTap {
  std::size_t lo = 0;
  std::size_t hi = 0;
  double frac = 0.0;
};

// Linear interpolation weights between crop centres along one axis; pixels
// outside the outermost centres take the edge value.
inline std::vector<AxisTap> center_taps(std::span<const std::size_t> offsets,
                                        std::size_t crop, std::size_t extent) {
  std::vector<double> centers;
  for (auto o : offsets) {
    centers.push_back(static_cast<double>(o) + static_cast<double>(crop - 1) / 2.0);
  }
  std::vector<AxisTap> taps(extent);
  std::size_t k = 0;
  for (std::size_t p = 0; p < extent; ++p) {
    const double x = static_cast<double>(p);
    if (x <= centers.front()) {
      taps[p] = {0, 0, 0.0};
    } else if (x >= centers.back()) {
      taps[p] = {centers.size() - 1, centers.size() - 1, 0.0};
    } else {
      while (centers[k + 1] <= x) ++k;
      taps[p] = {k, k + 1, (x - centers[k]) / (centers[k + 1] - centers[k])};
    }
  }
  return taps;
}

}  // namespace detail

// Upsamples a normalized grid to the scan (values at crop centres), applies
// the colormap and composites alpha * color + (1 - alpha) * gray(scan). The
// result is in [0, 1] for both byte and [0, 1] floating-point scans.
template <typename T>
Image<float> render_overlay(const HeatmapGrid& normalized, const Image<T>& scan,
                            double alpha = 0.5) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ArgumentError("alpha must lie in [0, 1]");
  }
  if (normalized.scores.empty()) throw DimensionError("empty heatmap grid");
  if (scan.height() != normalized.scan_height || scan.width() != normalized.scan_width) {
    throw ShapeError("scan dimensions do not match the heatmap grid");
  }
  const auto gray = to_grayscale(scan);
  // Integer scans hold 8-bit intensities; floating-point scans are in [0, 1].
  const double gray_scale = std::is_integral_v<T> ? 1.0 / 255.0 : 1.0;
  const auto ty = detail::center_taps(normalized.row_offsets, normalized.crop_size,
                                      scan.height());
  const auto tx = detail::center_taps(normalized.col_offsets, normalized.crop_size,
                                      scan.width());
  Image<float> out(scan.height(), scan.width(), 3);
  for (std::size_t r = 0; r < scan.height(); ++r) {
    const auto& yt = ty[r];
    for (std::size_t c = 0; c < scan.width(); ++c) {
      const auto& xt = tx[c];
      const double top = (1.0 - xt.frac) * normalized.at(yt.lo, xt.lo) +
                         xt.frac * normalized.at(yt.lo, xt.hi);
      const double bottom = (1.0 - xt.frac) * normalized.at(yt.hi, xt.lo) +
                            xt.frac * normalized.at(yt.hi, xt.hi);
      const Rgb color = colormap((1.0 - yt.frac) * top + yt.frac * bottom);
      const double g = static_cast<double>(gray.at(r, c, 0)) * gray_scale;
      out.at(r, c, 0) = static_cast<float>(alpha * color.r + (1.0 - alpha) * g);
      out.at(r, c, 1) = static_cast<float>(alpha * color.g + (1.0 - alpha) * g);
      out.at(r, c, 2) = static_cast<float>(alpha * color.b + (1.0 - alpha) * g);
    }
  }
  return out;
}

// Columns: row,col,top,left,score
inline void write_grid_csv(const HeatmapGrid& grid, std::ostream& out) {
  out << "row,col,top,left,score\n" << std::setprecision(17);
  for (std::size_t r = 0; r < grid.rows; ++r)
    for (std::size_t c = 0; c < grid.cols; ++c)
      out << r << ',' << c << ',' << grid.row_offsets[r] << ','
          << grid.col_offsets[c] << ',' << grid.at(r, c) << '\n';
}

}  // namespace focuslite
