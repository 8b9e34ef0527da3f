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
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "focuslite/errors.hpp"

// Evaluation metrics. Score polarity throughout: higher score = blurrier, and
// the positive class of binary labels (1) is "blurry / out of focus".
namespace focuslite::metrics {

// A metric that may be mathematically undefined for its input (zero variance,
// a missing class). Undefined values carry NaN and defined == false.
struct MetricValue {
  double value = std::numeric_limits<double>::quiet_NaN();
  bool defined = false;

  static MetricValue of(double v) { return {v, true}; }
  static MetricValue undefined() { return {}; }
  explicit operator bool() const noexcept { return defined; }
};

namespace detail {

inline void require_paired(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ArgumentError(std::string(what) + ": length mismatch (" +
                        std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
  if (a < 2) {
    throw ArgumentError(std::string(what) + ": needs at least 2 samples");
  }
}

inline void require_binary(std::span<const int> labels, std::size_t n,
                           const char* what) {
  if (labels.size() != n) {
    throw ArgumentError(std::string(what) + ": length mismatch");
  }
  for (int l : labels) {
    if (l != 0 && l != 1) {
      throw ArgumentError(std::string(what) + ": labels must be 0 or 1");
    }
  }
}

}  // namespace detail

// Pearson linear correlation (two-pass, no stabilisation).
inline MetricValue plcc(std::span<const double> x, std::span<const double> y) {
  detail::require_paired(x.size(), y.size(), "plcc");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return MetricValue::undefined();
  const double r = sxy / std::sqrt(sxx * syy);
  return MetricValue::of(std::clamp(r, -1.0, 1.0));
}

// 1-based ranks; tied values share the mean of their rank range.
inline std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i + 1;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}

// Spearman rank correlation: Pearson of average ranks.
inline MetricValue srcc(std::span<const double> predictions,
                        std::span<const double> labels) {
  detail::require_paired(predictions.size(), labels.size(), "srcc");
  const auto rp = average_ranks(predictions);
  const auto rl = average_ranks(labels);
  return plcc(rp, rl);
}

// Area under the ROC curve as the Mann-Whitney statistic
// P(s_pos > s_neg) + 0.5 P(s_pos == s_neg), exact via sorting.
inline MetricValue roc_auc(std::span<const double> scores,
                           std::span<const int> labels) {
  detail::require_binary(labels, scores.size(), "roc_auc");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::uint64_t n_pos = 0, n_neg = 0;
  // Twice the Mann-Whitney U, kept integral so ties stay exact.
  std::uint64_t twice_u = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t g_pos = 0, g_neg = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? g_pos : g_neg) += 1;
      ++j;
    }
    twice_u += 2 * g_pos * n_neg + g_pos * g_neg;
    n_pos += g_pos;
    n_neg += g_neg;
    i = j;
  }
  if (n_pos == 0 || n_neg == 0) return MetricValue::undefined();
  return MetricValue::of(static_cast<double>(twice_u) /
                         (2.0 * static_cast<double>(n_pos) *
                          static_cast<double>(n_neg)));
}

// Average precision over descending scores. Each group of tied scores is one
// threshold step: AP = sum_groups precision(group end) * recall increment.
inline MetricValue pr_auc(std::span<const double> scores,
                          std::span<const int> labels) {
  detail::require_binary(labels, scores.size(), "pr_auc");
  const auto n_pos = static_cast<std::size_t>(
      std::count(labels.begin(), labels.end(), 1));
  if (n_pos == 0) return MetricValue::undefined();
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::size_t tp = 0, fp = 0;
  double ap = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::size_t g_pos = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]] == 1) {
        ++g_pos;
        ++tp;
      } else {
        ++fp;
      }
      ++j;
    }
    if (g_pos > 0) {
      const double precision =
          static_cast<double>(tp) / static_cast<double>(tp + fp);
      ap += precision * static_cast<double>(g_pos) / static_cast<double>(n_pos);
    }
    i = j;
  }
  return MetricValue::of(ap);
}

inline constexpr int kDefaultSharpMaxZ = 2;

// z <= sharp_max -> 0 (sharp), otherwise 1 (blurry).
inline std::vector<int> binarize_zlevels(std::span<const int> z,
                                         int sharp_max = kDefaultSharpMaxZ) {
  std::vector<int> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] < 0) {
      throw ArgumentError("negative z-level " + std::to_string(z[i]) +
                          " at index " + std::to_string(i));
    }
    out[i] = z[i] > sharp_max ? 1 : 0;
  }
  return out;
}

struct ThresholdChoice {
  double threshold = 0.0;
  double youden_j = 0.0;
};

// Threshold maximising Youden's J over midpoints of adjacent distinct scores.
// Samples with score > threshold are classified positive. Ties in J resolve to
// the lowest threshold.
inline ThresholdChoice select_threshold(std::span<const double> scores,
                                        std::span<const int> labels) {
  detail::require_binary(labels, scores.size(), "select_threshold");
  const auto n_pos = static_cast<std::int64_t>(
      std::count(labels.begin(), labels.end(), 1));
  const auto n_neg = static_cast<std::int64_t>(labels.size()) - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw ArgumentError("select_threshold needs both classes");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sweep ascending; after consuming a group, everything above is positive.
  std::int64_t tp = n_pos, fp = n_neg;
  bool found = false;
  std::int64_t best_num = 0;  // J * n_pos * n_neg
  double best_t = scores[order.front()];
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? tp : fp) -= 1;
      ++j;
    }
    if (j == order.size()) break;
    const double t = 0.5 * (scores[order[i]] + scores[order[j]]);
    const std::int64_t num = tp * n_neg - fp * n_pos;
    if (!found || num > best_num) {
      best_num = num;
      best_t = t;
      found = true;
    }
    i = j;
  }
  return {best_t, static_cast<double>(best_num) /
                      (static_cast<double>(n_pos) * static_cast<double>(n_neg))};
}

}  // namespace focuslite::metrics
