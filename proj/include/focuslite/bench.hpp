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
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "focuslite/data.hpp"
#include "focuslite/errors.hpp"
#include "focuslite/model.hpp"
#include "focuslite/tensor.hpp"

namespace focuslite {

// Reference timing: 1-kernel model, seconds per 1024x1024 patch on an
// Intel i9-7920X.
inline constexpr double kReferenceSecondsPerPatch = 0.017;

struct TimingReport {
  std::string model_tag;
  std::size_t patch_height = 0;
  std::size_t patch_width = 0;
  std::size_t runs = 0;
  double mean_seconds = 0.0;
  double std_seconds = 0.0;  // sample standard deviation; 0 for one run
  double min_seconds = 0.0;
  double max_seconds = 0.0;
  std::vector<double> samples;
  std::string host;
  unsigned threads = 1;
  std::size_t crops_per_run = 0;
  std::uint64_t forward_calls = 0;  // timed runs only
};

struct BenchOptions {
  unsigned threads = 1;
  std::string host = "unspecified";
  std::string model_tag;
  bool warmup = true;
};

// Times the whole dense scoring pipeline on an in-memory 8-bit patch:
// byte normalisation, crop extraction, forward passes and averaging. Image
// decoding is outside the timed region. One untimed warm-up run precedes
// measurement unless disabled.
template <typename T>
TimingReport time_patch_scoring(const BasicModelParams<T>& params,
                                const ByteImage& patch, std::size_t runs = 100,
                                const BenchOptions& opts = {}) {
  if (runs == 0) throw ArgumentError("runs must be at least 1");
  TimingReport rep;
  rep.model_tag = opts.model_tag.empty()
                      ? std::to_string(params.n_kernels()) + "-kernel"
                      : opts.model_tag;
  rep.patch_height = patch.height();
  rep.patch_width = patch.width();
  rep.runs = runs;
  rep.host = opts.host;
  rep.threads = opts.threads;

  if (opts.warmup) (void)dense_score(params, patch, {opts.threads, nullptr});

  std::atomic<std::uint64_t> calls{0};
  volatile double sink = 0.0;
  using Clock = std::chrono::steady_clock;
  for (std::size_t r = 0; r < runs; ++r) {
    const auto t0 = Clock::now();
    const auto s = dense_score(params, patch, {opts.threads, &calls});
    const auto t1 = Clock::now();
    sink = sink + s.score.value;
    rep.crops_per_run = s.crops;
    rep.samples.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  rep.forward_calls = calls.load();
  const double n = static_cast<double>(runs);
  rep.mean_seconds = std::accumulate(rep.samples.begin(), rep.samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double s : rep.samples) ss += (s - rep.mean_seconds) * (s - rep.mean_seconds);
  rep.std_seconds = runs > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  const auto [mn, mx] = std::minmax_element(rep.samples.begin(), rep.samples.end());
  rep.min_seconds = *mn;
  rep.max_seconds = *mx;
  return rep;
}

// hours = patches_per_wsi * n_wsi * sec_per_patch / 3600
inline double estimate_scanner_throughput(double patches_per_wsi, double n_wsi,
                                          double sec_per_patch) {
  if (!(patches_per_wsi > 0.0) || !(n_wsi > 0.0) || !(sec_per_patch > 0.0)) {
    throw ArgumentError("throughput inputs must be positive");
  }
  return patches_per_wsi * n_wsi * sec_per_patch / 3600.0;
}

struct ModelSizeReport {
  std::size_t param_count = 0;
  std::size_t file_bytes = 0;
  std::string reference_count;  // empty when no reference value exists
};

inline ModelSizeReport model_size_report(const ModelParams& params) {
  return {param_count(params), serialize(params).size(),
          reference_param_count(params.n_kernels())};
}

// Columns: run,seconds. Summary rows are comments.
inline void write_timing_csv(const TimingReport& rep, std::ostream& out) {
  out << std::setprecision(10);
  out << "# model=" << rep.model_tag << " patch=" << rep.patch_height << 'x'
      << rep.patch_width << " runs=" << rep.runs << " threads=" << rep.threads
      << " host=" << rep.host << '\n';
  out << "# mean_seconds=" << rep.mean_seconds << " std_seconds=" << rep.std_seconds
      << " crops_per_run=" << rep.crops_per_run
      << " forward_calls=" << rep.forward_calls << '\n';
  out << "run,seconds\n";
  for (std::size_t i = 0; i < rep.samples.size(); ++i) {
    out << i + 1 << ',' << rep.samples[i] << '\n';
  }
}

inline void print_timing_table(const TimingReport& rep, std::ostream& out) {
  out << std::fixed << std::setprecision(6);
  out << "model          " << rep.model_tag << '\n'
      << "patch          " << rep.patch_height << 'x' << rep.patch_width << "x3\n"
      << "host           " << rep.host << '\n'
      << "threads        " << rep.threads << '\n'
      << "runs           " << rep.runs << '\n'
      << "crops/run      " << rep.crops_per_run << '\n'
      << "forward calls  " << rep.forward_calls << '\n'
      << "mean (s)       " << rep.mean_seconds << '\n'
      << "std (s)        " << rep.std_seconds << '\n'
      << "min (s)        " << rep.min_seconds << '\n'
      << "max (s)        " << rep.max_seconds << '\n'
      << "reference (s)  " << kReferenceSecondsPerPatch
      << "  (1-kernel, i9-7920X; not comparable across hosts)\n";
  out << std::defaultfloat;
}

}  // namespace focuslite
