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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "focuslite/data.hpp"
#include "focuslite/errors.hpp"
#include "focuslite/evaluation.hpp"
#include "focuslite/metrics.hpp"
#include "focuslite/model.hpp"
#include "focuslite/parallel.hpp"
#include "focuslite/random.hpp"
#include "focuslite/tensor.hpp"

namespace focuslite {

struct TrainConfig {
  LossType loss = LossType::kPlcc;
  std::size_t n_kernels = 1;
  double learning_rate = 0.01;
  int decay_interval_epochs = 60;
  double decay_factor = 0.1;
  int epochs = 120;
  std::size_t batch_size = 64;
  std::uint64_t seed = kDefaultSeed;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  // Workers for per-sample forward passes and validation scoring.
  unsigned threads = 1;
  // Score the validation set after every epoch (val_srcc column).
  bool validate_each_epoch = true;

  void validate() const {
    if (n_kernels == 0) throw ArgumentError("n_kernels must be at least 1");
    if (!(learning_rate > 0.0)) throw ArgumentError("learning_rate must be > 0");
    if (!(decay_factor > 0.0 && decay_factor <= 1.0)) {
      throw ArgumentError("decay_factor must lie in (0, 1]");
    }
    if (decay_interval_epochs < 1) {
      throw ArgumentError("decay_interval_epochs must be at least 1");
    }
    if (epochs < 0) throw ArgumentError("epochs must be non-negative");
    if (batch_size < 1 || (loss == LossType::kPlcc && batch_size < 2)) {
      throw ArgumentError("batch_size must be >= 2 for PLCC (>= 1 for MSE)");
    }
  }
};

// Step decay: lr * factor^floor((epoch - 1) / interval), epochs 1-based.
inline double learning_rate_at(const TrainConfig& cfg, int epoch) {
  const int drops = (std::max(epoch, 1) - 1) / cfg.decay_interval_epochs;
  return cfg.learning_rate * std::pow(cfg.decay_factor, drops);
}

// Gradients mirror the parameter layout field for field.
template <typename T>
using GradientSet = BasicModelParams<T>;

inline constexpr double kPlccEpsilon = 1e-8;

struct PlccGradient {
  double value = 0.0;
  std::vector<double> d_predictions;  // d plcc / d prediction_i
};

// Pearson correlation with a stabilised denominator:
//   r = S_yt / (sqrt(S_yy * S_tt) + 1e-8)
inline PlccGradient plcc_with_gradient(std::span<const double> predictions,
                                       std::span<const double> labels) {
  if (predictions.size() != labels.size()) {
    throw ArgumentError("plcc: length mismatch");
  }
  if (predictions.size() < 2) throw ArgumentError("plcc: needs at least 2 samples");
  const double n = static_cast<double>(predictions.size());
  const double my = std::accumulate(predictions.begin(), predictions.end(), 0.0) / n;
  const double mt = std::accumulate(labels.begin(), labels.end(), 0.0) / n;
  double syt = 0.0, syy = 0.0, stt = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double yc = predictions[i] - my;
    const double tc = labels[i] - mt;
    syt += yc * tc;
    syy += yc * yc;
    stt += tc * tc;
  }
  const double root = std::sqrt(syy * stt);
  const double denom = root + kPlccEpsilon;
  PlccGradient out;
  out.value = syt / denom;
  out.d_predictions.resize(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double yc = predictions[i] - my;
    const double tc = labels[i] - mt;
    const double d_denom = root > 0.0 ? stt * yc / root : 0.0;
    out.d_predictions[i] = tc / denom - syt * d_denom / (denom * denom);
  }
  return out;
}

inline double plcc(std::span<const double> predictions,
                   std::span<const double> labels) {
  return plcc_with_gradient(predictions, labels).value;
}

struct BatchLoss {
  double value = 0.0;
  std::vector<double> d_predictions;  // d loss / d prediction_i
};

// -plcc or mean squared error over a batch of predictions.
inline BatchLoss batch_loss(std::span<const double> predictions,
                            std::span<const double> labels, LossType loss) {
  if (loss == LossType::kPlcc) {
    auto g = plcc_with_gradient(predictions, labels);
    for (auto& d : g.d_predictions) d = -d;
    return {-g.value, std::move(g.d_predictions)};
  }
  if (predictions.size() != labels.size() || predictions.empty()) {
    throw ArgumentError("mse: length mismatch or empty batch");
  }
  const double b = static_cast<double>(predictions.size());
  BatchLoss out;
  out.d_predictions.resize(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double e = predictions[i] - labels[i];
    out.value += e * e / b;
    out.d_predictions[i] = 2.0 * e / b;
  }
  return out;
}

struct LossGradients {
  double loss = 0.0;
  GradientSet<double> grads;
  std::vector<double> predictions;
};

// Analytic gradients of the batch loss. Min/max subgradients go entirely to
// the first-occurrence argmin/argmax of each response channel.
inline LossGradients loss_and_gradients(const BasicModelParams<double>& params,
                                        std::span<const Image<double>> patches,
                                        std::span<const double> labels,
                                        LossType loss, unsigned threads = 1) {
  params.validate();
  if (patches.size() != labels.size()) {
    throw ArgumentError("patch and label counts differ");
  }
  if (patches.empty()) throw ArgumentError("empty batch");
  const std::size_t batch = patches.size();
  std::vector<ForwardTrace<double>> traces(batch);
  parallel_for(batch, threads, [&](std::size_t i) {
    traces[i] = forward_trace(params, patches[i].view());
  });

  LossGradients out;
  out.predictions.resize(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    if (!std::isfinite(traces[i].score)) {
      throw NumericError("non-finite forward output", i);
    }
    out.predictions[i] = traces[i].score;
  }
  const auto bl = batch_loss(out.predictions, labels, loss);
  out.loss = bl.value;

  const std::size_t n_kernels = params.n_kernels();
  const std::size_t kh = params.kernels.height;
  const std::size_t kw = params.kernels.width;
  const std::size_t ch = params.kernels.channels;
  auto& g = out.grads;
  g = GradientSet<double>::zeros(n_kernels, kh, ch);
  g.kernels.width = kw;
  g.kernels.data.assign(params.kernels.data.size(), 0.0);
  g.trained_with = loss;

  // Accumulate d(response at flat position p of kernel n) into the kernel.
  auto scatter = [&](const Image<double>& x, std::size_t cols, std::size_t n,
                     std::size_t p, double grad) {
    const auto r = static_cast<std::ptrdiff_t>(p / cols);
    const auto c = static_cast<std::ptrdiff_t>(p % cols);
    const std::ptrdiff_t y0 =
        r * static_cast<std::ptrdiff_t>(kConvStride) - static_cast<std::ptrdiff_t>(kConvPadding);
    const std::ptrdiff_t x0 =
        c * static_cast<std::ptrdiff_t>(kConvStride) - static_cast<std::ptrdiff_t>(kConvPadding);
    for (std::size_t i = 0; i < kh; ++i) {
      const std::ptrdiff_t yy = y0 + static_cast<std::ptrdiff_t>(i);
      if (yy < 0 || yy >= static_cast<std::ptrdiff_t>(x.height())) continue;
      for (std::size_t j = 0; j < kw; ++j) {
        const std::ptrdiff_t xx = x0 + static_cast<std::ptrdiff_t>(j);
        if (xx < 0 || xx >= static_cast<std::ptrdiff_t>(x.width())) continue;
        for (std::size_t k = 0; k < ch; ++k) {
          g.kernels.at(n, k, i, j) +=
              grad * x.at(static_cast<std::size_t>(yy), static_cast<std::size_t>(xx), k);
        }
      }
    }
  };

  for (std::size_t s = 0; s < batch; ++s) {
    const double dy = bl.d_predictions[s];
    const auto& tr = traces[s];
    const std::size_t cols = tr.responses.cols();
    g.pool_bias += dy;
    for (std::size_t n = 0; n < n_kernels; ++n) {
      g.pool_min_w[n] += dy * tr.extrema.min[n];
      g.pool_max_w[n] += dy * tr.extrema.max[n];
      const double d_min = dy * params.pool_min_w[n];
      const double d_max = dy * params.pool_max_w[n];
      g.conv_bias[n] += d_min + d_max;
      scatter(patches[s], cols, n, tr.extrema.argmin[n], d_min);
      scatter(patches[s], cols, n, tr.extrema.argmax[n], d_max);
    }
  }
  bool finite = true;
  g.for_each_value([&](double v) { finite = finite && std::isfinite(v); });
  if (!finite) throw NumericError("non-finite gradient", 0);
  return out;
}

// ---------------------------------------------------------------------------
// Adam

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
  BasicModelParams<T> first_moment;
  BasicModelParams<T> second_moment;
  std::size_t step = 0;  // number of updates applied so far

  static AdamState for_params(const BasicModelParams<T>& params) {
    AdamState s;
    s.first_moment = params;
    s.first_moment.for_each_value([](T& v) { v = T{}; });
    s.second_moment = s.first_moment;
    return s;
  }
};

namespace detail {

template <typename T, typename F>
void zip_params(BasicModelParams<T>& p, const BasicModelParams<T>& g,
                BasicModelParams<T>& m, BasicModelParams<T>& v, F&& f) {
  auto zip = [&](std::vector<T>& a, const std::vector<T>& b, std::vector<T>& c,
                 std::vector<T>& d) {
    if (a.size() != b.size() || a.size() != c.size() || a.size() != d.size()) {
      throw ShapeError("adam: parameter, gradient and moment shapes differ");
    }
    for (std::size_t i = 0; i < a.size(); ++i) f(a[i], b[i], c[i], d[i]);
  };
  zip(p.kernels.data, g.kernels.data, m.kernels.data, v.kernels.data);
  zip(p.conv_bias, g.conv_bias, m.conv_bias, v.conv_bias);
  zip(p.pool_min_w, g.pool_min_w, m.pool_min_w, v.pool_min_w);
  zip(p.pool_max_w, g.pool_max_w, m.pool_max_w, v.pool_max_w);
  f(p.pool_bias, g.pool_bias, m.pool_bias, v.pool_bias);
}

}  // namespace detail

// One bias-corrected Adam update in place; increments state.step.
template <typename T>
void adam_step(BasicModelParams<T>& params, const GradientSet<T>& grads,
               AdamState<T>& state, double lr, const AdamHyper& hyper = {}) {
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(hyper.beta1, t);
  const double c2 = 1.0 - std::pow(hyper.beta2, t);
  detail::zip_params(params, grads, state.first_moment, state.second_moment,
                     [&](T& p, const T& g, T& m, T& v) {
                       m = static_cast<T>(hyper.beta1 * m + (1.0 - hyper.beta1) * g);
                       v = static_cast<T>(hyper.beta2 * v + (1.0 - hyper.beta2) * g * g);
                       const double m_hat = m / c1;
                       const double v_hat = v / c2;
                       p = static_cast<T>(p - lr * m_hat / (std::sqrt(v_hat) + hyper.epsilon));
                     });
}

// ---------------------------------------------------------------------------
// Training loop

// Kernels ~ U(+-1/sqrt(fan_in)), conv bias 0, pooling weights 1, pooling bias 0.
inline BasicModelParams<double> init_params(std::size_t n_kernels,
                                            std::uint64_t seed) {
  auto p = BasicModelParams<double>::zeros(n_kernels);
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(p.kernels.per_kernel()));
  for (auto& v : p.kernels.data) v = rng.uniform(-bound, bound);
  std::fill(p.pool_min_w.begin(), p.pool_min_w.end(), 1.0);
  std::fill(p.pool_max_w.begin(), p.pool_max_w.end(), 1.0);
  return p;
}

struct EpochLog {
  int epoch = 0;
  double lr = 0.0;
  double loss = 0.0;  // mean over applied batches
  double val_srcc = std::numeric_limits<double>::quiet_NaN();
  std::size_t skipped_batches = 0;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochLog> log;
};

inline Image<double> normalized_crop(const ByteImage& tile, std::size_t top,
                                     std::size_t left) {
  const auto view = tile.view().crop(top, left, kPatchSize, kPatchSize);
  Image<double> out(kPatchSize, kPatchSize, tile.channels());
  for (std::size_t r = 0; r < kPatchSize; ++r) {
    const std::uint8_t* src = view.row_ptr(r);
    for (std::size_t c = 0; c < kPatchSize * tile.channels(); ++c) {
      out.data()[r * kPatchSize * tile.channels() + c] =
          static_cast<double>(src[c]) / 255.0;
    }
  }
  return out;
}

// Trains for cfg.epochs epochs. Each epoch reshuffles the tiles and draws one
// fresh uniformly random 235x235 crop per tile. Batches whose loss is
// undefined (PLCC with constant labels, or fewer than two samples) are
// skipped and counted.
inline TrainResult train(const TrainConfig& cfg, const TileDataset& train_set,
                         const TileDataset* validation = nullptr,
                         const std::function<void(const EpochLog&)>& on_epoch = {}) {
  cfg.validate();
  if (train_set.empty()) throw ArgumentError("training set is empty");
  Rng rng(cfg.seed);
  auto params = init_params(cfg.n_kernels, derive_seed(cfg.seed, 0xC0FFEE));
  params.trained_with = cfg.loss;
  auto state = AdamState<double>::for_params(params);
  const AdamHyper hyper{cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon};
  const std::size_t min_batch = cfg.loss == LossType::kPlcc ? 2 : 1;

  TrainResult result;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    EpochLog log;
    log.epoch = epoch;
    log.lr = learning_rate_at(cfg, epoch);
    rng.shuffle(std::span<std::size_t>(order));

    double loss_sum = 0.0;
    std::size_t applied = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<Image<double>> patches;
      std::vector<double> labels;
      for (std::size_t k = start; k < end; ++k) {
        const auto tile = train_set.tile(order[k]);
        if (tile->height() < kPatchSize || tile->width() < kPatchSize ||
            tile->channels() != kInputChannels) {
          throw DimensionError("training tile '" + train_set.record(order[k]).id +
                               "' is smaller than 235x235x3");
        }
        const std::size_t top = rng.below(tile->height() - kPatchSize + 1);
        const std::size_t left = rng.below(tile->width() - kPatchSize + 1);
        patches.push_back(normalized_crop(*tile, top, left));
        labels.push_back(train_set.label(order[k]));
      }
      const bool constant_labels =
          std::adjacent_find(labels.begin(), labels.end(),
                             std::not_equal_to<>()) == labels.end();
      if (patches.size() < min_batch ||
          (cfg.loss == LossType::kPlcc && constant_labels)) {
        ++log.skipped_batches;
        continue;
      }
      const auto lg = loss_and_gradients(params, patches, labels, cfg.loss, cfg.threads);
      adam_step(params, lg.grads, state, log.lr, hyper);
      loss_sum += lg.loss;
      ++applied;
    }
    log.loss = applied > 0 ? loss_sum / static_cast<double>(applied)
                           : std::numeric_limits<double>::quiet_NaN();
    if (validation && !validation->empty() && cfg.validate_each_epoch) {
      const auto rep = evaluate(params.cast<float>(), *validation, {metrics::kDefaultSharpMaxZ, cfg.threads});
      log.val_srcc = rep.srcc.value;
    }
    result.log.push_back(log);
    if (on_epoch) on_epoch(log);
  }
  result.params = params.cast<float>();
  return result;
}

// CSV columns: epoch,lr,loss,val_srcc,skipped_batches
inline void write_train_log_csv(std::span<const EpochLog> log, std::ostream& out) {
  out << "epoch,lr,loss,val_srcc,skipped_batches\n";
  out << std::setprecision(10);
  for (const auto& e : log) {
    out << e.epoch << ',' << e.lr << ',' << e.loss << ',';
    if (std::isnan(e.val_srcc)) out << "nan";
    else out << e.val_srcc;
    out << ',' << e.skipped_batches << '\n';
  }
}

// ---------------------------------------------------------------------------
// Repeated random splits

struct FoldOutcome {
  SplitIndices split;
  TrainResult training;
  EvalReport test;
};

struct FoldsResult {
  std::vector<FoldOutcome> folds;
  double mean_srcc = 0.0;
  double mean_plcc = 0.0;
  double mean_roc_auc = 0.0;
  double mean_pr_auc = 0.0;
};

// Runs n_folds independent seeded 60/20/20 splits: trains on train, logs
// validation SRCC, evaluates the final model on test. Means skip undefined
// fold metrics (NaN if every fold is undefined).
inline FoldsResult run_folds(const TrainConfig& cfg, const TileDataset& dataset,
                             std::size_t n_folds = 10,
                             const EvalOptions& eval_opts = {},
                             const std::function<void(std::size_t, const EpochLog&)>& on_epoch = {}) {
  if (n_folds == 0) throw ArgumentError("n_folds must be at least 1");
  if (dataset.size() < 3) {
    throw ArgumentError("dataset too small for a 60/20/20 split");
  }
  FoldsResult result;
  for (std::size_t f = 0; f < n_folds; ++f) {
    FoldOutcome fold;
    fold.split = split_indices(dataset.size(), {0.6, 0.2, 0.2},
                               derive_seed(cfg.seed, 1000 + f));
    const auto tr = dataset.subset(fold.split.train);
    const auto va = dataset.subset(fold.split.validation);
    const auto te = dataset.subset(fold.split.test);
    TrainConfig fold_cfg = cfg;
    fold_cfg.seed = derive_seed(cfg.seed, f);
    fold.training = train(fold_cfg, tr, &va, [&](const EpochLog& e) {
      if (on_epoch) on_epoch(f, e);
    });
    fold.test = evaluate(fold.training.params, te, eval_opts);
    result.folds.push_back(std::move(fold));
  }
  auto mean_of = [&](auto pick) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& f : result.folds) {
      const metrics::MetricValue m = pick(f.test);
      if (m.defined) {
        sum += m.value;
        ++n;
      }
    }
    return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
  };
  result.mean_srcc = mean_of([](const EvalReport& r) { return r.srcc; });
  result.mean_plcc = mean_of([](const EvalReport& r) { return r.plcc; });
  result.mean_roc_auc = mean_of([](const EvalReport& r) { return r.roc_auc; });
  result.mean_pr_auc = mean_of([](const EvalReport& r) { return r.pr_auc; });
  return result;
}

}  // namespace focuslite
