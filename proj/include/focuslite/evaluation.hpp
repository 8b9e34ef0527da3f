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

#include <cstddef>
#include <iomanip>
#include <optional>
#include <sstream>
#include <ostream>
#include <string>
#include <vector>

#include "focuslite/data.hpp"
#include "focuslite/metrics.hpp"
#include "focuslite/model.hpp"

namespace focuslite {

struct EvalSample {
  std::string id;
  double prediction = 0.0;
  double label = 0.0;
  int binary_label = 0;  // 1 = blurry (positive class)
};

struct EvalReport {
  LabelKind kind = LabelKind::kZLevel;
  std::vector<EvalSample> samples;
  metrics::MetricValue srcc;
  metrics::MetricValue plcc;
  metrics::MetricValue roc_auc;
  metrics::MetricValue pr_auc;
  std::size_t n_positive = 0;
  std::size_t n_negative = 0;
  std::optional<double> threshold;
};

struct EvalOptions {
  int sharp_max_z = metrics::kDefaultSharpMaxZ;
  unsigned threads = 1;
};

// Positive class for ROC/PR is "blurry". Z-levels above sharp_max_z are
// blurry; binary manifests mark in-focus tiles with 1, so they are inverted.
inline int blurry_label(double label, LabelKind kind, int sharp_max_z) {
  if (kind == LabelKind::kBinary) return label == 1.0 ? 0 : 1;
  return label > static_cast<double>(sharp_max_z) ? 1 : 0;
}

inline EvalReport build_report(LabelKind kind, std::vector<EvalSample> samples) {
  EvalReport rep;
  rep.kind = kind;
  rep.samples = std::move(samples);
  std::vector<double> pred, lab;
  std::vector<int> bin;
  for (const auto& s : rep.samples) {
    pred.push_back(s.prediction);
    lab.push_back(s.label);
    bin.push_back(s.binary_label);
    (s.binary_label == 1 ? rep.n_positive : rep.n_negative) += 1;
  }
  if (pred.size() >= 2) {
    rep.srcc = metrics::srcc(pred, lab);
    rep.plcc = metrics::plcc(pred, lab);
    rep.roc_auc = metrics::roc_auc(pred, bin);
    rep.pr_auc = metrics::pr_auc(pred, bin);
    if (rep.n_positive > 0 && rep.n_negative > 0) {
      rep.threshold = metrics::select_threshold(pred, bin).threshold;
    }
  }
  return rep;
}

template <typename T>
EvalReport evaluate(const BasicModelParams<T>& params,
                    const TileDataset& dataset, const EvalOptions& opts = {}) {
  std::vector<EvalSample> samples;
  samples.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto tile = dataset.tile(i);
    const auto score = dense_score(params, *tile, {opts.threads, nullptr});
    const double label = dataset.label(i);
    samples.push_back({dataset.record(i).id, score.score.value, label,
                       blurry_label(label, dataset.kind(), opts.sharp_max_z)});
  }
  return build_report(dataset.kind(), std::move(samples));
}

inline std::string format_metric(const metrics::MetricValue& m) {
  if (!m.defined) return "nan";
  std::ostringstream os;
  os << std::setprecision(10) << m.value;
  return os.str();
}

// Per-sample rows: id,prediction,label,blurry
inline void write_eval_csv(const EvalReport& rep, std::ostream& out) {
  out << "id,prediction,label,blurry\n";
  out << std::setprecision(17);
  for (const auto& s : rep.samples) {
    out << s.id << ',' << s.prediction << ',' << format_label(s.label) << ','
        << s.binary_label << '\n';
  }
}

// key=value summary block.
inline void write_eval_summary(const EvalReport& rep, std::ostream& out) {
  out << "kind=" << to_string(rep.kind) << '\n'
      << "samples=" << rep.samples.size() << '\n'
      << "srcc=" << format_metric(rep.srcc) << '\n'
      << "plcc=" << format_metric(rep.plcc) << '\n'
      << "roc_auc=" << format_metric(rep.roc_auc) << '\n'
      << "pr_auc=" << format_metric(rep.pr_auc) << '\n'
      << "n_positive=" << rep.n_positive << '\n'
      << "n_negative=" << rep.n_negative << '\n'
      << "positive_class=blurry\n";
  if (rep.threshold) {
    out << std::setprecision(10) << "threshold=" << *rep.threshold << '\n';
  }
}

}  // namespace focuslite
