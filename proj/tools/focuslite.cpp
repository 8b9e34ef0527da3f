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

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "focuslite/focuslite.hpp"

namespace fs = std::filesystem;
using namespace focuslite;

namespace {

constexpr const char* kVersion = "1.0.0";

// Unsectioned keys in a --config file apply to the selected subcommand.
class SubcommandConfig : public CLI::ConfigINI {
 public:
  explicit SubcommandConfig(const CLI::App* app) : app_(app) {}

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigINI::from_config(input);
    const auto subs = app_->get_subcommands();
    if (subs.empty()) return items;
    for (auto& item : items) {
      if (item.parents.empty()) item.parents.push_back(subs.front()->get_name());
    }
    return items;
  }

 private:
  const CLI::App* app_;
};

struct Context {
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 0;  // 0 = subcommand default
  fs::path out = ".";
  int verbosity = 1;
  std::string command_line;
  std::size_t errors = 0;

  unsigned threads_or(unsigned fallback) const { return threads ? threads : fallback; }

  fs::path output(const std::string& name) const { return out / name; }

  std::ofstream open(const std::string& name) const {
    const auto p = output(name);
    std::ofstream f(p, std::ios::trunc);
    if (!f) throw Error("cannot open " + p.string() + " for writing");
    return f;
  }

  void stamp(std::ostream& os) const {
    os << "# focuslite " << kVersion << " seed=" << seed << " cmd=" << command_line << '\n';
  }

  void error(const std::string& msg) {
    ++errors;
    std::cerr << "error: " << msg << '\n';
  }

  void info(const std::string& msg) const {
    if (verbosity > 0) std::cout << msg << '\n';
  }
};

std::string quote_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

LossType parse_loss(const std::string& name) {
  if (name == "plcc") return LossType::kPlcc;
  if (name == "mse") return LossType::kMse;
  throw ArgumentError("unknown loss '" + name + "'");
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string manifest;
  std::string loss = "plcc";
  std::size_t kernels = 1;
  double lr = 0.01;
  int decay_interval = 60;
  double decay_factor = 0.1;
  int epochs = 120;
  std::size_t batch_size = 64;
  std::size_t folds = 1;
  bool no_holdout = false;
  int sharp_max_z = metrics::kDefaultSharpMaxZ;
};

void write_fold_outputs(Context& ctx, const std::string& prefix,
                        const TrainResult& tr, const EvalReport* test) {
  save_weights(tr.params, ctx.output(prefix + "model.flnn"));
  {
    auto f = ctx.open(prefix + "train_log.csv");
    ctx.stamp(f);
    write_train_log_csv(tr.log, f);
  }
  if (test) {
    auto f = ctx.open(prefix + "test_eval.csv");
    ctx.stamp(f);
    write_eval_csv(*test, f);
    auto s = ctx.open(prefix + "test_summary.txt");
    write_eval_summary(*test, s);
  }
}

void cmd_train(Context& ctx, const TrainArgs& a) {
  TrainConfig cfg;
  cfg.loss = parse_loss(a.loss);
  cfg.n_kernels = a.kernels;
  cfg.learning_rate = a.lr;
  cfg.decay_interval_epochs = a.decay_interval;
  cfg.decay_factor = a.decay_factor;
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch_size;
  cfg.seed = ctx.seed;
  cfg.threads = ctx.threads_or(hardware_threads());
  cfg.validate();

  const auto manifest = load_manifest(a.manifest);
  if (manifest.kind != LabelKind::kZLevel) {
    throw ArgumentError("training requires a Z_LEVEL manifest");
  }
  const auto dataset = TileDataset::from_manifest(manifest, true);
  const EvalOptions eval_opts{a.sharp_max_z, cfg.threads};
  auto log_epoch = [&](const std::string& tag, const EpochLog& e) {
    if (ctx.verbosity < 2) return;
    std::ostringstream os;
    os << tag << "epoch " << e.epoch << " lr=" << e.lr << " loss=" << e.loss
       << " val_srcc=" << e.val_srcc;
    ctx.info(os.str());
  };

  if (a.folds > 1) {
    const auto res = run_folds(cfg, dataset, a.folds, eval_opts,
                               [&](std::size_t f, const EpochLog& e) {
                                 log_epoch("fold " + std::to_string(f) + " ", e);
                               });
    auto summary = ctx.open("folds_summary.csv");
    ctx.stamp(summary);
    summary << "fold,srcc,plcc,roc_auc,pr_auc\n";
    for (std::size_t f = 0; f < res.folds.size(); ++f) {
      const auto& t = res.folds[f].test;
      char prefix[32];
      std::snprintf(prefix, sizeof prefix, "fold_%02zu_", f);
      write_fold_outputs(ctx, prefix, res.folds[f].training, &t);
      summary << f << ',' << format_metric(t.srcc) << ',' << format_metric(t.plcc)
              << ',' << format_metric(t.roc_auc) << ',' << format_metric(t.pr_auc)
              << '\n';
      ctx.info("fold " + std::to_string(f) + " test srcc=" + format_metric(t.srcc) +
               " plcc=" + format_metric(t.plcc));
    }
    auto m = [](double v) { return format_metric(metrics::MetricValue::of(v)); };
    summary << "mean," << m(res.mean_srcc) << ',' << m(res.mean_plcc) << ','
            << m(res.mean_roc_auc) << ',' << m(res.mean_pr_auc) << '\n';
    ctx.info("mean test srcc=" + m(res.mean_srcc) + " plcc=" + m(res.mean_plcc) +
             " roc_auc=" + m(res.mean_roc_auc) + " pr_auc=" + m(res.mean_pr_auc));
    return;
  }

  if (a.no_holdout) {
    const auto tr = train(cfg, dataset, nullptr,
                          [&](const EpochLog& e) { log_epoch("", e); });
    write_fold_outputs(ctx, "", tr, nullptr);
    ctx.info("trained on all " + std::to_string(dataset.size()) + " records");
    return;
  }
  const auto split = split_indices(dataset.size(), {0.6, 0.2, 0.2}, ctx.seed);
  const auto tr_set = dataset.subset(split.train);
  const auto va_set = dataset.subset(split.validation);
  const auto te_set = dataset.subset(split.test);
  const auto tr = train(cfg, tr_set, &va_set,
                        [&](const EpochLog& e) { log_epoch("", e); });
  const auto test = evaluate(tr.params, te_set, eval_opts);
  write_fold_outputs(ctx, "", tr, &test);
  ctx.info("test srcc=" + format_metric(test.srcc) + " plcc=" + format_metric(test.plcc) +
           " roc_auc=" + format_metric(test.roc_auc) + " pr_auc=" +
           format_metric(test.pr_auc));
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string weights;
  std::string manifest;
  std::size_t kernels = 0;
  int sharp_max_z = metrics::kDefaultSharpMaxZ;
};

void cmd_eval(Context& ctx, const EvalArgs& a) {
  const auto params = load_weights(a.weights);
  if (a.kernels != 0 && a.kernels != params.n_kernels()) {
    std::cerr << "warning: --kernels " << a.kernels << " ignored; weight file has "
              << params.n_kernels() << " kernels\n";
  }
  const auto manifest = load_manifest(a.manifest);
  const auto dataset = TileDataset::from_manifest(manifest, false);
  const auto rep = evaluate(params, dataset,
                            {a.sharp_max_z, ctx.threads_or(hardware_threads())});
  {
    auto f = ctx.open("eval.csv");
    ctx.stamp(f);
    write_eval_csv(rep, f);
  }
  std::ostringstream summary;
  write_eval_summary(rep, summary);
  if (rep.kind == LabelKind::kBinary) {
    summary << "note=binary labels; srcc and plcc are computed against 0/1 labels "
               "and roc_auc and pr_auc are the headline metrics\n";
  }
  auto f = ctx.open("eval_summary.txt");
  f << summary.str();
  if (ctx.verbosity > 0) std::cout << summary.str();
}

// ---------------------------------------------------------------------------
// score

struct ScoreArgs {
  std::string weights;
  std::vector<std::string> inputs;
};

std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file() && image_io::is_supported_extension(e.path())) {
          files.push_back(e.path());
        }
      }
      std::sort(files.begin(), files.end(),
                [](const fs::path& x, const fs::path& y) {
                  return x.filename().string() < y.filename().string();
                });
      out.insert(out.end(), files.begin(), files.end());
    } else {
      out.push_back(p);
    }
  }
  return out;
}

void cmd_score(Context& ctx, const ScoreArgs& a) {
  const auto params = load_weights(a.weights);
  const unsigned threads = ctx.threads_or(hardware_threads());
  auto f = ctx.open("scores.csv");
  ctx.stamp(f);
  f << "id,score,crops\n" << std::setprecision(17);
  std::vector<std::pair<std::string, std::string>> failures;
  for (const auto& path : expand_inputs(a.inputs)) {
    try {
      const auto tile = image_io::read_rgb(path);
      const auto d = dense_score(params, tile, {threads, nullptr});
      f << path.filename().string() << ',' << d.score.value << ',' << d.crops << '\n';
    } catch (const std::exception& e) {
      failures.emplace_back(path.string(), e.what());
      ctx.error(e.what());
    }
  }
  if (!failures.empty()) {
    auto ef = ctx.open("score_errors.csv");
    ctx.stamp(ef);
    ef << "path,error\n";
    for (const auto& [p, msg] : failures) ef << p << ",\"" << msg << "\"\n";
  }
}

// ---------------------------------------------------------------------------
// heatmap

struct HeatmapArgs {
  std::string weights;
  std::string scan;
  std::string mode = "per-scan";
  double lo = 0.0;
  double hi = 12.0;
  double alpha = 0.5;
  std::string name;
};

void cmd_heatmap(Context& ctx, const HeatmapArgs& a) {
  const auto params = load_weights(a.weights);
  const auto scan = image_io::read_rgb(a.scan);
  const Normalization norm = a.mode == "absolute" ? Normalization::absolute(a.lo, a.hi)
                                                  : Normalization::per_scan();
  const auto grid = score_scan(params, normalize_bytes(scan).view(),
                               {ctx.threads_or(hardware_threads()), nullptr});
  const auto overlay = render_overlay(normalize_grid(grid, norm), scan, a.alpha);
  const std::string stem = a.name.empty() ? fs::path(a.scan).stem().string() : a.name;
  const std::string png = stem + "_heatmap_" + a.mode + ".png";
  image_io::write_image(quantize_bytes(overlay), ctx.output(png));
  auto f = ctx.open(stem + "_grid.csv");
  ctx.stamp(f);
  write_grid_csv(grid, f);
  ctx.info("wrote " + ctx.output(png).string() + " (" + std::to_string(grid.rows) + "x" +
           std::to_string(grid.cols) + " crops)");
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
  std::string weights;
  std::string image;
  std::size_t kernels = 1;
  std::size_t runs = 100;
  std::size_t size = 1024;
  std::string host;
  double patches_per_wsi = 2500;
  double n_wsi = 300;
};

void cmd_bench(Context& ctx, const BenchArgs& a) {
  const ModelParams params = a.weights.empty()
                                 ? init_params(a.kernels, ctx.seed).cast<float>()
                                 : load_weights(a.weights);
  const ByteImage patch = a.image.empty() ? procedural_texture(a.size, a.size, ctx.seed)
                                          : image_io::read_rgb(a.image);
  BenchOptions opts;
  opts.threads = ctx.threads_or(1);
  if (!a.host.empty()) {
    opts.host = a.host;
  } else if (const char* env = std::getenv("FOCUSLITE_HOST")) {
    opts.host = env;
  }
  const auto rep = time_patch_scoring(params, patch, a.runs, opts);
  {
    auto f = ctx.open("timing.csv");
    ctx.stamp(f);
    write_timing_csv(rep, f);
  }
  if (ctx.verbosity == 0) return;
  print_timing_table(rep, std::cout);
  const auto size = model_size_report(params);
  std::cout << "parameters     " << size.param_count;
  if (!size.reference_count.empty()) std::cout << " (reference count: " << size.reference_count << ")";
  std::cout << "\nweight file    " << size.file_bytes << " bytes\n"
            << std::fixed << std::setprecision(2) << "scanner hours  "
            << estimate_scanner_throughput(a.patches_per_wsi, a.n_wsi, rep.mean_seconds)
            << " measured, "
            << estimate_scanner_throughput(a.patches_per_wsi, a.n_wsi,
                                           kReferenceSecondsPerPatch)
            << " reference (" << std::defaultfloat << a.patches_per_wsi
            << " patches x " << a.n_wsi << " slides)\n";
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  std::size_t textures = 8;
  std::size_t size = 512;
  std::vector<double> sigmas{0, 0.5, 1, 1.5, 2, 3, 4, 6};
  std::string format = "png";
};

void cmd_synth(Context& ctx, const SynthArgs& a) {
  auto ds = synth_blur_dataset(a.textures, a.size, a.sigmas, ctx.seed);
  for (std::size_t i = 0; i < ds.images.size(); ++i) {
    auto& rec = ds.manifest.records[i];
    rec.image_path = rec.id + "." + a.format;
    image_io::write_image(ds.images[i], ctx.output(rec.image_path));
  }
  auto f = ctx.open("manifest.csv");
  ctx.stamp(f);
  write_manifest(ds.manifest, f);
  ctx.info("wrote " + std::to_string(ds.manifest.records.size()) + " tiles and " +
           ctx.output("manifest.csv").string());
}

// ---------------------------------------------------------------------------
// spectrum

struct SpectrumArgs {
  std::string weights;
  std::size_t kernel = 0;
  std::size_t fft_size = 64;
};

void cmd_spectrum(Context& ctx, const SpectrumArgs& a) {
  const auto params = load_weights(a.weights);
  const auto spec = kernel_spectrum(params, a.kernel, a.fft_size);
  const std::string name = "spectrum_k" + std::to_string(a.kernel) + ".csv";
  auto f = ctx.open(name);
  ctx.stamp(f);
  f << "channel,row,col,magnitude,phase\n" << std::setprecision(17);
  for (std::size_t ch = 0; ch < spec.magnitude.size(); ++ch)
    for (std::size_t r = 0; r < a.fft_size; ++r)
      for (std::size_t c = 0; c < a.fft_size; ++c)
        f << ch << ',' << r << ',' << c << ',' << spec.magnitude[ch].at(r, c) << ','
          << spec.phase[ch].at(r, c) << '\n';
  ctx.info("wrote " + ctx.output(name).string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("Focus quality scoring for pathology tiles");
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<SubcommandConfig>(&app));
  app.set_config("--config", "", "key=value file; command-line flags take precedence");
  app.allow_config_extras(false);

  Context ctx;
  ctx.command_line = quote_args(argc, argv);
  bool verbose = false, quiet = false;
  std::string out = ".";
  app.add_option("--seed", ctx.seed, "random seed")->capture_default_str();
  app.add_option("--threads", ctx.threads,
                 "worker threads (default: 1 for bench, all cores otherwise)");
  app.add_option("--out", out, "output directory")->capture_default_str();
  app.add_flag("-v,--verbose", verbose, "per-epoch progress");
  app.add_flag("-q,--quiet", quiet, "suppress summaries");

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "train a model from a Z_LEVEL manifest");
  train_cmd->add_option("--manifest", ta.manifest)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--kernels", ta.kernels)->capture_default_str();
  train_cmd->add_option("--loss", ta.loss)
      ->check(CLI::IsMember({"plcc", "mse"}))
      ->capture_default_str();
  train_cmd->add_option("--lr", ta.lr)->capture_default_str();
  train_cmd->add_option("--decay-interval", ta.decay_interval)->capture_default_str();
  train_cmd->add_option("--decay-factor", ta.decay_factor)->capture_default_str();
  train_cmd->add_option("--epochs", ta.epochs)->capture_default_str();
  train_cmd->add_option("--batch-size", ta.batch_size)->capture_default_str();
  train_cmd->add_option("--folds", ta.folds, "repeated 60/20/20 splits")
      ->capture_default_str();
  train_cmd->add_flag("--no-holdout", ta.no_holdout, "train on every record");
  train_cmd->add_option("--sharp-max-z", ta.sharp_max_z)->capture_default_str();

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "score a manifest and report metrics");
  eval_cmd->add_option("--weights", ea.weights)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--manifest", ea.manifest)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--kernels", ea.kernels, "ignored; the weight file decides");
  eval_cmd->add_option("--sharp-max-z", ea.sharp_max_z)->capture_default_str();

  ScoreArgs sa;
  auto* score_cmd = app.add_subcommand("score", "dense-score image files or directories");
  score_cmd->add_option("--weights", sa.weights)->required()->check(CLI::ExistingFile);
  score_cmd->add_option("inputs", sa.inputs)->required();

  HeatmapArgs ha;
  auto* heat_cmd = app.add_subcommand("heatmap", "render a focus heatmap over a scan");
  heat_cmd->add_option("--weights", ha.weights)->required()->check(CLI::ExistingFile);
  heat_cmd->add_option("--scan", ha.scan)->required()->check(CLI::ExistingFile);
  heat_cmd->add_option("--mode", ha.mode)
      ->check(CLI::IsMember({"per-scan", "absolute"}))
      ->capture_default_str();
  heat_cmd->add_option("--lo", ha.lo)->capture_default_str();
  heat_cmd->add_option("--hi", ha.hi)->capture_default_str();
  heat_cmd->add_option("--alpha", ha.alpha)->capture_default_str();
  heat_cmd->add_option("--name", ha.name, "output file stem (default: scan stem)");

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("bench", "time dense scoring of one patch");
  bench_cmd->add_option("--weights", ba.weights, "default: freshly initialised model")
      ->check(CLI::ExistingFile);
  bench_cmd->add_option("--image", ba.image, "default: procedural texture")
      ->check(CLI::ExistingFile);
  bench_cmd->add_option("--kernels", ba.kernels)->capture_default_str();
  bench_cmd->add_option("--runs", ba.runs)->capture_default_str();
  bench_cmd->add_option("--size", ba.size)->capture_default_str();
  bench_cmd->add_option("--host", ba.host, "host description (or FOCUSLITE_HOST)");
  bench_cmd->add_option("--patches-per-wsi", ba.patches_per_wsi)->capture_default_str();
  bench_cmd->add_option("--wsi", ba.n_wsi)->capture_default_str();

  SynthArgs ya;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic blur dataset");
  synth_cmd->add_option("--textures", ya.textures)->capture_default_str();
  synth_cmd->add_option("--size", ya.size)->capture_default_str();
  synth_cmd->add_option("--sigmas", ya.sigmas)->delimiter(',')->capture_default_str();
  synth_cmd->add_option("--format", ya.format)
      ->check(CLI::IsMember({"png", "ppm"}))
      ->capture_default_str();

  SpectrumArgs pa;
  auto* spec_cmd = app.add_subcommand("spectrum", "export a kernel's frequency response");
  spec_cmd->add_option("--weights", pa.weights)->required()->check(CLI::ExistingFile);
  spec_cmd->add_option("--kernel", pa.kernel)->capture_default_str();
  spec_cmd->add_option("--fft-size", pa.fft_size)->capture_default_str();

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);
  ctx.out = out;
  ctx.verbosity = quiet ? 0 : (verbose ? 2 : 1);

  try {
    fs::create_directories(ctx.out);
    ctx.info("seed " + std::to_string(ctx.seed));
    if (train_cmd->parsed()) cmd_train(ctx, ta);
    else if (eval_cmd->parsed()) cmd_eval(ctx, ea);
    else if (score_cmd->parsed()) cmd_score(ctx, sa);
    else if (heat_cmd->parsed()) cmd_heatmap(ctx, ha);
    else if (bench_cmd->parsed()) cmd_bench(ctx, ba);
    else if (synth_cmd->parsed()) cmd_synth(ctx, ya);
    else if (spec_cmd->parsed()) cmd_spectrum(ctx, pa);
  } catch (const std::exception& e) {
    ctx.error(e.what());
  }
  return ctx.errors == 0 ? 0 : 1;
}
