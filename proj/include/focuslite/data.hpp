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
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "focuslite/errors.hpp"
#include "focuslite/image_io.hpp"
#include "focuslite/model.hpp"
#include "focuslite/parallel.hpp"
#include "focuslite/random.hpp"
#include "focuslite/tensor.hpp"

namespace focuslite {

// ---------------------------------------------------------------------------
// Manifests

enum class LabelKind { kZLevel, kBinary };

inline constexpr int kMaxZLevel = 14;

inline const char* to_string(LabelKind kind) {
  return kind == LabelKind::kZLevel ? "Z_LEVEL" : "BINARY";
}

struct SampleRecord {
  std::string id;
  std::string image_path;
  // Absolute z-level (Z_LEVEL) or 1 = in focus / 0 = out of focus (BINARY).
  double label = 0.0;
  std::string tag;

  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

struct DatasetManifest {
  LabelKind kind = LabelKind::kZLevel;
  std::vector<SampleRecord> records;
  std::string source;
  // Directory that relative image paths resolve against.
  std::filesystem::path base_dir;
};

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline void validate_label(double label, LabelKind kind, std::size_t line) {
  if (kind == LabelKind::kZLevel) {
    if (label != std::floor(label) || label < 0 || label > kMaxZLevel) {
      throw ParseError("z-level must be an integer in [0, 14], got " +
                           std::to_string(label),
                       line);
    }
  } else if (label != 0.0 && label != 1.0) {
    throw ParseError("binary label must be 0 or 1", line);
  }
}

}  // namespace detail

// Parses the manifest CSV:
//   # kind=Z_LEVEL|BINARY      (defaults to Z_LEVEL when absent)
//   # source=<free text>       (optional)
//   id,image_path,label,tag
inline DatasetManifest parse_manifest(std::istream& in,
                                      std::filesystem::path base_dir = {}) {
  DatasetManifest m;
  m.base_dir = std::move(base_dir);
  std::string raw;
  std::size_t line_no = 0;
  std::optional<std::size_t> col_id, col_path, col_label, col_tag;
  bool have_header = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = detail::trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      auto body = detail::trim(line.substr(1));
      if (body.starts_with("kind=")) {
        const auto v = detail::trim(body.substr(5));
        if (v == "Z_LEVEL") {
          m.kind = LabelKind::kZLevel;
        } else if (v == "BINARY") {
          m.kind = LabelKind::kBinary;
        } else {
          throw ParseError("unknown manifest kind '" + std::string(v) + "'",
                           line_no);
        }
      } else if (body.starts_with("source=")) {
        m.source = std::string(detail::trim(body.substr(7)));
      }
      continue;
    }
    const auto fields = detail::split_csv_line(line);
    if (!have_header) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        const auto name = detail::trim(fields[i]);
        if (name == "id") col_id = i;
        else if (name == "image_path") col_path = i;
        else if (name == "label") col_label = i;
        else if (name == "tag") col_tag = i;
      }
      if (!col_id || !col_path || !col_label) {
        throw ParseError(
            "manifest header must contain id,image_path,label[,tag]", line_no);
      }
      have_header = true;
      continue;
    }
    const std::size_t needed =
        std::max({*col_id, *col_path, *col_label}) + 1;
    if (fields.size() < needed) {
      throw ParseError("expected at least " + std::to_string(needed) +
                           " columns, got " + std::to_string(fields.size()),
                       line_no);
    }
    SampleRecord rec;
    rec.id = std::string(detail::trim(fields[*col_id]));
    rec.image_path = std::string(detail::trim(fields[*col_path]));
    if (col_tag && *col_tag < fields.size()) {
      rec.tag = std::string(detail::trim(fields[*col_tag]));
    }
    if (rec.image_path.empty()) throw ParseError("empty image_path", line_no);
    const auto label_text = detail::trim(fields[*col_label]);
    double label = 0.0;
    const auto [ptr, ec] = std::from_chars(
        label_text.data(), label_text.data() + label_text.size(), label);
    if (ec != std::errc{} || ptr != label_text.data() + label_text.size() ||
        label_text.empty()) {
      throw ParseError("non-numeric label '" + std::string(label_text) + "'",
                       line_no);
    }
    detail::validate_label(label, m.kind, line_no);
    rec.label = label;
    m.records.push_back(std::move(rec));
  }
  if (!have_header) throw ParseError("manifest has no header row", line_no);
  return m;
}

inline DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path.string());
  return parse_manifest(in, path.parent_path());
}

inline std::string format_label(double label) {
  std::ostringstream os;
  if (label == std::floor(label) && std::abs(label) < 1e15) {
    os << static_cast<long long>(label);
  } else {
    os.precision(17);
    os << label;
  }
  return os.str();
}

inline void write_manifest(const DatasetManifest& m, std::ostream& out) {
  out << "# kind=" << to_string(m.kind) << '\n';
  if (!m.source.empty()) out << "# source=" << m.source << '\n';
  out << "id,image_path,label,tag\n";
  for (const auto& r : m.records) {
    out << r.id << ',' << r.image_path << ',' << format_label(r.label) << ','
        << r.tag << '\n';
  }
}

inline void write_manifest(const DatasetManifest& m,
                           const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_manifest(m, out);
}

// ---------------------------------------------------------------------------
// Tile datasets: records plus a way to fetch their pixels.

class TileDataset {
 public:
  using Tile = std::shared_ptr<const ByteImage>;
  using Loader = std::function<Tile(const SampleRecord&)>;

  TileDataset() = default;
  TileDataset(std::vector<SampleRecord> records, LabelKind kind, Loader loader)
      : records_(std::make_shared<std::vector<SampleRecord>>(std::move(records))),
        kind_(kind), loader_(std::move(loader)) {
    indices_.resize(records_->size());
    std::iota(indices_.begin(), indices_.end(), std::size_t{0});
  }

  static TileDataset in_memory(std::vector<SampleRecord> records,
                               LabelKind kind, std::vector<ByteImage> tiles) {
    if (records.size() != tiles.size()) {
      throw ArgumentError("record and tile counts differ");
    }
    auto store = std::make_shared<std::vector<Tile>>();
    for (auto& t : tiles) store->push_back(std::make_shared<ByteImage>(std::move(t)));
    auto ids = std::make_shared<std::unordered_map<std::string, std::size_t>>();
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (!ids->emplace(records[i].id, i).second) {
        throw ArgumentError("duplicate record id '" + records[i].id + "'");
      }
    }
    return TileDataset(std::move(records), kind,
                       [store, ids](const SampleRecord& rec) -> Tile {
                         return (*store)[ids->at(rec.id)];
                       });
  }

  // Loads tiles from disk on demand. With `cache`, each decoded tile is kept
  // after its first load.
  static TileDataset from_manifest(const DatasetManifest& manifest,
                                   bool cache) {
    auto base = manifest.base_dir;
    using Cache = std::pair<std::mutex, std::unordered_map<std::string, Tile>>;
    auto cache_store = cache ? std::make_shared<Cache>() : nullptr;
    Loader loader = [base, cache_store](const SampleRecord& rec) -> Tile {
      std::filesystem::path p(rec.image_path);
      if (p.is_relative() && !base.empty()) p = base / p;
      if (cache_store) {
        std::lock_guard lock(cache_store->first);
        if (auto it = cache_store->second.find(p.string());
            it != cache_store->second.end())
          return it->second;
      }
      auto tile = std::make_shared<const ByteImage>(image_io::read_rgb(p));
      if (cache_store) {
        std::lock_guard lock(cache_store->first);
        cache_store->second.emplace(p.string(), tile);
      }
      return tile;
    };
    return TileDataset(manifest.records, manifest.kind, std::move(loader));
  }

  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  LabelKind kind() const noexcept { return kind_; }
  const SampleRecord& record(std::size_t i) const {
    return (*records_)[indices_.at(i)];
  }
  double label(std::size_t i) const { return record(i).label; }
  Tile tile(std::size_t i) const { return loader_(record(i)); }

  // View of a subset; shares records and loader with *this.
  TileDataset subset(std::span<const std::size_t> which) const {
    TileDataset out = *this;
    out.indices_.clear();
    for (auto i : which) out.indices_.push_back(indices_.at(i));
    return out;
  }

 private:
  std::shared_ptr<std::vector<SampleRecord>> records_;
  std::vector<std::size_t> indices_;
  LabelKind kind_ = LabelKind::kZLevel;
  Loader loader_;
};

// ---------------------------------------------------------------------------
// Dense sampling

inline constexpr std::size_t kDenseStride = 128;

// Top-left offsets of crops along one axis: 0, stride, 2*stride, ... while
// the crop fits, plus one final crop flush with the far border when the
// regular lattice leaves pixels uncovered.
inline std::vector<std::size_t> crop_positions(std::size_t extent,
                                               std::size_t crop = kPatchSize,
                                               std::size_t stride = kDenseStride) {
  if (extent < crop) {
    throw DimensionError("extent " + std::to_string(extent) +
                         " smaller than crop size " + std::to_string(crop));
  }
  if (stride == 0) throw ArgumentError("stride must be at least 1");
  std::vector<std::size_t> pos;
  for (std::size_t p = 0; p + crop <= extent; p += stride) pos.push_back(p);
  if (pos.back() + crop < extent) pos.push_back(extent - crop);
  return pos;
}

struct DenseScoreOptions {
  unsigned threads = 1;
  // Incremented once per forward call when set.
  std::atomic<std::uint64_t>* forward_counter = nullptr;
};

// Per-crop scores on the crop lattice, row-major [row][col].
struct CropScores {
  std::vector<std::size_t> row_offsets;
  std::vector<std::size_t> col_offsets;
  std::vector<double> scores;
};

template <typename T, typename In>
CropScores score_crops(const BasicModelParams<T>& params,
                       const ImageView<In>& tile,
                       const DenseScoreOptions& opts = {}) {
  if (tile.channels != kInputChannels) {
    throw ShapeError("tiles must have 3 channels");
  }
  if (tile.height < kPatchSize || tile.width < kPatchSize) {
    throw DimensionError("tile " + std::to_string(tile.height) + "x" +
                         std::to_string(tile.width) +
                         " is smaller than one 235x235 crop");
  }
  CropScores out{crop_positions(tile.height), crop_positions(tile.width), {}};
  const std::size_t cols = out.col_offsets.size();
  out.scores.resize(out.row_offsets.size() * cols);
  parallel_for(out.scores.size(), opts.threads, [&](std::size_t i) {
    const auto crop = tile.crop(out.row_offsets[i / cols],
                                out.col_offsets[i % cols], kPatchSize,
                                kPatchSize);
    out.scores[i] = forward(params, crop).value;
    if (opts.forward_counter) {
      opts.forward_counter->fetch_add(1, std::memory_order_relaxed);
    }
  });
  return out;
}

struct DenseScore {
  SharpnessScore score;
  std::size_t crops = 0;
};

// Mean forward score over all 235x235 crops at stride 128. Summation runs in
// crop index order regardless of thread count.
template <typename T, typename In>
DenseScore dense_score(const BasicModelParams<T>& params,
                       const ImageView<In>& tile,
                       const DenseScoreOptions& opts = {}) {
  const auto crops = score_crops(params, tile, opts);
  double sum = 0.0;
  for (double s : crops.scores) sum += s;
  return {{sum / static_cast<double>(crops.scores.size())},
          crops.scores.size()};
}

// Normalises bytes to [0,1] first.
template <typename T>
DenseScore dense_score(const BasicModelParams<T>& params,
                       const ByteImage& tile,
                       const DenseScoreOptions& opts = {}) {
  const auto normalized = normalize_bytes<float>(tile);
  return dense_score(params, normalized.view(), opts);
}

// ---------------------------------------------------------------------------
// Synthetic defocus data

// Separable Gaussian blur, kernel truncated at ceil(3 sigma) and renormalised,
// mirrored borders. sigma == 0 returns the input unchanged.
inline Image<float> gaussian_blur(const Image<float>& input, double sigma) {
  if (sigma < 0.0) throw ArgumentError("sigma must be non-negative");
  if (sigma == 0.0) return input;
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (std::ptrdiff_t t = -radius; t <= radius; ++t) {
    const double w = std::exp(-0.5 * static_cast<double>(t * t) / (sigma * sigma));
    taps[static_cast<std::size_t>(t + radius)] = w;
    total += w;
  }
  for (auto& w : taps) w /= total;

  auto reflect = [](std::ptrdiff_t i, std::ptrdiff_t n) {
    if (n == 1) return std::ptrdiff_t{0};
    const std::ptrdiff_t period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
  };

  const auto h = static_cast<std::ptrdiff_t>(input.height());
  const auto w = static_cast<std::ptrdiff_t>(input.width());
  const std::size_t ch = input.channels();
  Image<float> tmp(input.height(), input.width(), ch);
  for (std::ptrdiff_t r = 0; r < h; ++r)
    for (std::ptrdiff_t c = 0; c < w; ++c)
      for (std::size_t k = 0; k < ch; ++k) {
        double acc = 0.0;
        for (std::ptrdiff_t t = -radius; t <= radius; ++t)
          acc += taps[static_cast<std::size_t>(t + radius)] *
                 input.at(static_cast<std::size_t>(r),
                          static_cast<std::size_t>(reflect(c + t, w)), k);
        tmp.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c), k) =
            static_cast<float>(acc);
      }
  Image<float> out(input.height(), input.width(), ch);
  for (std::ptrdiff_t r = 0; r < h; ++r)
    for (std::ptrdiff_t c = 0; c < w; ++c)
      for (std::size_t k = 0; k < ch; ++k) {
        double acc = 0.0;
        for (std::ptrdiff_t t = -radius; t <= radius; ++t)
          acc += taps[static_cast<std::size_t>(t + radius)] *
                 tmp.at(static_cast<std::size_t>(reflect(r + t, h)),
                        static_cast<std::size_t>(c), k);
        out.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c), k) =
            static_cast<float>(acc);
      }
  return out;
}

// Tissue-like RGB texture: stained background with noise, dark elliptical
// "nuclei" and thin fibres. Deterministic in `seed`.
inline ByteImage procedural_texture(std::size_t height, std::size_t width,
                                    std::uint64_t seed) {
  Rng rng(seed);
  const double bg[3] = {rng.uniform(0.80, 0.95), rng.uniform(0.55, 0.75),
                        rng.uniform(0.70, 0.90)};
  const double fg[3] = {rng.uniform(0.20, 0.45), rng.uniform(0.05, 0.25),
                        rng.uniform(0.35, 0.60)};
  Image<double> img(height, width, 3);
  for (std::size_t r = 0; r < height; ++r)
    for (std::size_t c = 0; c < width; ++c)
      for (std::size_t k = 0; k < 3; ++k)
        img.at(r, c, k) = bg[k] + 0.04 * rng.normal();

  const double area = static_cast<double>(height * width);
  const auto n_nuclei = static_cast<std::size_t>(area / 900.0);
  for (std::size_t e = 0; e < n_nuclei; ++e) {
    const double cy = rng.uniform(0, static_cast<double>(height));
    const double cx = rng.uniform(0, static_cast<double>(width));
    const double ay = rng.uniform(3.0, 9.0);
    const double ax = rng.uniform(3.0, 9.0);
    const double strength = rng.uniform(0.6, 1.0);
    const auto r0 = static_cast<std::ptrdiff_t>(cy - ay - 1);
    const auto r1 = static_cast<std::ptrdiff_t>(cy + ay + 1);
    const auto c0 = static_cast<std::ptrdiff_t>(cx - ax - 1);
    const auto c1 = static_cast<std::ptrdiff_t>(cx + ax + 1);
    for (std::ptrdiff_t r = std::max<std::ptrdiff_t>(0, r0);
         r <= std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(height) - 1, r1); ++r)
      for (std::ptrdiff_t c = std::max<std::ptrdiff_t>(0, c0);
           c <= std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(width) - 1, c1); ++c) {
        const double dy = (static_cast<double>(r) - cy) / ay;
        const double dx = (static_cast<double>(c) - cx) / ax;
        if (dy * dy + dx * dx <= 1.0) {
          for (std::size_t k = 0; k < 3; ++k) {
            auto& v = img.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c), k);
            v = (1.0 - strength) * v + strength * fg[k];
          }
        }
      }
  }
  const auto n_fibres = static_cast<std::size_t>(area / 6000.0);
  for (std::size_t f = 0; f < n_fibres; ++f) {
    double y = rng.uniform(0, static_cast<double>(height));
    double x = rng.uniform(0, static_cast<double>(width));
    const double angle = rng.uniform(0, 6.283185307179586);
    const double dy = std::sin(angle), dx = std::cos(angle);
    const auto len = static_cast<std::size_t>(rng.uniform(20, 80));
    for (std::size_t s = 0; s < len; ++s, y += dy, x += dx) {
      if (y < 0 || x < 0 || y >= static_cast<double>(height) ||
          x >= static_cast<double>(width))
        break;
      for (std::size_t k = 0; k < 3; ++k) {
        auto& v = img.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x), k);
        v = 0.5 * v + 0.5 * fg[k];
      }
    }
  }
  return quantize_bytes(img);
}

struct SynthDataset {
  DatasetManifest manifest;
  std::vector<ByteImage> images;  // parallel to manifest.records
};

// Blurs every texture at every sigma. Record label = sigma index, record
// order is texture-major. Image paths are "<id>.png" relative to wherever the
// caller writes them.
inline SynthDataset synth_blur_dataset(std::span<const ByteImage> textures,
                                       std::span<const double> sigma_levels,
                                       std::uint64_t seed) {
  if (textures.empty()) throw ArgumentError("no base textures");
  if (sigma_levels.empty()) throw ArgumentError("no sigma levels");
  for (std::size_t i = 0; i < sigma_levels.size(); ++i) {
    if (sigma_levels[i] < 0.0 || (i > 0 && sigma_levels[i] <= sigma_levels[i - 1])) {
      throw ArgumentError("sigma levels must be non-negative and ascending");
    }
  }
  if (sigma_levels.size() > static_cast<std::size_t>(kMaxZLevel) + 1) {
    throw ArgumentError("at most 15 sigma levels fit the z-level label range");
  }
  SynthDataset out;
  out.manifest.kind = LabelKind::kZLevel;
  out.manifest.source = "synthetic-blur seed=" + std::to_string(seed);
  for (std::size_t t = 0; t < textures.size(); ++t) {
    const auto base = normalize_bytes<float>(textures[t]);
    for (std::size_t s = 0; s < sigma_levels.size(); ++s) {
      std::ostringstream id;
      id << "tex" << t << "_s" << s;
      out.manifest.records.push_back(
          {id.str(), id.str() + ".png", static_cast<double>(s),
           "tex" + std::to_string(t)});
      if (sigma_levels[s] == 0.0) {
        out.images.push_back(textures[t]);
      } else {
        out.images.push_back(quantize_bytes(gaussian_blur(base, sigma_levels[s])));
      }
    }
  }
  return out;
}

// Generates `n_textures` procedural textures from `seed`, then blurs them.
inline SynthDataset synth_blur_dataset(std::size_t n_textures,
                                       std::size_t tile_size,
                                       std::span<const double> sigma_levels,
                                       std::uint64_t seed) {
  std::vector<ByteImage> textures;
  for (std::size_t t = 0; t < n_textures; ++t) {
    textures.push_back(procedural_texture(tile_size, tile_size, derive_seed(seed, t)));
  }
  return synth_blur_dataset(textures, sigma_levels, seed);
}

// ---------------------------------------------------------------------------
// Splits

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

// Seeded uniform shuffle, then contiguous partition. Train and validation
// sizes are round(fraction * n); test takes the remainder.
inline SplitIndices split_indices(std::size_t n,
                                  std::array<double, 3> fractions = {0.6, 0.2, 0.2},
                                  std::uint64_t seed = kDefaultSeed) {
  double total = 0.0;
  std::size_t parts = 0;
  for (double f : fractions) {
    if (f < 0.0) throw ArgumentError("split fractions must be non-negative");
    total += f;
    parts += f > 0.0 ? 1 : 0;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ArgumentError("split fractions must sum to 1");
  }
  if (n < parts) {
    throw ArgumentError("cannot split " + std::to_string(n) + " records into " +
                        std::to_string(parts) + " partitions");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  auto n_train = static_cast<std::size_t>(std::llround(fractions[0] * static_cast<double>(n)));
  auto n_val = static_cast<std::size_t>(std::llround(fractions[1] * static_cast<double>(n)));
  // Keep every requested partition non-empty.
  if (fractions[0] > 0.0) n_train = std::max<std::size_t>(n_train, 1);
  if (fractions[1] > 0.0) n_val = std::max<std::size_t>(n_val, 1);
  const std::size_t min_test = fractions[2] > 0.0 ? 1 : 0;
  while (n_train + n_val + min_test > n) {
    if (n_train > n_val && n_train > 1) --n_train;
    else --n_val;
  }
  SplitIndices s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                      order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  return s;
}

struct ManifestSplit {
  DatasetManifest train;
  DatasetManifest validation;
  DatasetManifest test;
};

inline ManifestSplit split_dataset(const DatasetManifest& manifest,
                                   std::array<double, 3> fractions = {0.6, 0.2, 0.2},
                                   std::uint64_t seed = kDefaultSeed) {
  const auto idx = split_indices(manifest.records.size(), fractions, seed);
  auto pick = [&](const std::vector<std::size_t>& which) {
    DatasetManifest m;
    m.kind = manifest.kind;
    m.source = manifest.source;
    m.base_dir = manifest.base_dir;
    for (auto i : which) m.records.push_back(manifest.records[i]);
    return m;
  };
  return {pick(idx.train), pick(idx.validation), pick(idx.test)};
}

}  // namespace focuslite
