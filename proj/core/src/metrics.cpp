// Copyright 2026 The crackres Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "crackres/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace crackres {

namespace {
using json = nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();

double ratio(std::uint64_t num, std::uint64_t den, bool& degenerate) {
  degenerate = den == 0;
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

ClassScores class_scores(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  ClassScores s;
  s.precision = ratio(tp, tp + fp, s.precision_degenerate);
  s.recall = ratio(tp, tp + fn, s.recall_degenerate);
  const double sum = s.precision + s.recall;
  s.f1_degenerate = sum == 0.0;
  s.f1 = sum == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / sum;
  return s;
}

json scores_json(const ClassScores& s) {
  return {{"precision", s.precision},
          {"recall", s.recall},
          {"f1", s.f1},
          {"precision_degenerate", s.precision_degenerate},
          {"recall_degenerate", s.recall_degenerate},
          {"f1_degenerate", s.f1_degenerate}};
}

std::vector<double> samples(const ImageBuffer& image) {
  const ImageBuffer unit = normalize(image);
  const auto f = unit.f32();
  return {f.begin(), f.end()};
}

void require_same_shape(const ImageBuffer& a, const ImageBuffer& b, const char* op) {
  if (a.height() != b.height() || a.width() != b.width() || a.channels() != b.channels()) {
    throw ShapeError(std::string(op) + ": image shapes differ (" + std::to_string(a.height()) +
                     "x" + std::to_string(a.width()) + "x" + std::to_string(a.channels()) +
                     " vs " + std::to_string(b.height()) + "x" + std::to_string(b.width()) +
                     "x" + std::to_string(b.channels()) + ")");
  }
}

void require_same_size(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    throw ShapeError(std::string(op) + ": sizes differ (" + std::to_string(a) + " vs " +
                     std::to_string(b) + ")");
  }
  if (a == 0) throw ShapeError(std::string(op) + ": empty input");
}

}  // namespace

ConfusionMatrix confusion_matrix(std::span<const double> scores, std::span<const int> labels,
                                 double threshold) {
  if (scores.empty()) throw std::invalid_argument("confusion_matrix: empty input");
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("confusion_matrix: " + std::to_string(scores.size()) +
                                " scores vs " + std::to_string(labels.size()) + " labels");
  }
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("confusion_matrix: threshold must lie in (0, 1)");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw std::invalid_argument("confusion_matrix: label " + std::to_string(labels[i]) +
                                  " at index " + std::to_string(i) + " is not 0 or 1");
    }
    const bool predicted = scores[i] >= threshold;
    const bool actual = labels[i] == 1;
    if (predicted && actual) ++cm.tp;
    else if (predicted) ++cm.fp;
    else if (actual) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

ClassificationReport classification_report(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw std::invalid_argument("classification_report: empty matrix");
  ClassificationReport r;
  r.matrix = cm;
  r.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  r.positive = class_scores(cm.tp, cm.fp, cm.fn);
  r.negative = class_scores(cm.tn, cm.fn, cm.fp);
  r.macro.precision = (r.positive.precision + r.negative.precision) / 2.0;
  r.macro.recall = (r.positive.recall + r.negative.recall) / 2.0;
  r.macro.f1 = (r.positive.f1 + r.negative.f1) / 2.0;
  r.macro.precision_degenerate = r.positive.precision_degenerate || r.negative.precision_degenerate;
  r.macro.recall_degenerate = r.positive.recall_degenerate || r.negative.recall_degenerate;
  r.macro.f1_degenerate = r.positive.f1_degenerate || r.negative.f1_degenerate;
  r.micro = class_scores(cm.tp + cm.tn, cm.fp + cm.fn, cm.fn + cm.fp);
  return r;
}

std::string classification_report_to_json(const ClassificationReport& r) {
  const json j = {
      {"confusion_matrix", {{"tp", r.matrix.tp}, {"tn", r.matrix.tn}, {"fp", r.matrix.fp},
                            {"fn", r.matrix.fn}}},
      {"total", r.matrix.total()},
      {"accuracy", r.accuracy},
      {"positive", scores_json(r.positive)},
      {"negative", scores_json(r.negative)},
      {"macro", scores_json(r.macro)},
      {"micro", scores_json(r.micro)},
  };
  return j.dump(2) + "\n";
}

ImageBuffer ape_map(const ImageBuffer& p1, const ImageBuffer& p2) {
  require_same_shape(p1, p2, "ape_map");
  const auto a = normalize(p1), b = normalize(p2);
  const auto fa = a.f32(), fb = b.f32();
  std::vector<float> out(fa.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(fa[i] - fb[i]);
  return ImageBuffer::from_f32(p1.height(), p1.width(), p1.channels(), std::move(out));
}

double psnr(std::span<const double> p1, std::span<const double> p2, const PsnrOptions& options) {
  require_same_size(p1.size(), p2.size(), "psnr");
  double se = 0.0;
  for (std::size_t i = 0; i < p1.size(); ++i) se += (p1[i] - p2[i]) * (p1[i] - p2[i]);
  const double mse = se / static_cast<double>(p1.size());
  if (mse == 0.0) return kInf;
  double range = options.peak;
  if (!options.fixed_range) {
    const auto [lo1, hi1] = std::minmax_element(p1.begin(), p1.end());
    const auto [lo2, hi2] = std::minmax_element(p2.begin(), p2.end());
    range = std::max(*hi1, *hi2) - std::min(*lo1, *lo2);
  }
  if (range == 0.0) return -kInf;
  return 10.0 * std::log10(range * range / mse);
}

double psnr(const ImageBuffer& p1, const ImageBuffer& p2, const PsnrOptions& options) {
  require_same_shape(p1, p2, "psnr");
  return psnr(samples(p1), samples(p2), options);
}

void SsimParams::validate() const {
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw std::invalid_argument("ssim: c1 and c2 must be > 0");
  if (mode == SsimMode::kWindowed && (window == 0 || stride == 0)) {
    throw std::invalid_argument("ssim: window and stride must be >= 1");
  }
}

namespace {

struct Moments {
  double mu1 = 0, mu2 = 0, var1 = 0, var2 = 0, cov = 0;
};

double ssim_from(const Moments& m, double c1, double c2) {
  return ((2.0 * m.mu1 * m.mu2 + c1) * (2.0 * m.cov + c2)) /
         ((m.mu1 * m.mu1 + m.mu2 * m.mu2 + c1) * (m.var1 + m.var2 + c2));
}

// Two-pass moments over the samples selected by `index(k)`, k < n.
template <typename Index>
Moments moments(std::span<const double> a, std::span<const double> b, std::size_t n,
                Index index) {
  Moments m;
  for (std::size_t k = 0; k < n; ++k) {
    m.mu1 += a[index(k)];
    m.mu2 += b[index(k)];
  }
  const auto count = static_cast<double>(n);
  m.mu1 /= count;
  m.mu2 /= count;
  for (std::size_t k = 0; k < n; ++k) {
    const double d1 = a[index(k)] - m.mu1, d2 = b[index(k)] - m.mu2;
    m.var1 += d1 * d1;
    m.var2 += d2 * d2;
    m.cov += d1 * d2;
  }
  m.var1 /= count;
  m.var2 /= count;
  m.cov /= count;
  return m;
}

}  // namespace

double ssim(std::span<const double> p1, std::span<const double> p2, const SsimParams& params) {
  params.validate();
  if (params.mode != SsimMode::kGlobal) {
    throw std::invalid_argument("ssim: windowed mode needs image dimensions");
  }
  require_same_size(p1.size(), p2.size(), "ssim");
  return ssim_from(moments(p1, p2, p1.size(), [](std::size_t k) { return k; }), params.c1,
                   params.c2);
}

double ssim(const ImageBuffer& p1, const ImageBuffer& p2, const SsimParams& params) {
  params.validate();
  require_same_shape(p1, p2, "ssim");
  const auto a = samples(p1), b = samples(p2);
  if (params.mode == SsimMode::kGlobal) return ssim(a, b, params);

  const std::size_t h = p1.height(), w = p1.width(), c = p1.channels(), win = params.window;
  if (win > h || win > w) {
    throw std::invalid_argument("ssim: window " + std::to_string(win) + " exceeds image " +
                                std::to_string(h) + "x" + std::to_string(w));
  }
  double total = 0.0;
  std::size_t windows = 0;
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y0 = 0; y0 + win <= h; y0 += params.stride) {
      for (std::size_t x0 = 0; x0 + win <= w; x0 += params.stride) {
        const auto index = [&](std::size_t k) {
          return ((y0 + k / win) * w + (x0 + k % win)) * c + ch;
        };
        total += ssim_from(moments(a, b, win * win, index), params.c1, params.c2);
        ++windows;
      }
    }
  }
  return total / static_cast<double>(windows);
}

void LpipsConfig::validate() const {
  if (!extractor) throw std::invalid_argument("lpips: no feature extractor");
  if (layer_weights.empty()) throw std::invalid_argument("lpips: need at least one layer");
  for (double w : layer_weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw std::invalid_argument("lpips: layer weights must be finite and >= 0");
    }
  }
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("lpips: p must be >= 1");
  if (patch_size > 0 && patch_stride == 0) {
    throw std::invalid_argument("lpips: patch_stride must be >= 1 when patch_size is set");
  }
}

FeatureExtractor identity_extractor() {
  return [](const Tensor64& x) { return std::vector<Tensor64>{x}; };
}

FeatureExtractor conv_trunk_extractor(ModelArchitecture arch, std::vector<Tensor> params,
                                      std::size_t conv_layers) {
  check_params<float>(arch, params);
  std::vector<Tensor64> wide;
  wide.reserve(params.size());
  for (const auto& p : params) wide.push_back(p.cast<double>());
  return [arch = std::move(arch), wide = std::move(wide), conv_layers](const Tensor64& x) {
    if (x.rank() != 3 || x.dim(2) != arch.input_shape.at(2)) {
      throw ShapeError("lpips extractor " + arch.name + ": expected (H, W, " +
                       std::to_string(arch.input_shape.at(2)) + ") input, got " +
                       to_string(x.shape()));
    }
    return conv_trunk_features<double>(arch, wide, x, conv_layers);
  };
}

LpipsConfig classifier_trunk_lpips(const ModelArchitecture& classifier,
                                   std::vector<Tensor> params) {
  LpipsConfig config;
  config.extractor = conv_trunk_extractor(classifier, std::move(params), 2);
  config.layer_weights = {0.5, 0.5};
  return config;
}

namespace {

// View of one feature map as (h, w, c); vectors become (1, 1, n).
struct FeatureGrid {
  std::size_t h, w, c;
};

FeatureGrid grid_of(const Tensor64& f) {
  if (f.rank() == 3) return {f.dim(0), f.dim(1), f.dim(2)};
  if (f.rank() == 1) return {1, 1, f.dim(0)};
  throw ShapeError("lpips: feature maps must be rank 1 or 3, got " + to_string(f.shape()));
}

Tensor64 unit_normalized(const Tensor64& f, const FeatureGrid& g) {
  Tensor64 out = f;
  auto d = out.data();
  for (std::size_t cell = 0; cell < g.h * g.w; ++cell) {
    double norm = 0.0;
    for (std::size_t ch = 0; ch < g.c; ++ch) norm += d[cell * g.c + ch] * d[cell * g.c + ch];
    norm = std::sqrt(norm) + 1e-10;
    for (std::size_t ch = 0; ch < g.c; ++ch) d[cell * g.c + ch] /= norm;
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> patch_origins(const FeatureGrid& g,
                                                               const LpipsConfig& config,
                                                               std::size_t& side_h,
                                                               std::size_t& side_w) {
  if (config.patch_size == 0) {
    side_h = g.h;
    side_w = g.w;
    return {{0, 0}};
  }
  if (config.patch_size > g.h || config.patch_size > g.w) {
    throw ShapeError("lpips: patch " + std::to_string(config.patch_size) +
                     " exceeds feature map " + std::to_string(g.h) + "x" + std::to_string(g.w));
  }
  side_h = side_w = config.patch_size;
  std::vector<std::pair<std::size_t, std::size_t>> origins;
  for (std::size_t y = 0; y + config.patch_size <= g.h; y += config.patch_stride) {
    for (std::size_t x = 0; x + config.patch_size <= g.w; x += config.patch_stride) {
      origins.emplace_back(y, x);
    }
  }
  return origins;
}

}  // namespace

double lpips(const Tensor64& x1, const Tensor64& x2, const LpipsConfig& config) {
  config.validate();
  if (x1.shape() != x2.shape()) {
    throw ShapeError("lpips: inputs differ, " + to_string(x1.shape()) + " vs " +
                     to_string(x2.shape()));
  }
  const auto f1 = config.extractor(x1);
  const auto f2 = config.extractor(x2);
  if (f1.size() != config.layer_weights.size() || f2.size() != f1.size()) {
    throw std::invalid_argument("lpips: extractor produced " + std::to_string(f1.size()) +
                                " feature maps for " +
                                std::to_string(config.layer_weights.size()) + " weights");
  }

  std::vector<double> patch_sums;  // sum_j w_j ||.||_p^p per patch
  for (std::size_t j = 0; j < f1.size(); ++j) {
    const FeatureGrid g = grid_of(f1[j]);
    std::size_t ph = 0, pw = 0;
    const auto origins = patch_origins(g, config, ph, pw);
    if (j == 0) patch_sums.assign(origins.size(), 0.0);
    if (origins.size() != patch_sums.size()) {
      throw ShapeError("lpips: feature maps disagree on patch count");
    }
    const Tensor64 a = config.normalize_channels ? unit_normalized(f1[j], g) : f1[j];
    const Tensor64 b = config.normalize_channels ? unit_normalized(f2[j], g) : f2[j];
    const auto da = a.data(), db = b.data();
    for (std::size_t i = 0; i < origins.size(); ++i) {
      const auto [y0, x0] = origins[i];
      double acc = 0.0;
      for (std::size_t y = y0; y < y0 + ph; ++y) {
        for (std::size_t x = x0; x < x0 + pw; ++x) {
          for (std::size_t ch = 0; ch < g.c; ++ch) {
            const std::size_t k = (y * g.w + x) * g.c + ch;
            acc += std::pow(std::abs(da[k] - db[k]), config.p);
          }
        }
      }
      patch_sums[i] += config.layer_weights[j] * acc;
    }
  }
  double total = 0.0;
  for (double s : patch_sums) total += std::pow(s, 1.0 / config.p);
  return total / static_cast<double>(patch_sums.size());
}

double lpips(const ImageBuffer& p1, const ImageBuffer& p2, const LpipsConfig& config) {
  require_same_shape(p1, p2, "lpips");
  return lpips(to_tensor(normalize(p1)).cast<double>(), to_tensor(normalize(p2)).cast<double>(),
               config);
}

void summarize(SrEvalReport& report) {
  report.finite_psnr_count = 0;
  report.positive_infinite_psnr_count = 0;
  report.negative_infinite_psnr_count = 0;
  double psnr_sum = 0.0, ssim_sum = 0.0, lpips_sum = 0.0;
  for (const auto& s : report.per_image) {
    if (std::isfinite(s.psnr_db)) {
      psnr_sum += s.psnr_db;
      ++report.finite_psnr_count;
    } else if (s.psnr_db > 0) {
      ++report.positive_infinite_psnr_count;
    } else {
      ++report.negative_infinite_psnr_count;
    }
    ssim_sum += s.ssim;
    lpips_sum += s.lpips;
  }
  const auto n = static_cast<double>(report.per_image.size());
  report.mean_psnr_db = report.finite_psnr_count > 0
                            ? psnr_sum / static_cast<double>(report.finite_psnr_count)
                            : std::numeric_limits<double>::quiet_NaN();
  report.mean_ssim = report.per_image.empty() ? 0.0 : ssim_sum / n;
  report.mean_lpips = report.per_image.empty() ? 0.0 : lpips_sum / n;
}

SrEvalReport sr_eval_report(std::span<const ImageBuffer> generated,
                            std::span<const ImageBuffer> ground_truth,
                            std::span<const std::string> image_ids, const std::string& method,
                            const SrMetricSettings& settings) {
  if (generated.empty()) throw std::invalid_argument("sr_eval_report: no pairs");
  if (generated.size() != ground_truth.size() || image_ids.size() != generated.size()) {
    throw std::invalid_argument("sr_eval_report: generated, ground truth and ids differ in count");
  }
  SrEvalReport report;
  report.method = method;
  for (std::size_t i = 0; i < generated.size(); ++i) {
    report.per_image.push_back({image_ids[i], psnr(generated[i], ground_truth[i], settings.psnr),
                                ssim(generated[i], ground_truth[i], settings.ssim),
                                lpips(generated[i], ground_truth[i], settings.lpips)});
  }
  summarize(report);
  return report;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return {buf, res.ptr};
}

std::string sr_reports_to_csv(std::span<const SrEvalReport> reports) {
  std::ostringstream out;
  out << "image_id,method,psnr_db,ssim,lpips\n";
  for (const auto& r : reports) {
    for (const auto& s : r.per_image) {
      out << s.image_id << ',' << r.method << ',' << format_double(s.psnr_db) << ','
          << format_double(s.ssim) << ',' << format_double(s.lpips) << '\n';
    }
  }
  return out.str();
}

std::string sr_report_to_json(const SrEvalReport& r) {
  const json j = {
      {"method", r.method},
      {"images", r.per_image.size()},
      {"mean_psnr_db", std::isfinite(r.mean_psnr_db) ? json(r.mean_psnr_db) : json(nullptr)},
      {"finite_psnr_count", r.finite_psnr_count},
      {"positive_infinite_psnr_count", r.positive_infinite_psnr_count},
      {"negative_infinite_psnr_count", r.negative_infinite_psnr_count},
      {"mean_ssim", r.mean_ssim},
      {"mean_lpips", r.mean_lpips},
  };
  return j.dump(2) + "\n";
}

}  // namespace crackres
