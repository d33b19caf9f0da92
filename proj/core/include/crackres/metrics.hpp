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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "crackres/image.hpp"
#include "crackres/models.hpp"
#include "crackres/tensor.hpp"

namespace crackres {

// Classification.

struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + tn + fp + fn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

inline constexpr double kDecisionThreshold = 0.5;

/// score >= threshold counts as a positive prediction. Labels must be 0 or 1.
ConfusionMatrix confusion_matrix(std::span<const double> scores, std::span<const int> labels,
                                 double threshold = kDecisionThreshold);

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  /// Set when the corresponding denominator was zero and the value is 0 by
  /// convention.
  bool precision_degenerate = false;
  bool recall_degenerate = false;
  bool f1_degenerate = false;
};

struct ClassificationReport {
  ConfusionMatrix matrix;
  double accuracy = 0.0;
  ClassScores positive;
  ClassScores negative;
  /// Unweighted mean of the two per-class scores.
  ClassScores macro;
  /// Pooled over both classes; equals accuracy for a binary problem.
  ClassScores micro;
};

/// Throws std::invalid_argument on an empty matrix.
ClassificationReport classification_report(const ConfusionMatrix& cm);
std::string classification_report_to_json(const ClassificationReport& report);

// Image quality. All functions take float or 8-bit images (8-bit inputs are
// normalized first) and require equal shapes.

/// |P1 - P2| per sample.
ImageBuffer ape_map(const ImageBuffer& p1, const ImageBuffer& p2);

struct PsnrOptions {
  /// false: range R = max - min over the union of both images' samples.
  /// true: R = peak (conventional PSNR).
  bool fixed_range = false;
  double peak = 1.0;
};

/// 10 log10(R^2 / MSE). +inf when MSE = 0, -inf when R = 0 < MSE.
double psnr(const ImageBuffer& p1, const ImageBuffer& p2, const PsnrOptions& options = {});
/// Same, on raw samples.
double psnr(std::span<const double> p1, std::span<const double> p2,
            const PsnrOptions& options = {});

enum class SsimMode { kGlobal, kWindowed };

struct SsimParams {
  double c1 = 0.01 * 0.01;
  double c2 = 0.03 * 0.03;
  SsimMode mode = SsimMode::kGlobal;
  /// Square uniform window, windowed mode only.
  std::size_t window = 8;
  std::size_t stride = 1;

  void validate() const;
};

/// Global mode: one set of statistics over all samples. Windowed mode: mean
/// of the per-window index over every channel and window position.
/// Variances and covariance use the population (1/N) normalization.
double ssim(const ImageBuffer& p1, const ImageBuffer& p2, const SsimParams& params = {});
double ssim(std::span<const double> p1, std::span<const double> p2,
            const SsimParams& params = {});

/// Maps an (H, W, C) image tensor to feature maps, each (h, w, c) or (n).
using FeatureExtractor = std::function<std::vector<Tensor64>(const Tensor64&)>;

struct LpipsConfig {
  FeatureExtractor extractor;
  std::vector<double> layer_weights;
  /// Square patch side in feature-map cells; 0 means one whole-map patch.
  std::size_t patch_size = 0;
  std::size_t patch_stride = 0;
  double p = 2.0;
  /// Scale each spatial feature vector to unit L2 norm before differencing.
  bool normalize_channels = true;

  void validate() const;
};

/// Returns the input tensor as its single feature map.
FeatureExtractor identity_extractor();

/// Activations of the first `conv_layers` conv blocks of `arch`, evaluated in
/// double precision. The extractor rejects images whose channel count differs
/// from the architecture input.
FeatureExtractor conv_trunk_extractor(ModelArchitecture arch, std::vector<Tensor> params,
                                      std::size_t conv_layers);

/// Classifier conv trunk, two layers, equal weights, whole-image patch.
LpipsConfig classifier_trunk_lpips(const ModelArchitecture& classifier,
                                   std::vector<Tensor> params);

/// mean over patches of (sum_j w_j ||phi_j(x1) - phi_j(x2)||_2^2)^(1/2) for
/// p = 2 (general p uses the p-norm per layer).
double lpips(const ImageBuffer& p1, const ImageBuffer& p2, const LpipsConfig& config);
double lpips(const Tensor64& x1, const Tensor64& x2, const LpipsConfig& config);

// Super-resolution evaluation.

struct SrImageScores {
  std::string image_id;
  double psnr_db = 0.0;
  double ssim = 0.0;
  double lpips = 0.0;
};

struct SrMetricSettings {
  PsnrOptions psnr;
  SsimParams ssim;
  LpipsConfig lpips;
};

struct SrEvalReport {
  std::string method;
  std::vector<SrImageScores> per_image;
  /// Mean over finite PSNR values only; NaN when there are none.
  double mean_psnr_db = std::numeric_limits<double>::quiet_NaN();
  std::size_t finite_psnr_count = 0;
  std::size_t positive_infinite_psnr_count = 0;
  std::size_t negative_infinite_psnr_count = 0;
  double mean_ssim = 0.0;
  double mean_lpips = 0.0;
};

SrEvalReport sr_eval_report(std::span<const ImageBuffer> generated,
                            std::span<const ImageBuffer> ground_truth,
                            std::span<const std::string> image_ids, const std::string& method,
                            const SrMetricSettings& settings);

/// Recomputes the means of `report` from its per-image rows.
void summarize(SrEvalReport& report);

/// Header `image_id,method,psnr_db,ssim,lpips`; infinities print as inf/-inf.
std::string sr_reports_to_csv(std::span<const SrEvalReport> reports);
std::string sr_report_to_json(const SrEvalReport& report);

/// Shortest text that parses back to the same double ("inf", "-inf", "nan"
/// for non-finite values).
std::string format_double(double value);

}  // namespace crackres
