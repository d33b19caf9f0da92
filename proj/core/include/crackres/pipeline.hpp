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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crackres/checkpoint.hpp"
#include "crackres/image.hpp"
#include "crackres/metrics.hpp"
#include "crackres/models.hpp"
#include "crackres/optim.hpp"
#include "crackres/resample.hpp"

namespace crackres {

enum class LossKind { kBce, kMse };

const char* to_string(LossKind kind);

struct TrainConfig {
  std::int64_t max_epochs = 2000;
  std::int64_t patience = 20;
  LrSchedule schedule{{100}, {1e-4, 1e-5}};
  std::size_t batch_size = 32;
  /// Drives weight initialization and the per-epoch shuffles.
  std::uint64_t seed = 0;
  LossKind loss = LossKind::kBce;
  AdamParams adam;

  void validate() const;
};

/// Tracks the best validation loss; improvement means strictly lower.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::int64_t patience);

  /// Records the loss of `epoch`; returns true when it is a new best.
  bool update(std::int64_t epoch, double val_loss);
  bool should_stop() const noexcept { return since_improvement_ >= patience_; }

  std::optional<double> best_loss() const noexcept { return best_loss_; }
  std::int64_t best_epoch() const noexcept { return best_epoch_; }
  std::int64_t epochs_since_improvement() const noexcept { return since_improvement_; }

 private:
  std::int64_t patience_;
  std::optional<double> best_loss_;
  std::int64_t best_epoch_ = -1;
  std::int64_t since_improvement_ = 0;
};

struct EpochRecord {
  std::int64_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
  double wall_seconds = 0.0;
  std::optional<double> train_accuracy;
  std::optional<double> val_accuracy;
  std::optional<double> val_psnr_db;
};

/// Columns epoch,train_loss,val_loss,lr and then val_accuracy or val_psnr_db,
/// whichever the records carry. Wall time is left out so the file is
/// reproducible.
std::string history_to_csv(std::span<const EpochRecord> history);

struct TrainResult {
  /// Weights from the best validation epoch.
  Checkpoint checkpoint;
  std::vector<EpochRecord> history;
  bool early_stopped = false;
};

struct ClassifierSample {
  Tensor image;  // (H, W, C) in [0, 1]
  int label = 0;
};

struct SrSample {
  Tensor lr;  // (h, w, c)
  Tensor hr;  // (r h, r w, c)
};

/// Called after each epoch; returning false stops training.
using EpochCallback = std::function<bool(const EpochRecord&)>;

/// Adam on BCE. Throws std::invalid_argument on empty splits or a single-class
/// training set, TrainingError on a non-finite loss.
TrainResult train_classifier(const ModelArchitecture& arch,
                             std::span<const ClassifierSample> train,
                             std::span<const ClassifierSample> val, const TrainConfig& config,
                             const EpochCallback& on_epoch = {});

/// Adam on MSE of the unclipped output. Validation PSNR is measured on the
/// clipped output.
TrainResult train_sr(const ModelArchitecture& arch, std::span<const SrSample> train,
                     std::span<const SrSample> val, const TrainConfig& config,
                     const EpochCallback& on_epoch = {});

/// Mean loss of `params` over a split, as used for validation.
double classifier_loss(const ModelArchitecture& arch, std::span<const Tensor> params,
                       std::span<const ClassifierSample> samples);
double sr_loss(const ModelArchitecture& arch, std::span<const Tensor> params,
               std::span<const SrSample> samples);

struct ClassifierEvaluation {
  std::vector<double> scores;
  ConfusionMatrix matrix;
  ClassificationReport report;
};

ClassifierEvaluation evaluate_classifier(const Checkpoint& checkpoint,
                                         std::span<const ClassifierSample> test,
                                         double threshold = kDecisionThreshold);

struct SrEvaluation {
  SrEvalReport espcnn;
  SrEvalReport bicubic;
  std::vector<ImageBuffer> outputs;
  std::vector<ImageBuffer> bicubic_outputs;
  /// ESPCNN output vs ground truth.
  std::vector<ImageBuffer> ape_maps;
};

/// Runs the network and a bicubic upscale of the same low-resolution input on
/// every pair. `ids` may be empty (indices are used).
SrEvaluation evaluate_sr(const Checkpoint& checkpoint, std::span<const SrSample> test,
                         const SrMetricSettings& settings,
                         std::span<const std::string> ids = {});

enum class Decision { kSuperResolved, kFiltered, kError };

const char* to_string(Decision decision);

struct PipelineResult {
  std::size_t index = 0;
  double score = 0.0;
  Decision decision = Decision::kFiltered;
  /// Present iff decision == kSuperResolved.
  std::optional<ImageBuffer> hr;
  /// Present when a ground truth was supplied for a super-resolved image.
  std::optional<ImageBuffer> ape;
  std::string error;
};

/// Classify, then super-resolve only images scored at or above the threshold.
class TwoStagePipeline {
 public:
  TwoStagePipeline(Checkpoint classifier, Checkpoint sr,
                   double threshold = kDecisionThreshold);

  /// One result per input, in input order. `ground_truth` is empty or holds
  /// one optional image per input. Bad inputs yield kError entries.
  std::vector<PipelineResult> run(
      std::span<const ImageBuffer> images,
      std::span<const std::optional<ImageBuffer>> ground_truth = {});

  std::size_t classifier_invocations() const noexcept { return classifier_calls_; }
  std::size_t sr_invocations() const noexcept { return sr_calls_; }

 private:
  Tensor super_resolve(const Tensor& image);

  Checkpoint classifier_;
  Checkpoint sr_;
  double threshold_;
  std::size_t classifier_calls_ = 0;
  std::size_t sr_calls_ = 0;
};

/// Stacks (H, W, C) tensors into (N, H, W, C).
Tensor stack(std::span<const Tensor> items);

}  // namespace crackres
