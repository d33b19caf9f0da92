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

#include "crackres/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "crackres/ops.hpp"
#include "crackres/rng.hpp"
#include "crackres/tape.hpp"

namespace crackres {

namespace {
constexpr std::size_t kEvalChunk = 64;
}  // namespace

const char* to_string(LossKind kind) { return kind == LossKind::kBce ? "bce" : "mse"; }

const char* to_string(Decision decision) {
  switch (decision) {
    case Decision::kSuperResolved: return "superresolved";
    case Decision::kFiltered: return "filtered";
    case Decision::kError: return "error";
  }
  return "unknown";
}

void TrainConfig::validate() const {
  if (max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
  if (patience < 1) throw std::invalid_argument("patience must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  schedule.validate();
}

EarlyStopping::EarlyStopping(std::int64_t patience) : patience_(patience) {
  if (patience < 1) throw std::invalid_argument("patience must be >= 1");
}

bool EarlyStopping::update(std::int64_t epoch, double val_loss) {
  if (!best_loss_ || val_loss < *best_loss_) {
    best_loss_ = val_loss;
    best_epoch_ = epoch;
    since_improvement_ = 0;
    return true;
  }
  ++since_improvement_;
  return false;
}

std::string history_to_csv(std::span<const EpochRecord> history) {
  const bool psnr = !history.empty() && history.front().val_psnr_db.has_value();
  std::ostringstream out;
  out << "epoch,train_loss,val_loss,lr," << (psnr ? "val_psnr_db" : "val_accuracy") << '\n';
  for (const auto& r : history) {
    const auto metric = psnr ? r.val_psnr_db : r.val_accuracy;
    out << r.epoch << ',' << format_double(r.train_loss) << ',' << format_double(r.val_loss)
        << ',' << format_double(r.lr) << ',' << (metric ? format_double(*metric) : "") << '\n';
  }
  return out.str();
}

Tensor stack(std::span<const Tensor> items) {
  if (items.empty()) throw std::invalid_argument("stack: no items");
  const Shape& first = items.front().shape();
  Shape shape{items.size()};
  shape.insert(shape.end(), first.begin(), first.end());
  std::vector<float> data;
  data.reserve(num_elements(shape));
  for (const auto& t : items) {
    if (t.shape() != first) {
      throw ShapeError("stack: shape " + to_string(t.shape()) + " differs from " +
                       to_string(first));
    }
    data.insert(data.end(), t.values().begin(), t.values().end());
  }
  return Tensor(std::move(shape), std::move(data));
}

namespace {

using BatchLossFn = std::function<ad::Var(ad::Tape<float>&, std::span<const ad::Var>,
                                          std::span<const std::size_t>, std::size_t& correct)>;
using ValidateFn = std::function<void(std::span<const Tensor>, EpochRecord&)>;

TrainResult train_loop(const ModelArchitecture& arch, std::size_t train_size,
                       const TrainConfig& config, bool track_accuracy,
                       const BatchLossFn& batch_loss, const ValidateFn& validate,
                       const EpochCallback& on_epoch) {
  Rng root(config.seed);
  const std::uint64_t init_seed = root.next();
  Rng order_rng(root.next());

  std::vector<Tensor> params = init_params(arch, init_seed);
  std::vector<AdamState> states(params.size());
  EarlyStopping stopper(config.patience);

  TrainResult result;
  result.checkpoint.arch = arch;
  result.checkpoint.params = params;
  result.checkpoint.metadata.seed = config.seed;

  std::vector<std::size_t> order(train_size);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::int64_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    const double lr = lr_at(config.schedule, epoch);
    order_rng.shuffle(order);

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t b = 0; b < train_size; b += config.batch_size) {
      const std::span<const std::size_t> batch(order.data() + b,
                                               std::min(config.batch_size, train_size - b));
      ad::Tape<float> tape;
      std::vector<ad::Var> vars;
      vars.reserve(params.size());
      for (const auto& p : params) vars.push_back(tape.leaf(p, true));
      std::size_t batch_correct = 0;
      const ad::Var loss = batch_loss(tape, vars, batch, batch_correct);
      const double value = tape.value(loss).values()[0];
      if (!std::isfinite(value)) {
        throw TrainingError("non-finite training loss at epoch " + std::to_string(epoch));
      }
      tape.backward(loss);
      for (std::size_t i = 0; i < params.size(); ++i) {
        adam_step(params[i], tape.grad(vars[i]), states[i], lr, config.adam);
      }
      loss_sum += value * static_cast<double>(batch.size());
      correct += batch_correct;
    }

    EpochRecord record;
    record.epoch = epoch;
    record.lr = lr;
    record.train_loss = loss_sum / static_cast<double>(train_size);
    if (track_accuracy) {
      record.train_accuracy = static_cast<double>(correct) / static_cast<double>(train_size);
    }
    validate(params, record);
    if (!std::isfinite(record.val_loss)) {
      throw TrainingError("non-finite validation loss at epoch " + std::to_string(epoch));
    }
    record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    if (stopper.update(epoch, record.val_loss)) {
      result.checkpoint.params = params;
      result.checkpoint.metadata.epoch = epoch;
      result.checkpoint.metadata.val_loss = record.val_loss;
    }
    result.history.push_back(record);
    if (on_epoch && !on_epoch(record)) break;
    if (stopper.should_stop()) {
      result.early_stopped = true;
      break;
    }
  }
  return result;
}

template <typename Sample, typename Get>
Tensor stack_field(std::span<const Sample> samples, std::span<const std::size_t> idx, Get get) {
  std::vector<Tensor> items;
  items.reserve(idx.size());
  for (std::size_t i : idx) items.push_back(get(samples[i]));
  return stack(items);
}

std::vector<std::size_t> range(std::size_t begin, std::size_t end) {
  std::vector<std::size_t> out(end - begin);
  std::iota(out.begin(), out.end(), begin);
  return out;
}

// Classifier scores for every sample, evaluated in fixed-size chunks.
std::vector<double> predict_scores(const ModelArchitecture& arch, std::span<const Tensor> params,
                                   std::span<const ClassifierSample> samples) {
  std::vector<double> scores;
  scores.reserve(samples.size());
  for (std::size_t b = 0; b < samples.size(); b += kEvalChunk) {
    const auto idx = range(b, std::min(samples.size(), b + kEvalChunk));
    const Tensor out = forward<float>(
        arch, params,
        stack_field(samples, idx, [](const ClassifierSample& s) -> const Tensor& { return s.image; }));
    for (float v : out.values()) scores.push_back(v);
  }
  return scores;
}

void check_classifier_split(std::span<const ClassifierSample> samples, const char* name) {
  if (samples.empty()) throw std::invalid_argument(std::string(name) + " split is empty");
  for (const auto& s : samples) {
    if (s.label != 0 && s.label != 1) {
      throw std::invalid_argument(std::string(name) + " split has a label other than 0/1");
    }
  }
}

}  // namespace

double classifier_loss(const ModelArchitecture& arch, std::span<const Tensor> params,
                       std::span<const ClassifierSample> samples) {
  check_classifier_split(samples, "evaluation");
  const auto scores = predict_scores(arch, params, samples);
  Tensor predictions({samples.size(), 1});
  Tensor labels({samples.size(), 1});
  for (std::size_t i = 0; i < samples.size(); ++i) {
    predictions[i] = static_cast<float>(scores[i]);
    labels[i] = static_cast<float>(samples[i].label);
  }
  return ops::bce_loss(predictions, labels);
}

double sr_loss(const ModelArchitecture& arch, std::span<const Tensor> params,
               std::span<const SrSample> samples) {
  if (samples.empty()) throw std::invalid_argument("evaluation split is empty");
  double se = 0.0;
  std::size_t count = 0;
  for (std::size_t b = 0; b < samples.size(); b += kEvalChunk) {
    const auto idx = range(b, std::min(samples.size(), b + kEvalChunk));
    const Tensor out = forward_raw<float>(
        arch, params, stack_field(samples, idx, [](const SrSample& s) -> const Tensor& { return s.lr; }));
    const Tensor target =
        stack_field(samples, idx, [](const SrSample& s) -> const Tensor& { return s.hr; });
    if (out.shape() != target.shape()) {
      throw ShapeError("sr_loss: output " + to_string(out.shape()) + " vs target " +
                       to_string(target.shape()));
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double d = static_cast<double>(out[i]) - static_cast<double>(target[i]);
      se += d * d;
    }
    count += out.size();
  }
  return se / static_cast<double>(count);
}

TrainResult train_classifier(const ModelArchitecture& arch,
                             std::span<const ClassifierSample> train,
                             std::span<const ClassifierSample> val, const TrainConfig& config,
                             const EpochCallback& on_epoch) {
  config.validate();
  check_classifier_split(train, "training");
  check_classifier_split(val, "validation");
  const auto positives = std::count_if(train.begin(), train.end(),
                                       [](const ClassifierSample& s) { return s.label == 1; });
  if (positives == 0 || static_cast<std::size_t>(positives) == train.size()) {
    throw std::invalid_argument("training split holds a single class");
  }

  const BatchLossFn batch_loss = [&](ad::Tape<float>& tape, std::span<const ad::Var> vars,
                                     std::span<const std::size_t> idx, std::size_t& correct) {
    const ad::Var input = tape.leaf(
        stack_field(train, idx, [](const ClassifierSample& s) -> const Tensor& { return s.image; }),
        false);
    const ad::Var out = forward_taped(tape, arch, vars, input);
    Tensor labels({idx.size(), 1});
    for (std::size_t k = 0; k < idx.size(); ++k) {
      labels[k] = static_cast<float>(train[idx[k]].label);
    }
    const auto scores = tape.value(out).values();
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const int predicted = scores[k] >= kDecisionThreshold ? 1 : 0;
      correct += predicted == train[idx[k]].label ? 1 : 0;
    }
    return ad::bce_loss(tape, out, labels);
  };

  const ValidateFn validate = [&](std::span<const Tensor> params, EpochRecord& record) {
    const auto scores = predict_scores(arch, params, val);
    Tensor predictions({val.size(), 1});
    Tensor labels({val.size(), 1});
    std::size_t correct = 0;
    for (std::size_t i = 0; i < val.size(); ++i) {
      predictions[i] = static_cast<float>(scores[i]);
      labels[i] = static_cast<float>(val[i].label);
      correct += (scores[i] >= kDecisionThreshold ? 1 : 0) == val[i].label ? 1 : 0;
    }
    record.val_loss = ops::bce_loss(predictions, labels);
    record.val_accuracy = static_cast<double>(correct) / static_cast<double>(val.size());
  };

  return train_loop(arch, train.size(), config, true, batch_loss, validate, on_epoch);
}

TrainResult train_sr(const ModelArchitecture& arch, std::span<const SrSample> train,
                     std::span<const SrSample> val, const TrainConfig& config,
                     const EpochCallback& on_epoch) {
  config.validate();
  if (train.empty() || val.empty()) throw std::invalid_argument("train and val pairs must be non-empty");
  const auto shapes = infer_shapes(arch, train.front().lr.shape());
  for (auto split : {train, val}) {
    for (const auto& s : split) {
      if (s.lr.shape() != train.front().lr.shape() || s.hr.shape() != shapes.back()) {
        throw ShapeError("train_sr: pair " + to_string(s.lr.shape()) + " -> " +
                         to_string(s.hr.shape()) + " does not match the network output " +
                         to_string(shapes.back()));
      }
    }
  }

  const BatchLossFn batch_loss = [&](ad::Tape<float>& tape, std::span<const ad::Var> vars,
                                     std::span<const std::size_t> idx, std::size_t&) {
    const ad::Var input = tape.leaf(
        stack_field(train, idx, [](const SrSample& s) -> const Tensor& { return s.lr; }), false);
    const ad::Var out = forward_taped(tape, arch, vars, input);
    return ad::mse_loss(tape, out,
                        stack_field(train, idx, [](const SrSample& s) -> const Tensor& { return s.hr; }));
  };

  const ValidateFn validate = [&](std::span<const Tensor> params, EpochRecord& record) {
    record.val_loss = sr_loss(arch, params, val);
    double psnr_sum = 0.0;
    std::size_t finite = 0;
    for (const auto& s : val) {
      const Tensor out = forward<float>(arch, params, s.lr);
      const std::vector<double> a(out.values().begin(), out.values().end());
      const std::vector<double> b(s.hr.values().begin(), s.hr.values().end());
      const double db = psnr(a, b);
      if (std::isfinite(db)) {
        psnr_sum += db;
        ++finite;
      }
    }
    record.val_psnr_db =
        finite ? psnr_sum / static_cast<double>(finite) : std::numeric_limits<double>::infinity();
  };

  return train_loop(arch, train.size(), config, false, batch_loss, validate, on_epoch);
}

ClassifierEvaluation evaluate_classifier(const Checkpoint& checkpoint,
                                         std::span<const ClassifierSample> test,
                                         double threshold) {
  check_classifier_split(test, "test");
  ClassifierEvaluation eval;
  eval.scores = predict_scores(checkpoint.arch, checkpoint.params, test);
  std::vector<int> labels;
  labels.reserve(test.size());
  for (const auto& s : test) labels.push_back(s.label);
  eval.matrix = confusion_matrix(eval.scores, labels, threshold);
  eval.report = classification_report(eval.matrix);
  return eval;
}

SrEvaluation evaluate_sr(const Checkpoint& checkpoint, std::span<const SrSample> test,
                         const SrMetricSettings& settings, std::span<const std::string> ids) {
  if (test.empty()) throw std::invalid_argument("evaluate_sr: no pairs");
  if (!ids.empty() && ids.size() != test.size()) {
    throw std::invalid_argument("evaluate_sr: ids and pairs differ in count");
  }
  std::vector<std::string> names(ids.begin(), ids.end());
  if (names.empty()) {
    for (std::size_t i = 0; i < test.size(); ++i) names.push_back(std::to_string(i));
  }

  SrEvaluation eval;
  std::vector<ImageBuffer> truth;
  for (const auto& s : test) {
    const ImageBuffer lr = from_tensor(s.lr);
    const ImageBuffer hr = from_tensor(s.hr);
    const ImageBuffer out = from_tensor(forward<float>(checkpoint.arch, checkpoint.params, s.lr));
    eval.bicubic_outputs.push_back(bicubic_resize(lr, hr.height(), hr.width()));
    eval.ape_maps.push_back(ape_map(out, hr));
    eval.outputs.push_back(out);
    truth.push_back(hr);
  }
  eval.espcnn = sr_eval_report(eval.outputs, truth, names, "espcnn", settings);
  eval.bicubic = sr_eval_report(eval.bicubic_outputs, truth, names, "bicubic", settings);
  return eval;
}

TwoStagePipeline::TwoStagePipeline(Checkpoint classifier, Checkpoint sr, double threshold)
    : classifier_(std::move(classifier)), sr_(std::move(sr)), threshold_(threshold) {
  check_params<float>(classifier_.arch, classifier_.params);
  check_params<float>(sr_.arch, sr_.params);
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("pipeline threshold must lie in (0, 1)");
  }
}

Tensor TwoStagePipeline::super_resolve(const Tensor& image) {
  ++sr_calls_;
  return forward<float>(sr_.arch, sr_.params, image);
}

std::vector<PipelineResult> TwoStagePipeline::run(
    std::span<const ImageBuffer> images,
    std::span<const std::optional<ImageBuffer>> ground_truth) {
  if (!ground_truth.empty() && ground_truth.size() != images.size()) {
    throw std::invalid_argument("pipeline: ground truth count differs from image count");
  }
  std::vector<PipelineResult> results;
  results.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    PipelineResult r;
    r.index = i;
    try {
      const ImageBuffer& img = images[i];
      const Shape expected = classifier_.arch.input_shape;
      if (img.height() != expected[0] || img.width() != expected[1] ||
          img.channels() != expected[2]) {
        throw ShapeError("image " + std::to_string(i) + " is " + std::to_string(img.height()) +
                         "x" + std::to_string(img.width()) + "x" +
                         std::to_string(img.channels()) + ", expected " + to_string(expected));
      }
      const Tensor x = to_tensor(normalize(img));
      ++classifier_calls_;
      r.score = forward<float>(classifier_.arch, classifier_.params, x).values()[0];
      if (r.score >= threshold_) {
        r.decision = Decision::kSuperResolved;
        r.hr = from_tensor(super_resolve(x));
        if (!ground_truth.empty() && ground_truth[i]) r.ape = ape_map(*r.hr, *ground_truth[i]);
      } else {
        r.decision = Decision::kFiltered;
      }
    } catch (const std::exception& e) {
      r.decision = Decision::kError;
      r.hr.reset();
      r.ape.reset();
      r.error = e.what();
    }
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace crackres
