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

#include "crackres/cli/commands.hpp"

#include <fcntl.h>
#include <spdlog/spdlog.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "crackres/checkpoint.hpp"
#include "crackres/dataset.hpp"
#include "crackres/metrics.hpp"
#include "crackres/pipeline.hpp"
#include "crackres/resample.hpp"
#include "crackres/synthetic.hpp"

namespace crackres::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

void write_image(const ImageBuffer& image, const fs::path& path) {
  fs::create_directories(path.parent_path());
  save_image(image, path);
}

std::string image_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "img_%05zu", index);
  return buf;
}

class OutputLock {
 public:
  explicit OutputLock(const fs::path& dir) : path_(dir / kLockFile) {
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
      throw std::runtime_error(errno == EEXIST
                                   ? "output directory is locked by another run (" +
                                         path_.string() + " exists)"
                                   : "cannot create lock " + path_.string() + ": " +
                                         std::strerror(errno));
    }
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] const auto n = ::write(fd, pid.data(), pid.size());
    ::close(fd);
  }
  ~OutputLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  fs::path path_;
};

SyntheticCrackParams synthetic_params(const RunConfig& c) {
  SyntheticCrackParams p;
  p.size = c.synthetic.size;
  p.background = c.synthetic.background;
  p.texture_scale = c.synthetic.texture_scale;
  p.texture_amplitude = c.synthetic.texture_amplitude;
  p.crack_count_min = c.synthetic.crack_count_min;
  p.crack_count_max = c.synthetic.crack_count_max;
  p.width_min = c.synthetic.width_min;
  p.width_max = c.synthetic.width_max;
  p.meander = c.synthetic.meander;
  p.contrast = c.synthetic.contrast;
  p.seed = c.seed;
  return p;
}

SplitRatios ratios(const std::vector<double>& r) { return {r[0], r[1], r[2]}; }

TrainConfig train_config(const RunConfig& c, LossKind loss) {
  TrainConfig t;
  t.max_epochs = c.train.max_epochs;
  t.patience = c.train.patience;
  t.batch_size = c.train.batch_size;
  t.schedule = {c.train.lr_boundaries, c.train.lr_values};
  t.adam = {c.train.adam_beta1, c.train.adam_beta2, c.train.adam_epsilon};
  t.seed = c.seed;
  t.loss = loss;
  return t;
}

json split_summary(const DatasetManifest& m) {
  const auto counts = m.counts();
  json out = json::object();
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest}) {
    const auto& row = counts[static_cast<std::size_t>(s)];
    out[to_string(s)] = {{"positive", row[1]}, {"negative", row[0]}, {"total", row[0] + row[1]}};
  }
  return out;
}

fs::path resolve(const fs::path& manifest, const std::string& entry) {
  const fs::path p(entry);
  return p.is_absolute() ? p : manifest.parent_path() / p;
}

// (H, W, 3) unit tensor of an image, resized when its size differs.
Tensor load_tensor(const fs::path& path, std::size_t h, std::size_t w) {
  ImageBuffer img = to_rgb(normalize(load_image(path)));
  if (img.height() != h || img.width() != w) img = bicubic_resize(img, h, w);
  return to_tensor(img);
}

std::vector<ClassifierSample> load_classifier_split(const fs::path& manifest_path,
                                                    const DatasetManifest& manifest, Split split,
                                                    std::vector<std::string>* paths = nullptr) {
  std::vector<ClassifierSample> out;
  for (const auto& e : manifest.select(split)) {
    out.push_back({load_tensor(resolve(manifest_path, e.path), 32, 32),
                   e.label == Label::kPositive ? 1 : 0});
    if (paths) paths->push_back(e.path);
  }
  return out;
}

std::vector<SrSample> load_sr_split(const fs::path& manifest_path,
                                    const std::vector<SrPairEntry>& pairs, Split split,
                                    std::vector<std::string>* ids = nullptr) {
  std::vector<SrSample> out;
  for (const auto& p : pairs) {
    if (p.split != split) continue;
    const ImageBuffer lr = to_rgb(normalize(load_image(resolve(manifest_path, p.lr_path))));
    const ImageBuffer hr = to_rgb(normalize(load_image(resolve(manifest_path, p.hr_path))));
    out.push_back({to_tensor(lr), to_tensor(hr)});
    if (ids) ids->push_back(fs::path(p.lr_path).stem().string());
  }
  return out;
}

// Saves and reads back the checkpoint, failing unless it matches bit for bit.
void save_verified(const Checkpoint& ckpt, const fs::path& dir) {
  save_checkpoint(ckpt, dir);
  const Checkpoint back = load_checkpoint(dir);
  if (!(back.arch == ckpt.arch) || back.params != ckpt.params ||
      !(back.metadata == ckpt.metadata)) {
    throw std::runtime_error("checkpoint at " + dir.string() + " failed read-back verification");
  }
}

void write_training_outputs(const TrainResult& result, const fs::path& out) {
  save_verified(result.checkpoint, out / "checkpoint");
  write_text(out / "history.csv", history_to_csv(result.history));
  const json summary = {
      {"epochs_run", result.history.size()},
      {"best_epoch", result.checkpoint.metadata.epoch},
      {"best_val_loss", result.checkpoint.metadata.val_loss.value_or(0.0)},
      {"early_stopped", result.early_stopped},
  };
  write_text(out / "train_summary.json", summary.dump(2) + "\n");
}

EpochCallback log_epochs(const char* what) {
  return [what](const EpochRecord& r) {
    spdlog::info("{} epoch {} train_loss={:.6g} val_loss={:.6g} lr={:g}", what, r.epoch,
                 r.train_loss, r.val_loss, r.lr);
    return true;
  };
}

}  // namespace

ImageBuffer ape_to_gray(const ImageBuffer& ape, double scale) {
  const ImageBuffer unit = normalize(ape);
  const auto f = unit.f32();
  const std::size_t c = unit.channels();
  std::vector<float> gray(unit.height() * unit.width());
  for (std::size_t i = 0; i < gray.size(); ++i) {
    double sum = 0.0;
    for (std::size_t ch = 0; ch < c; ++ch) sum += f[i * c + ch];
    gray[i] = static_cast<float>(std::clamp(sum / static_cast<double>(c) * scale, 0.0, 1.0));
  }
  return denormalize(ImageBuffer::from_f32(unit.height(), unit.width(), 1, std::move(gray)));
}

ImageBuffer compose_panel(const ImageBuffer& lr, const ImageBuffer& bicubic,
                          const ImageBuffer& output, const ImageBuffer& truth,
                          const ImageBuffer& ape_gray) {
  constexpr std::size_t kGap = 4;
  const std::size_t h = truth.height(), w = truth.width();
  const std::vector<ImageBuffer> tiles{to_rgb(normalize(lr)), to_rgb(normalize(bicubic)),
                                       to_rgb(normalize(output)), to_rgb(normalize(truth)),
                                       to_rgb(normalize(ape_gray))};
  const std::size_t width = tiles.size() * w + (tiles.size() - 1) * kGap;
  std::vector<float> canvas(h * width * 3, 1.0f);
  for (std::size_t t = 0; t < tiles.size(); ++t) {
    const ImageBuffer& tile = tiles[t];
    const std::size_t x0 = t * (w + kGap);
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        // Nearest-neighbour sampling lets smaller tiles (the LR input) fill the slot.
        const std::size_t sy = y * tile.height() / h, sx = x * tile.width() / w;
        for (std::size_t ch = 0; ch < 3; ++ch) {
          canvas[(y * width + x0 + x) * 3 + ch] = tile.at(sy, sx, ch);
        }
      }
    }
  }
  return ImageBuffer::from_f32(h, width, 3, std::move(canvas));
}

void cmd_prepare(const RunConfig& c) {
  const fs::path out(c.out);
  const auto filter = *parse_resize_filter(c.prepare.resize_filter);
  const std::size_t lr = c.prepare.lr_size, hr = c.prepare.hr_size;

  std::vector<LabeledItem> items;
  std::vector<std::pair<std::string, std::size_t>> positives;  // (relative lr name, index)
  std::vector<std::string> errors;

  const auto materialize = [&](const ImageBuffer& source, Label label, std::size_t index) {
    const std::string name = image_name(index) + ".png";
    const ImageBuffer square = center_crop_square(to_rgb(normalize(source)));
    const std::string rel = std::string("classifier/") + to_string(label) + "/" + name;
    write_image(resize(square, lr, lr, filter), out / rel);
    items.push_back({rel, label});
    if (label == Label::kPositive) {
      const SrPair pair = prepare_sr_pair(square, lr, hr, filter);
      write_image(pair.lr, out / "sr" / "lr" / name);
      write_image(pair.hr, out / "sr" / "hr" / name);
      positives.emplace_back(name, index);
    }
  };

  if (c.prepare.mode == "synthetic") {
    const auto set = generate_synthetic_set(synthetic_params(c), c.prepare.count,
                                            c.prepare.positive_fraction);
    for (std::size_t i = 0; i < set.size(); ++i) {
      write_image(set[i].image,
                  out / "source" / to_string(set[i].label) / (image_name(i) + ".png"));
      materialize(set[i].image, set[i].label, i);
    }
  } else {
    const auto found = ingest_directory(c.prepare.source);
    for (std::size_t i = 0; i < found.size(); ++i) {
      try {
        materialize(load_image(found[i].path), found[i].label, i);
      } catch (const std::exception& e) {
        errors.push_back(found[i].path + ": " + e.what());
      }
    }
  }
  if (!errors.empty()) {
    for (const auto& e : errors) spdlog::error("prepare: {}", e);
    throw std::runtime_error(std::to_string(errors.size()) + " source image(s) failed");
  }
  if (items.empty()) throw std::runtime_error("prepare: no images");

  const DatasetManifest manifest =
      split_dataset(items, ratios(c.prepare.classifier_split), c.seed);
  write_manifest(manifest, out / "manifest.json");

  json summary = {{"seed", c.seed}, {"images", items.size()},
                  {"classifier", split_summary(manifest)}};
  if (!positives.empty()) {
    std::vector<LabeledItem> pos_items;
    for (const auto& [name, index] : positives) pos_items.push_back({name, Label::kPositive});
    const DatasetManifest sr_split = split_dataset(pos_items, ratios(c.prepare.sr_split), c.seed);
    std::vector<SrPairEntry> pairs;
    for (const auto& e : sr_split.entries) {
      pairs.push_back({"sr/lr/" + e.path, "sr/hr/" + e.path, e.split});
    }
    write_sr_manifest(pairs, out / "sr_manifest.json");
    summary["super_resolution"] = split_summary(sr_split);
  }
  write_text(out / "split_summary.json", summary.dump(2) + "\n");
  spdlog::info("prepare: {} images, manifest at {}", items.size(), (out / "manifest.json").string());
}

void cmd_train_classifier(const RunConfig& c) {
  const fs::path manifest_path(c.data.manifest);
  const DatasetManifest manifest = read_manifest(manifest_path);
  const auto train = load_classifier_split(manifest_path, manifest, Split::kTrain);
  const auto val = load_classifier_split(manifest_path, manifest, Split::kVal);
  spdlog::info("train-classifier: {} train / {} val images", train.size(), val.size());
  const TrainResult result = train_classifier(build_crack_classifier(), train, val,
                                              train_config(c, LossKind::kBce),
                                              log_epochs("classifier"));
  write_training_outputs(result, c.out);
}

void cmd_train_sr(const RunConfig& c) {
  const fs::path manifest_path(c.data.sr_manifest);
  const auto pairs = read_sr_manifest(manifest_path);
  const auto train = load_sr_split(manifest_path, pairs, Split::kTrain);
  const auto val = load_sr_split(manifest_path, pairs, Split::kVal);
  if (train.empty() || val.empty()) throw std::runtime_error("train-sr: empty train or val split");
  ModelArchitecture arch = build_espcnn(
      c.model.upscale, c.model.channels,
      c.model.final_activation == "relu" ? Activation::kRelu : Activation::kNone);
  arch.input_shape = train.front().lr.shape();
  spdlog::info("train-sr: {} train / {} val pairs", train.size(), val.size());
  const TrainResult result =
      train_sr(arch, train, val, train_config(c, LossKind::kMse), log_epochs("sr"));
  write_training_outputs(result, c.out);
}

void cmd_eval_classifier(const RunConfig& c) {
  const fs::path out(c.out);
  const Checkpoint ckpt = load_checkpoint(c.eval.checkpoint);
  const fs::path manifest_path(c.data.manifest);
  std::vector<std::string> paths;
  const auto test =
      load_classifier_split(manifest_path, read_manifest(manifest_path), Split::kTest, &paths);
  const ClassifierEvaluation eval = evaluate_classifier(ckpt, test, c.eval.threshold);

  json report = json::parse(classification_report_to_json(eval.report));
  report["threshold"] = c.eval.threshold;
  write_text(out / "metrics.json", report.dump(2) + "\n");

  std::ostringstream csv;
  csv << "path,label,score,predicted\n";
  for (std::size_t i = 0; i < test.size(); ++i) {
    csv << paths[i] << ',' << test[i].label << ',' << format_double(eval.scores[i]) << ','
        << (eval.scores[i] >= c.eval.threshold ? 1 : 0) << '\n';
  }
  write_text(out / "scores.csv", csv.str());
  spdlog::info("eval-classifier: accuracy {:.4f} on {} images", eval.report.accuracy, test.size());
}

void cmd_eval_sr(const RunConfig& c) {
  const fs::path out(c.out);
  const Checkpoint ckpt = load_checkpoint(c.eval.checkpoint);
  const fs::path manifest_path(c.data.sr_manifest);
  std::vector<std::string> ids;
  const auto test = load_sr_split(manifest_path, read_sr_manifest(manifest_path), Split::kTest, &ids);
  if (test.empty()) throw std::runtime_error("eval-sr: empty test split");

  SrMetricSettings settings;
  settings.psnr.fixed_range = c.eval.psnr_fixed_range;
  settings.ssim.mode = c.eval.ssim_mode == "windowed" ? SsimMode::kWindowed : SsimMode::kGlobal;
  settings.ssim.window = c.eval.ssim_window;
  std::string extractor = "seeded classifier trunk (untrained)";
  if (!c.eval.lpips_checkpoint.empty()) {
    const Checkpoint cls = load_checkpoint(c.eval.lpips_checkpoint);
    settings.lpips = classifier_trunk_lpips(cls.arch, cls.params);
    extractor = "classifier trunk from " + c.eval.lpips_checkpoint;
  } else {
    const auto arch = build_crack_classifier();
    settings.lpips = classifier_trunk_lpips(arch, init_params(arch, c.seed));
  }

  const SrEvaluation eval = evaluate_sr(ckpt, test, settings, ids);
  const std::vector<SrEvalReport> reports{eval.espcnn, eval.bicubic};
  write_text(out / "sr_metrics.csv", sr_reports_to_csv(reports));
  write_text(out / "espcnn.json", sr_report_to_json(eval.espcnn));
  write_text(out / "bicubic.json", sr_report_to_json(eval.bicubic));
  for (std::size_t i = 0; i < test.size(); ++i) {
    const ImageBuffer gray = ape_to_gray(eval.ape_maps[i], c.eval.ape_scale);
    write_image(gray, out / "ape" / (ids[i] + ".png"));
    if (i < c.eval.panels) {
      write_image(compose_panel(from_tensor(test[i].lr), eval.bicubic_outputs[i], eval.outputs[i],
                                from_tensor(test[i].hr), gray),
                  out / "panels" / (ids[i] + ".png"));
    }
  }
  const json summary = {
      {"pairs", test.size()},
      {"ape_scale", c.eval.ape_scale},
      {"lpips_extractor", extractor},
      {"psnr_gap_db", eval.espcnn.mean_psnr_db - eval.bicubic.mean_psnr_db},
  };
  write_text(out / "eval_summary.json", summary.dump(2) + "\n");
  spdlog::info("eval-sr: PSNR espcnn {:.3f} dB vs bicubic {:.3f} dB", eval.espcnn.mean_psnr_db,
               eval.bicubic.mean_psnr_db);
}

std::size_t cmd_infer(const RunConfig& c) {
  const fs::path out(c.out);
  const fs::path manifest_path(c.infer.manifest);
  const DatasetManifest manifest = read_manifest(manifest_path);
  std::vector<ManifestEntry> entries = manifest.entries;
  if (c.infer.split != "all") entries = manifest.select(*parse_split(c.infer.split));

  std::map<std::string, fs::path> truth_by_name;
  if (!c.infer.sr_manifest.empty()) {
    const fs::path sr_path(c.infer.sr_manifest);
    for (const auto& p : read_sr_manifest(sr_path)) {
      truth_by_name[fs::path(p.hr_path).stem().string()] = resolve(sr_path, p.hr_path);
    }
  }

  Checkpoint classifier = load_checkpoint(c.infer.classifier_checkpoint);
  Checkpoint sr = load_checkpoint(c.infer.sr_checkpoint);
  const Shape in_shape = classifier.arch.input_shape;
  const Shape hr_shape = infer_shapes(sr.arch, in_shape).back();

  std::vector<ImageBuffer> images;
  std::vector<std::optional<ImageBuffer>> truth;
  std::vector<std::string> load_errors;
  std::size_t skipped_truth = 0;
  for (const auto& e : entries) {
    std::string error;
    ImageBuffer img;
    try {
      img = to_rgb(normalize(load_image(resolve(manifest_path, e.path))));
      if (img.height() != in_shape[0] || img.width() != in_shape[1]) {
        img = bicubic_resize(img, in_shape[0], in_shape[1]);
      }
    } catch (const std::exception& ex) {
      error = ex.what();
      img = ImageBuffer::filled(1, 1, 3, 0.0f);  // rejected by the pipeline's shape check
    }
    images.push_back(std::move(img));
    load_errors.push_back(error);
    std::optional<ImageBuffer> hr;
    const auto it = truth_by_name.find(fs::path(e.path).stem().string());
    if (it != truth_by_name.end()) {
      hr = to_rgb(normalize(load_image(it->second)));
      // APE needs the reference at the network's output size.
      if (hr->height() != hr_shape[0] || hr->width() != hr_shape[1]) {
        hr.reset();
        ++skipped_truth;
      }
    }
    truth.push_back(std::move(hr));
  }
  if (skipped_truth > 0) {
    spdlog::warn("infer: {} reference image(s) are not {}x{}; no APE map for them", skipped_truth,
                 hr_shape[0], hr_shape[1]);
  }

  TwoStagePipeline pipeline(std::move(classifier), std::move(sr), c.infer.threshold);
  const auto results = pipeline.run(images, truth);

  std::ostringstream csv;
  csv << "index,path,score,decision,hr_path,ape_path,error\n";
  std::size_t errors = 0, resolved = 0;
  for (const auto& r : results) {
    const std::string stem = fs::path(entries[r.index].path).stem().string();
    std::string hr_path, ape_path, error = load_errors[r.index].empty() ? r.error : load_errors[r.index];
    if (r.decision == Decision::kSuperResolved) {
      ++resolved;
      hr_path = "hr/" + stem + ".png";
      write_image(*r.hr, out / hr_path);
      if (r.ape) {
        ape_path = "ape/" + stem + ".png";
        write_image(ape_to_gray(*r.ape, c.eval.ape_scale), out / ape_path);
      }
    }
    if (r.decision == Decision::kError) ++errors;
    std::replace(error.begin(), error.end(), ',', ';');
    std::replace(error.begin(), error.end(), '\n', ' ');
    csv << r.index << ',' << entries[r.index].path << ',' << format_double(r.score) << ','
        << to_string(r.decision) << ',' << hr_path << ',' << ape_path << ',' << error << '\n';
  }
  write_text(out / "results.csv", csv.str());
  const json summary = {
      {"images", results.size()},
      {"superresolved", resolved},
      {"filtered", results.size() - resolved - errors},
      {"errors", errors},
      {"classifier_invocations", pipeline.classifier_invocations()},
      {"sr_invocations", pipeline.sr_invocations()},
      {"threshold", c.infer.threshold},
  };
  write_text(out / "infer_summary.json", summary.dump(2) + "\n");
  spdlog::info("infer: {} images, {} super-resolved, {} errors", results.size(), resolved, errors);
  return errors;
}

int run_command(Command command, const RunConfig& config) {
  try {
    validate_config(config, command);
  } catch (const ConfigError& e) {
    spdlog::error("config: {}", e.what());
    return kExitUsage;
  }
  const fs::path out(config.out);
  try {
    fs::create_directories(out);
    OutputLock lock(out);
    write_text(out / kIncompleteMarker, std::string(to_string(command)) + "\n");
    write_text(out / kEffectiveConfig, config_to_json(config).dump(2) + "\n");
    std::size_t item_errors = 0;
    switch (command) {
      case Command::kPrepare: cmd_prepare(config); break;
      case Command::kTrainClassifier: cmd_train_classifier(config); break;
      case Command::kTrainSr: cmd_train_sr(config); break;
      case Command::kEvalClassifier: cmd_eval_classifier(config); break;
      case Command::kEvalSr: cmd_eval_sr(config); break;
      case Command::kInfer: item_errors = cmd_infer(config); break;
    }
    fs::remove(out / kIncompleteMarker);
    if (item_errors > 0) {
      spdlog::error("{}: {} input(s) failed; see results.csv", to_string(command), item_errors);
      return kExitFailure;
    }
    return kExitOk;
  } catch (const std::exception& e) {
    spdlog::error("{}: {}", to_string(command), e.what());
    return kExitFailure;
  }
}

}  // namespace crackres::cli
