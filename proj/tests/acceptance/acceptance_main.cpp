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

// Acceptance gate. Prints one PASS/FAIL line per criterion and exits non-zero
// if any fails. Criteria can be selected by number on the command line.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "crackres/checkpoint.hpp"
#include "crackres/cli/commands.hpp"
#include "crackres/cli/run_config.hpp"
#include "crackres/dataset.hpp"
#include "crackres/gradcheck.hpp"
#include "crackres/metrics.hpp"
#include "crackres/models.hpp"
#include "crackres/ops.hpp"
#include "crackres/pipeline.hpp"
#include "crackres/resample.hpp"
#include "crackres/synthetic.hpp"
#include "crackres/tape.hpp"
#include "oracles.hpp"

namespace crackres {
namespace {

namespace fs = std::filesystem;
using testing::random_tensor;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  // Records a failed check; the first few messages are kept for the report.
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (pass || detail.size() < 400) detail += (detail.empty() ? "" : "; ") + what;
    pass = false;
  }
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// Models trained by criteria 7 and 8, reused by 8 (LPIPS trunk) and 10.
std::optional<Checkpoint> g_classifier;
std::optional<Checkpoint> g_espcnn;

// 1 ------------------------------------------------------------------------

Outcome parameter_counts() {
  Outcome o;
  const std::size_t cls = count_params(build_crack_classifier());
  const std::size_t sr = count_params(build_espcnn(4, 3));
  o.expect(cls == 6177, fmt("classifier has %zu params, expected 6177", cls));
  o.expect(sr == 83376, fmt("espcnn has %zu params, expected 83376", sr));
  if (o.pass) o.detail = fmt("classifier %zu, espcnn(4,3) %zu", cls, sr);
  return o;
}

// 2 ------------------------------------------------------------------------

Outcome report_reproduction() {
  Outcome o;
  const ConfusionMatrix cm{.tp = 1497, .tn = 1463, .fp = 15, .fn = 25};
  const ClassificationReport r = classification_report(cm);
  const struct {
    const char* name;
    double got, want;
  } rows[] = {
      {"accuracy", r.accuracy, 98.667},
      {"positive precision", r.positive.precision, 99.01},
      {"positive recall", r.positive.recall, 98.36},
      {"positive f1", r.positive.f1, 98.69},
      {"negative precision", r.negative.precision, 98.32},
      {"negative recall", r.negative.recall, 98.99},
      {"negative f1", r.negative.f1, 98.65},
      {"macro precision", r.macro.precision, 98.667},
      {"macro recall", r.macro.recall, 98.667},
      {"macro f1", r.macro.f1, 98.667},
  };
  double worst = 0;
  for (const auto& row : rows) {
    const double diff = std::fabs(100.0 * row.got - row.want);
    worst = std::max(worst, diff);
    o.expect(diff <= 0.01, fmt("%s %.4f%% vs %.3f%%", row.name, 100.0 * row.got, row.want));
  }
  if (o.pass) o.detail = fmt("10 figures, worst deviation %.4f pp", worst);
  return o;
}

// 3 ------------------------------------------------------------------------

using Tape = ad::Tape<double>;
using Var = ad::Var;

// Values in +-[0.1, 1], clear of the relu kink.
Tensor64 off_zero(const Shape& shape, Rng& rng) {
  Tensor64 t(shape);
  for (auto& v : t.values()) v = (rng.uniform() < 0.5 ? -1 : 1) * rng.uniform(0.1, 1.0);
  return t;
}

Var reduce(Tape& tape, Var v, std::uint64_t seed) {
  Rng rng(seed);
  return ad::weighted_sum(tape, v, random_tensor<double>(tape.value(v).shape(), rng));
}

Tensor64 pre_activation(const std::vector<Tensor64>& p) {
  return ops::conv2d(p[0], p[1], p[2], Padding::kSame);
}

GradCheckResult model_check(const ModelArchitecture& arch, const Shape& in, bool bce,
                            std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Tensor64> point{random_tensor<double>(in, rng, 0, 1)};
  for (const Shape& s : param_shapes(arch)) {
    point.push_back(random_tensor<double>(s, rng, -0.5, 0.5));
  }
  const Shape item(in.begin() + 1, in.end());
  const Tensor64 target = bce ? Tensor64({in[0], 1}, 1.0)
                              : random_tensor<double>(infer_shapes(arch, item).back(), rng, 0, 1);
  GradCheckOptions options;
  options.max_coordinates_per_input = 24;
  options.seed = seed;
  return grad_check(
      [&](Tape& t, std::span<const Var> v) {
        const Var out = forward_taped(t, arch, v.subspan(1), v[0]);
        if (bce) return ad::bce_loss(t, out, target);
        return ad::mse_loss(t, out, target.reshaped(t.value(out).shape()));
      },
      point, options);
}

Outcome gradient_suite() {
  Outcome o;
  Rng rng(31);
  std::vector<std::pair<std::string, GradCheckResult>> results;
  const auto run = [&](const std::string& name, const GraphFn& fn, std::vector<Tensor64> point) {
    results.emplace_back(name, grad_check(fn, point));
  };

  for (Padding padding : {Padding::kSame, Padding::kValid}) {
    run(std::string("conv2d ") + to_string(padding),
        [padding](Tape& t, std::span<const Var> in) {
          return reduce(t, ad::conv2d(t, in[0], in[1], in[2], padding), 1);
        },
        {random_tensor<double>({5, 4, 2}, rng), random_tensor<double>({3, 3, 2, 3}, rng),
         random_tensor<double>({3}, rng)});
  }
  run("conv2d batched",
      [](Tape& t, std::span<const Var> in) {
        return reduce(t, ad::conv2d(t, in[0], in[1], in[2], Padding::kSame), 2);
      },
      {random_tensor<double>({2, 3, 3, 2}, rng), random_tensor<double>({3, 3, 2, 2}, rng),
       random_tensor<double>({2}, rng)});
  run("relu", [](Tape& t, std::span<const Var> in) { return reduce(t, ad::relu(t, in[0]), 3); },
      {off_zero({4, 4, 2}, rng)});
  run("sigmoid",
      [](Tape& t, std::span<const Var> in) { return reduce(t, ad::sigmoid(t, in[0]), 4); },
      {random_tensor<double>({10}, rng, -4, 4)});
  run("global_avg_pool",
      [](Tape& t, std::span<const Var> in) {
        return reduce(t, ad::global_avg_pool(t, in[0]), 5);
      },
      {random_tensor<double>({3, 5, 4}, rng)});
  run("flatten",
      [](Tape& t, std::span<const Var> in) { return reduce(t, ad::flatten(t, in[0]), 6); },
      {random_tensor<double>({2, 3, 2, 2}, rng)});
  run("dense",
      [](Tape& t, std::span<const Var> in) {
        return reduce(t, ad::dense(t, in[0], in[1], in[2]), 7);
      },
      {random_tensor<double>({3, 5}, rng), random_tensor<double>({5, 2}, rng),
       random_tensor<double>({2}, rng)});
  for (std::size_t r : {1, 2, 4}) {
    run(fmt("pixel_shuffle r=%zu", r),
        [r](Tape& t, std::span<const Var> in) {
          return reduce(t, ad::pixel_shuffle(t, in[0], r), 8);
        },
        {random_tensor<double>({3, 2, 2 * r * r}, rng)});
  }
  const Tensor64 labels({5}, {1, 0, 1, 1, 0});
  run("bce_loss",
      [&labels](Tape& t, std::span<const Var> in) { return ad::bce_loss(t, in[0], labels); },
      {random_tensor<double>({5}, rng, 0.05, 0.95)});
  const Tensor64 targets = random_tensor<double>({3, 4}, rng);
  run("mse_loss",
      [&targets](Tape& t, std::span<const Var> in) { return ad::mse_loss(t, in[0], targets); },
      {random_tensor<double>({3, 4}, rng)});
  run("weighted_sum", [](Tape& t, std::span<const Var> in) { return reduce(t, in[0], 9); },
      {random_tensor<double>({7}, rng)});

  // conv -> relu, with a seed search until no pre-activation is near the kink.
  for (std::uint64_t seed = 40;; ++seed) {
    Rng local(seed);
    std::vector<Tensor64> p{random_tensor<double>({4, 4, 2}, local),
                            random_tensor<double>({3, 3, 2, 2}, local),
                            random_tensor<double>({2}, local)};
    const Tensor64 z = pre_activation(p);
    bool clear = true;
    for (double v : z.values()) clear = clear && std::fabs(v) > 1e-2;
    if (!clear) continue;
    run("conv2d+relu",
        [](Tape& t, std::span<const Var> in) {
          return reduce(t, ad::relu(t, ad::conv2d(t, in[0], in[1], in[2], Padding::kSame)), 10);
        },
        p);
    break;
  }

  results.emplace_back("crack classifier + bce",
                       model_check(build_crack_classifier(), {2, 6, 6, 3}, true, 21));
  results.emplace_back("espcnn(4,3) + mse", model_check(build_espcnn(4, 3), {1, 4, 4, 3}, false, 22));

  double worst = 0;
  for (const auto& [name, r] : results) {
    worst = std::max(worst, r.max_rel_error);
    o.expect(r.max_rel_error < 1e-4,
             fmt("%s rel error %.3g (input %zu index %zu)", name.c_str(), r.max_rel_error,
                 r.worst_input, r.worst_index));
  }
  if (o.pass) o.detail = fmt("%zu checks, worst rel error %.3g", results.size(), worst);
  return o;
}

// 4 ------------------------------------------------------------------------

Outcome structural_suite() {
  Outcome o;
  Rng rng(41);
  for (std::size_t r : {1, 2, 4}) {
    const Tensor x = random_tensor({5, 3, 3 * r * r}, rng);
    const Tensor y = ops::pixel_shuffle(x, r);
    o.expect(y.shape() == (Shape{5 * r, 3 * r, 3}), fmt("pixel_shuffle r=%zu shape", r));
    o.expect(ops::pixel_unshuffle(y, r) == x, fmt("pixel_shuffle r=%zu not invertible", r));
    const Tensor z = random_tensor({4 * r, 2 * r, 3}, rng);
    o.expect(ops::pixel_shuffle(ops::pixel_unshuffle(z, r), r) == z,
             fmt("pixel_unshuffle r=%zu not invertible", r));
  }

  double worst = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 1 + 2 * rng.index(3);
    const std::size_t h = k + rng.index(6), w = k + rng.index(6);
    const std::size_t cin = 1 + rng.index(4), cout = 1 + rng.index(5);
    const bool same = rng.uniform() < 0.5;
    const Tensor64 x = random_tensor<double>({h, w, cin}, rng);
    const Tensor64 kern = random_tensor<double>({k, k, cin, cout}, rng);
    const Tensor64 b = random_tensor<double>({cout}, rng);
    std::size_t oh = 0, ow = 0;
    const auto expect = testing::naive_conv2d(x.values(), h, w, cin, kern.values(), k, cout,
                                              b.values(), same, oh, ow);
    const Tensor64 y = ops::conv2d(x, kern, b, same ? Padding::kSame : Padding::kValid);
    if (y.shape() != Shape{oh, ow, cout}) {
      o.expect(false, fmt("conv trial %d shape", trial));
      continue;
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
      worst = std::max(worst, testing::rel_error(y[i], expect[i]));
    }
  }
  o.expect(worst < 1e-6, fmt("conv2d vs direct oracle rel error %.3g", worst));

  const fs::path dir = fs::temp_directory_path() / "crackres_acceptance_ckpt";
  for (const auto& arch : {build_crack_classifier(), build_espcnn(4, 3)}) {
    fs::remove_all(dir);
    Checkpoint c{arch, init_params(arch, 43), {}};
    c.metadata.seed = 43;
    c.metadata.epoch = 12;
    c.metadata.val_loss = 0.1234567890123;
    save_checkpoint(c, dir);
    const Checkpoint back = load_checkpoint(dir);
    bool same = back.arch == c.arch && back.metadata == c.metadata &&
                back.params.size() == c.params.size();
    for (std::size_t i = 0; same && i < c.params.size(); ++i) {
      same = back.params[i].shape() == c.params[i].shape() &&
             std::memcmp(back.params[i].data().data(), c.params[i].data().data(),
                         c.params[i].size() * sizeof(float)) == 0;
    }
    o.expect(same, "checkpoint roundtrip differs for " + arch.name);
  }
  fs::remove_all(dir);
  if (o.pass) {
    o.detail = fmt("shuffle r=1,2,4 exact; 50 conv cases worst %.3g; checkpoints bit-exact", worst);
  }
  return o;
}

// 5 ------------------------------------------------------------------------

ImageBuffer ramp_image(std::size_t h, std::size_t w, double a, double bx, double by) {
  std::vector<float> px(h * w * 3);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < 3; ++c) {
        px[(y * w + x) * 3 + c] = static_cast<float>(a + bx * x + by * y + 0.01 * c);
      }
  return ImageBuffer::from_f32(h, w, 3, std::move(px));
}

Outcome resampling_suite() {
  Outcome o;
  Rng rng(51);
  double pou = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto w = keys_weights(rng.uniform());
    pou = std::max(pou, std::fabs(w[0] + w[1] + w[2] + w[3] - 1.0));
  }
  o.expect(pou <= 1e-9, fmt("partition of unity off by %.3g", pou));

  double constant = 0;
  for (const auto& [h, w, oh, ow] : std::vector<std::array<std::size_t, 4>>{
           {8, 8, 32, 32}, {32, 32, 8, 8}, {7, 13, 21, 5}, {227, 227, 32, 32}}) {
    const ImageBuffer img = ImageBuffer::filled(h, w, 3, 0.37f);
    const ImageBuffer out = bicubic_resize(img, oh, ow);
    for (float v : out.f32()) constant = std::max(constant, std::fabs(v - 0.37));
  }
  o.expect(constant <= 1e-5, fmt("constant reproduction off by %.3g", constant));

  // Linear ramps, 4x up; clamp-to-edge only bends the outer two source pixels.
  double linear = 0;
  const std::size_t n = 16, r = 4, margin = 2 * r + r;
  const ImageBuffer ramp = ramp_image(n, n, 0.1, 0.03, 0.02);
  const ImageBuffer up = bicubic_resize(ramp, n * r, n * r);
  const auto px = up.f32();
  for (std::size_t y = margin; y < n * r - margin; ++y)
    for (std::size_t x = margin; x < n * r - margin; ++x)
      for (std::size_t c = 0; c < 3; ++c) {
        const double sx = (x + 0.5) / r - 0.5, sy = (y + 0.5) / r - 0.5;
        const double want = 0.1 + 0.03 * sx + 0.02 * sy + 0.01 * c;
        linear = std::max(linear, std::fabs(px[(y * n * r + x) * 3 + c] - want));
      }
  o.expect(linear <= 1e-5, fmt("linear reproduction off by %.3g", linear));

  double identity = 0;
  for (const auto& [h, w] : std::vector<std::array<std::size_t, 2>>{{32, 32}, {5, 9}, {128, 64}}) {
    const ImageBuffer img = from_tensor(random_tensor({h, w, 3}, rng, 0, 1));
    const ImageBuffer same = bicubic_resize(img, h, w);
    const auto a = img.f32(), b = same.f32();
    for (std::size_t i = 0; i < a.size(); ++i) identity = std::max<double>(identity, std::fabs(a[i] - b[i]));
  }
  o.expect(identity <= 1e-6, fmt("same-size resize off by %.3g", identity));
  if (o.pass) {
    o.detail = fmt("unity %.1e, constant %.1e, linear %.1e, identity %.1e", pou, constant, linear,
                   identity);
  }
  return o;
}

// 6 ------------------------------------------------------------------------

Outcome metric_identities() {
  Outcome o;
  Rng rng(61);
  const ModelArchitecture cls = build_crack_classifier();
  const LpipsConfig lp = classifier_trunk_lpips(
      cls, g_classifier ? g_classifier->params : init_params(cls, 5));
  SsimParams windowed;
  windowed.mode = SsimMode::kWindowed;

  double ssim_self = 0, sym_ssim = 0, sym_lpips = 0, lpips_self = 0, ape_self = 0;
  bool inf_ok = true;
  for (int i = 0; i < 20; ++i) {
    const ImageBuffer a = from_tensor(random_tensor({24, 24, 3}, rng, 0, 1));
    const ImageBuffer b = from_tensor(random_tensor({24, 24, 3}, rng, 0, 1));
    ssim_self = std::max({ssim_self, std::fabs(ssim(a, a) - 1), std::fabs(ssim(a, a, windowed) - 1)});
    lpips_self = std::max(lpips_self, std::fabs(lpips(a, a, lp)));
    const ImageBuffer ape = ape_map(a, a);
    for (float v : ape.f32()) ape_self = std::max<double>(ape_self, std::fabs(v));
    const double p = psnr(a, a);
    inf_ok = inf_ok && std::isinf(p) && p > 0;
    sym_ssim = std::max({sym_ssim, std::fabs(ssim(a, b) - ssim(b, a)),
                         std::fabs(ssim(a, b, windowed) - ssim(b, a, windowed))});
    sym_lpips = std::max(sym_lpips, std::fabs(lpips(a, b, lp) - lpips(b, a, lp)));
  }
  o.expect(ssim_self <= 1e-9, fmt("ssim(x,x) off by %.3g", ssim_self));
  o.expect(lpips_self == 0, fmt("lpips(x,x) = %.3g", lpips_self));
  o.expect(ape_self == 0, fmt("ape_map(x,x) max %.3g", ape_self));
  o.expect(inf_ok, "psnr(x,x) is not +inf");
  o.expect(sym_ssim <= 1e-9, fmt("ssim asymmetry %.3g", sym_ssim));
  o.expect(sym_lpips <= 1e-9, fmt("lpips asymmetry %.3g", sym_lpips));

  // Doubling the MSE at a fixed range costs 10 log10(2) dB.
  double drop_err = 0;
  PsnrOptions fixed;
  fixed.fixed_range = true;
  for (int i = 0; i < 20; ++i) {
    std::vector<double> x(300), y1(300), y2(300);
    for (std::size_t k = 0; k < x.size(); ++k) {
      x[k] = rng.uniform(0.2, 0.8);
      const double d = rng.uniform(-0.05, 0.05);
      y1[k] = x[k] + d;
      y2[k] = x[k] + std::sqrt(2.0) * d;
    }
    const double drop = psnr(x, y1, fixed) - psnr(x, y2, fixed);
    drop_err = std::max(drop_err, std::fabs(drop - 10 * std::log10(2.0)));
  }
  o.expect(drop_err <= 1e-6, fmt("psnr drop off by %.3g dB", drop_err));
  if (o.pass) {
    o.detail = fmt("ssim sym %.1e, lpips sym %.1e, psnr drop err %.1e", sym_ssim, sym_lpips,
                   drop_err);
  }
  return o;
}

// 7 ------------------------------------------------------------------------

Outcome desk_classification() {
  Outcome o;
  SyntheticCrackParams params;
  params.seed = 7;
  const auto set = generate_synthetic_set(params, 400, 0.5);
  std::vector<LabeledItem> items;
  for (std::size_t i = 0; i < set.size(); ++i) items.push_back({std::to_string(i), set[i].label});
  const DatasetManifest split = split_dataset(items, kClassifierSplit, 11);
  std::vector<ClassifierSample> train, val, test;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const ClassifierSample s{to_tensor(bicubic_resize(set[i].image, 32, 32)),
                             set[i].label == Label::kPositive ? 1 : 0};
    const Split where = split.entries[i].split;
    (where == Split::kTrain ? train : where == Split::kVal ? val : test).push_back(s);
  }
  o.expect(train.size() == 196 && val.size() == 84 && test.size() == 120,
           fmt("split %zu/%zu/%zu, expected 196/84/120", train.size(), val.size(), test.size()));

  TrainConfig config;
  config.max_epochs = 200;
  config.batch_size = 4;
  config.schedule = {{100}, {1e-4, 1e-5}};
  config.seed = 3;
  const TrainResult result = train_classifier(build_crack_classifier(), train, val, config);
  const ClassifierEvaluation eval = evaluate_classifier(result.checkpoint, test);
  g_classifier = result.checkpoint;
  o.expect(result.history.size() <= 200, fmt("%zu epochs", result.history.size()));
  o.expect(eval.report.accuracy >= 0.95, fmt("test accuracy %.2f%%", 100 * eval.report.accuracy));
  o.detail = fmt("test accuracy %.2f%% after %zu epochs (best %lld)%s%s",
                 100 * eval.report.accuracy, result.history.size(),
                 static_cast<long long>(result.checkpoint.metadata.epoch),
                 o.pass ? "" : "; ", o.pass ? "" : o.detail.c_str());
  return o;
}

// 8 ------------------------------------------------------------------------

std::vector<SrSample> sr_pairs(std::uint64_t seed, std::size_t n) {
  SyntheticCrackParams params;
  params.seed = seed;
  std::vector<SrSample> out;
  for (const auto& s : generate_synthetic_set(params, n, 1.0)) {
    const SrPair pair = prepare_sr_pair(s.image, 32, 128);
    out.push_back({to_tensor(pair.lr), to_tensor(pair.hr)});
  }
  return out;
}

Outcome desk_super_resolution() {
  Outcome o;
  const auto train = sr_pairs(101, 256), val = sr_pairs(102, 64), test = sr_pairs(103, 64);
  TrainConfig config;
  config.max_epochs = 60;
  config.batch_size = 4;
  config.schedule = {{100}, {1e-4, 1e-5}};
  config.seed = 3;
  config.loss = LossKind::kMse;
  const TrainResult result = train_sr(build_espcnn(4, 3), train, val, config);
  g_espcnn = result.checkpoint;

  const ModelArchitecture cls = build_crack_classifier();
  SrMetricSettings settings;
  settings.lpips = classifier_trunk_lpips(cls, g_classifier ? g_classifier->params
                                                            : init_params(cls, 5));
  const SrEvaluation eval = evaluate_sr(result.checkpoint, test, settings);
  const double gap = eval.espcnn.mean_psnr_db - eval.bicubic.mean_psnr_db;
  o.expect(eval.espcnn.finite_psnr_count == test.size() &&
               eval.bicubic.finite_psnr_count == test.size(),
           "non-finite PSNR on held-out pairs");
  o.expect(gap >= 0.3, fmt("PSNR gap %.3f dB", gap));
  o.detail = fmt("PSNR espcnn %.3f dB vs bicubic %.3f dB (gap %+.3f); SSIM %.4f vs %.4f; "
                 "%zu epochs%s%s",
                 eval.espcnn.mean_psnr_db, eval.bicubic.mean_psnr_db, gap, eval.espcnn.mean_ssim,
                 eval.bicubic.mean_ssim, result.history.size(), o.pass ? "" : "; ",
                 o.pass ? "" : o.detail.c_str());
  return o;
}

// 9 ------------------------------------------------------------------------

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "crackres_acceptance_determinism";
  fs::remove_all(root);
  cli::RunConfig prep;
  prep.seed = 9;
  prep.out = (root / "data").string();
  prep.prepare.count = 60;
  prep.prepare.lr_size = 16;
  prep.prepare.hr_size = 64;
  prep.synthetic.size = 64;
  o.expect(cli::run_command(cli::Command::kPrepare, prep) == cli::kExitOk, "prepare failed");

  const auto train_twice = [&](cli::Command command, const std::string& name) {
    cli::RunConfig c = prep;
    c.data.manifest = (root / "data" / "manifest.json").string();
    c.data.sr_manifest = (root / "data" / "sr_manifest.json").string();
    c.train.max_epochs = 4;
    c.train.batch_size = 4;
    for (const char* run : {"a", "b"}) {
      c.out = (root / (name + "_" + run)).string();
      o.expect(cli::run_command(command, c) == cli::kExitOk, name + " run failed");
    }
    for (const char* file : {"checkpoint/weights.bin", "checkpoint/manifest.json", "history.csv"}) {
      const std::string a = slurp(root / (name + "_a") / file);
      const std::string b = slurp(root / (name + "_b") / file);
      o.expect(!a.empty() && a == b, name + " " + file + " differs between runs");
    }
  };
  if (o.pass) train_twice(cli::Command::kTrainClassifier, "classifier");
  if (o.pass) train_twice(cli::Command::kTrainSr, "espcnn");
  if (!std::getenv("CRACKRES_KEEP_TMP")) fs::remove_all(root);
  if (o.pass) o.detail = "weights.bin, manifest.json and history.csv identical for both models";
  return o;
}

// 10 -----------------------------------------------------------------------

Outcome desk_classification();

Outcome gate_economics() {
  // Gate on a trained classifier so both decisions occur.
  if (!g_classifier) desk_classification();
  Outcome o;
  SyntheticCrackParams params;
  params.seed = 1001;
  const auto set = generate_synthetic_set(params, 100, 0.5);
  std::size_t positives = 0;
  std::vector<ImageBuffer> images;
  for (const auto& s : set) {
    positives += s.label == Label::kPositive;
    images.push_back(bicubic_resize(s.image, 32, 32));
  }
  o.expect(positives == 50, fmt("%zu positive images, expected 50", positives));

  const ModelArchitecture cls = build_crack_classifier(), sr = build_espcnn(4, 3);
  TwoStagePipeline pipeline(g_classifier ? *g_classifier : Checkpoint{cls, init_params(cls, 5), {}},
                            g_espcnn ? *g_espcnn : Checkpoint{sr, init_params(sr, 6), {}});
  const auto results = pipeline.run(images);
  std::size_t decided_positive = 0, errors = 0, correct = 0;
  for (const auto& r : results) {
    decided_positive += r.decision == Decision::kSuperResolved;
    errors += r.decision == Decision::kError;
    correct += (r.decision == Decision::kSuperResolved) == (set[r.index].label == Label::kPositive);
  }
  o.expect(errors == 0, fmt("%zu pipeline errors", errors));
  o.expect(pipeline.classifier_invocations() == images.size(),
           fmt("classifier ran %zu times", pipeline.classifier_invocations()));
  o.expect(pipeline.sr_invocations() == decided_positive,
           fmt("SR ran %zu times for %zu positive decisions", pipeline.sr_invocations(),
               decided_positive));
  o.detail = fmt("%zu positive decisions, %zu SR invocations, %zu/100 gate decisions correct%s%s",
                 decided_positive, pipeline.sr_invocations(), correct, o.pass ? "" : "; ",
                 o.pass ? "" : o.detail.c_str());
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace crackres

int main(int argc, char** argv) {
  using namespace crackres;
  const std::vector<Criterion> criteria = {
      {1, "parameter counts", 1, parameter_counts},
      {2, "classification report", 1, report_reproduction},
      {3, "gradient suite", 60, gradient_suite},
      {4, "structural suite", 0, structural_suite},
      {5, "resampling suite", 0, resampling_suite},
      {6, "metric identities", 0, metric_identities},
      {7, "desk-scale classification", 300, desk_classification},
      {8, "desk-scale super-resolution", 900, desk_super_resolution},
      {9, "determinism", 0, determinism},
      {10, "gate economics", 0, gate_economics},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0, ran = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    ++ran;
    const auto start = Clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    if (c.budget_seconds > 0 && seconds >= c.budget_seconds) {
      outcome.expect(false, fmt("took %.1f s, budget %.0f s", seconds, c.budget_seconds));
    }
    std::printf("%s  %2d  %-28s %s (%.2f s)\n", outcome.pass ? "PASS" : "FAIL", c.id, c.name,
                outcome.detail.c_str(), seconds);
    std::fflush(stdout);
    failed += !outcome.pass;
  }
  std::printf("acceptance: %d/%d passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
