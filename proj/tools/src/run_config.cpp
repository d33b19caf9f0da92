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

#include "crackres/cli/run_config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "crackres/dataset.hpp"
#include "crackres/resample.hpp"
#include "crackres/synthetic.hpp"

namespace crackres::cli {

using json = nlohmann::ordered_json;

const char* to_string(Command command) {
  switch (command) {
    case Command::kPrepare: return "prepare";
    case Command::kTrainClassifier: return "train-classifier";
    case Command::kTrainSr: return "train-sr";
    case Command::kEvalClassifier: return "eval-classifier";
    case Command::kEvalSr: return "eval-sr";
    case Command::kInfer: return "infer";
  }
  return "unknown";
}

std::optional<Command> parse_command(std::string_view name) {
  for (Command c : {Command::kPrepare, Command::kTrainClassifier, Command::kTrainSr,
                    Command::kEvalClassifier, Command::kEvalSr, Command::kInfer}) {
    if (name == to_string(c)) return c;
  }
  return std::nullopt;
}

namespace {

// Reads known keys of one JSON object and rejects the rest.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(where() + " must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!obj_.contains(key)) return;
    out = convert<T>(obj_.at(key), path_.empty() ? key : path_ + "." + key);
  }

  ObjectReader child(const char* key) {
    seen_.insert(key);
    static const json empty = json::object();
    return ObjectReader(obj_.contains(key) ? obj_.at(key) : empty,
                        path_.empty() ? key : path_ + "." + key);
  }

  void finish() const {
    for (const auto& item : obj_.items()) {
      if (!seen_.count(item.key())) {
        throw ConfigError("unknown key '" + (path_.empty() ? item.key() : path_ + "." + item.key()) +
                          "'");
      }
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config" : "'" + path_ + "'"; }

  template <typename T>
  static T convert(const json& v, const std::string& key) {
    const auto bad = [&](const char* want) {
      return ConfigError("'" + key + "' must be " + want + ", got " + v.dump());
    };
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw bad("a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw bad("a string");
      return v.get<std::string>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw bad("a number");
      return v.get<T>();
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned()) throw bad("a non-negative integer");
      return v.get<T>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw bad("an integer");
      return v.get<T>();
    } else {
      if (!v.is_array()) throw bad("an array");
      T out;
      for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(convert<typename T::value_type>(v[i], key + "[" + std::to_string(i) + "]"));
      }
      return out;
    }
  }

  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

RunConfig config_from_json(const json& doc) {
  RunConfig c;
  ObjectReader root(doc, "");
  if (!doc.contains("schema_version")) throw ConfigError("missing 'schema_version'");
  root.get("schema_version", c.schema_version);
  if (c.schema_version != kSchemaVersion) {
    throw ConfigError("unsupported schema_version " + std::to_string(c.schema_version) +
                      " (expected " + std::to_string(kSchemaVersion) + ")");
  }
  root.get("seed", c.seed);
  root.get("out", c.out);

  auto data = root.child("data");
  data.get("manifest", c.data.manifest);
  data.get("sr_manifest", c.data.sr_manifest);
  data.finish();

  auto prep = root.child("prepare");
  prep.get("mode", c.prepare.mode);
  prep.get("source", c.prepare.source);
  prep.get("count", c.prepare.count);
  prep.get("positive_fraction", c.prepare.positive_fraction);
  prep.get("lr_size", c.prepare.lr_size);
  prep.get("hr_size", c.prepare.hr_size);
  prep.get("resize_filter", c.prepare.resize_filter);
  prep.get("classifier_split", c.prepare.classifier_split);
  prep.get("sr_split", c.prepare.sr_split);
  prep.finish();

  auto syn = root.child("synthetic");
  syn.get("size", c.synthetic.size);
  syn.get("background", c.synthetic.background);
  syn.get("texture_scale", c.synthetic.texture_scale);
  syn.get("texture_amplitude", c.synthetic.texture_amplitude);
  syn.get("crack_count_min", c.synthetic.crack_count_min);
  syn.get("crack_count_max", c.synthetic.crack_count_max);
  syn.get("width_min", c.synthetic.width_min);
  syn.get("width_max", c.synthetic.width_max);
  syn.get("meander", c.synthetic.meander);
  syn.get("contrast", c.synthetic.contrast);
  syn.finish();

  auto train = root.child("train");
  train.get("max_epochs", c.train.max_epochs);
  train.get("patience", c.train.patience);
  train.get("batch_size", c.train.batch_size);
  train.get("lr_boundaries", c.train.lr_boundaries);
  train.get("lr_values", c.train.lr_values);
  train.get("adam_beta1", c.train.adam_beta1);
  train.get("adam_beta2", c.train.adam_beta2);
  train.get("adam_epsilon", c.train.adam_epsilon);
  train.finish();

  auto model = root.child("model");
  model.get("upscale", c.model.upscale);
  model.get("channels", c.model.channels);
  model.get("final_activation", c.model.final_activation);
  model.finish();

  auto eval = root.child("eval");
  eval.get("checkpoint", c.eval.checkpoint);
  eval.get("lpips_checkpoint", c.eval.lpips_checkpoint);
  eval.get("threshold", c.eval.threshold);
  eval.get("psnr_fixed_range", c.eval.psnr_fixed_range);
  eval.get("ssim_mode", c.eval.ssim_mode);
  eval.get("ssim_window", c.eval.ssim_window);
  eval.get("ape_scale", c.eval.ape_scale);
  eval.get("panels", c.eval.panels);
  eval.finish();

  auto infer = root.child("infer");
  infer.get("classifier_checkpoint", c.infer.classifier_checkpoint);
  infer.get("sr_checkpoint", c.infer.sr_checkpoint);
  infer.get("manifest", c.infer.manifest);
  infer.get("split", c.infer.split);
  infer.get("sr_manifest", c.infer.sr_manifest);
  infer.get("threshold", c.infer.threshold);
  infer.finish();

  root.finish();
  return c;
}

json config_to_json(const RunConfig& c) {
  return {
      {"schema_version", c.schema_version},
      {"seed", c.seed},
      {"out", c.out},
      {"data", {{"manifest", c.data.manifest}, {"sr_manifest", c.data.sr_manifest}}},
      {"prepare",
       {{"mode", c.prepare.mode},
        {"source", c.prepare.source},
        {"count", c.prepare.count},
        {"positive_fraction", c.prepare.positive_fraction},
        {"lr_size", c.prepare.lr_size},
        {"hr_size", c.prepare.hr_size},
        {"resize_filter", c.prepare.resize_filter},
        {"classifier_split", c.prepare.classifier_split},
        {"sr_split", c.prepare.sr_split}}},
      {"synthetic",
       {{"size", c.synthetic.size},
        {"background", c.synthetic.background},
        {"texture_scale", c.synthetic.texture_scale},
        {"texture_amplitude", c.synthetic.texture_amplitude},
        {"crack_count_min", c.synthetic.crack_count_min},
        {"crack_count_max", c.synthetic.crack_count_max},
        {"width_min", c.synthetic.width_min},
        {"width_max", c.synthetic.width_max},
        {"meander", c.synthetic.meander},
        {"contrast", c.synthetic.contrast}}},
      {"train",
       {{"max_epochs", c.train.max_epochs},
        {"patience", c.train.patience},
        {"batch_size", c.train.batch_size},
        {"lr_boundaries", c.train.lr_boundaries},
        {"lr_values", c.train.lr_values},
        {"adam_beta1", c.train.adam_beta1},
        {"adam_beta2", c.train.adam_beta2},
        {"adam_epsilon", c.train.adam_epsilon}}},
      {"model",
       {{"upscale", c.model.upscale},
        {"channels", c.model.channels},
        {"final_activation", c.model.final_activation}}},
      {"eval",
       {{"checkpoint", c.eval.checkpoint},
        {"lpips_checkpoint", c.eval.lpips_checkpoint},
        {"threshold", c.eval.threshold},
        {"psnr_fixed_range", c.eval.psnr_fixed_range},
        {"ssim_mode", c.eval.ssim_mode},
        {"ssim_window", c.eval.ssim_window},
        {"ape_scale", c.eval.ape_scale},
        {"panels", c.eval.panels}}},
      {"infer",
       {{"classifier_checkpoint", c.infer.classifier_checkpoint},
        {"sr_checkpoint", c.infer.sr_checkpoint},
        {"manifest", c.infer.manifest},
        {"split", c.infer.split},
        {"sr_manifest", c.infer.sr_manifest},
        {"threshold", c.infer.threshold}}},
  };
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  }
  std::string pointer = "/" + std::string(assignment.substr(0, eq));
  for (char& ch : pointer) ch = ch == '.' ? '/' : ch;
  const std::string text(assignment.substr(eq + 1));
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  doc[json::json_pointer(pointer)] = value;
}

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void require_file(const std::string& path, const char* key) {
  require(!path.empty(), std::string("'") + key + "' is required");
  require(std::filesystem::is_regular_file(path),
          std::string("'") + key + "' = " + path + " is not a readable file");
}

void require_dir(const std::string& path, const char* key) {
  require(!path.empty(), std::string("'") + key + "' is required");
  require(std::filesystem::is_directory(path),
          std::string("'") + key + "' = " + path + " is not a directory");
}

void check_split(const std::vector<double>& r, const char* key) {
  require(r.size() == 3, std::string("'") + key + "' must hold three ratios");
  require(std::abs(r[0] + r[1] + r[2] - 1.0) <= 1e-9 && r[0] >= 0 && r[1] >= 0 && r[2] >= 0,
          std::string("'") + key + "' ratios must be non-negative and sum to 1");
}

void check_train(const TrainSection& t) {
  require(t.max_epochs >= 1, "'train.max_epochs' must be >= 1");
  require(t.patience >= 1, "'train.patience' must be >= 1");
  require(t.batch_size >= 1, "'train.batch_size' must be >= 1");
  require(t.lr_values.size() == t.lr_boundaries.size() + 1,
          "'train.lr_values' must have one more entry than 'train.lr_boundaries'");
  for (std::size_t i = 1; i < t.lr_boundaries.size(); ++i) {
    require(t.lr_boundaries[i] > t.lr_boundaries[i - 1],
            "'train.lr_boundaries' must be strictly increasing");
  }
}

}  // namespace

void validate_config(const RunConfig& c, Command command) {
  require(!c.out.empty(), "'out' must not be empty");
  switch (command) {
    case Command::kPrepare: {
      require(c.prepare.mode == "synthetic" || c.prepare.mode == "directory",
              "'prepare.mode' must be synthetic or directory");
      if (c.prepare.mode == "directory") require_dir(c.prepare.source, "prepare.source");
      require(c.prepare.count >= 1, "'prepare.count' must be >= 1");
      require(c.prepare.positive_fraction >= 0.0 && c.prepare.positive_fraction <= 1.0,
              "'prepare.positive_fraction' must lie in [0, 1]");
      require(c.prepare.lr_size >= 1 && c.prepare.hr_size % c.prepare.lr_size == 0,
              "'prepare.hr_size' must be an integer multiple of 'prepare.lr_size'");
      require(parse_resize_filter(c.prepare.resize_filter).has_value(),
              "'prepare.resize_filter' must be bicubic, bicubic_antialias or area");
      check_split(c.prepare.classifier_split, "prepare.classifier_split");
      check_split(c.prepare.sr_split, "prepare.sr_split");
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
      try {
        p.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      break;
    }
    case Command::kTrainClassifier:
      require_file(c.data.manifest, "data.manifest");
      check_train(c.train);
      break;
    case Command::kTrainSr:
      require_file(c.data.sr_manifest, "data.sr_manifest");
      check_train(c.train);
      require(c.model.upscale >= 1 && c.model.channels >= 1,
              "'model.upscale' and 'model.channels' must be >= 1");
      require(c.model.final_activation == "none" || c.model.final_activation == "relu",
              "'model.final_activation' must be none or relu");
      break;
    case Command::kEvalClassifier:
      require_dir(c.eval.checkpoint, "eval.checkpoint");
      require_file(c.data.manifest, "data.manifest");
      require(c.eval.threshold > 0.0 && c.eval.threshold < 1.0,
              "'eval.threshold' must lie in (0, 1)");
      break;
    case Command::kEvalSr:
      require_dir(c.eval.checkpoint, "eval.checkpoint");
      require_file(c.data.sr_manifest, "data.sr_manifest");
      if (!c.eval.lpips_checkpoint.empty()) {
        require_dir(c.eval.lpips_checkpoint, "eval.lpips_checkpoint");
      }
      require(c.eval.ssim_mode == "global" || c.eval.ssim_mode == "windowed",
              "'eval.ssim_mode' must be global or windowed");
      require(c.eval.ssim_window >= 1, "'eval.ssim_window' must be >= 1");
      require(c.eval.ape_scale > 0.0, "'eval.ape_scale' must be > 0");
      break;
    case Command::kInfer:
      require_dir(c.infer.classifier_checkpoint, "infer.classifier_checkpoint");
      require_dir(c.infer.sr_checkpoint, "infer.sr_checkpoint");
      require_file(c.infer.manifest, "infer.manifest");
      if (!c.infer.sr_manifest.empty()) require_file(c.infer.sr_manifest, "infer.sr_manifest");
      require(c.infer.split == "all" || parse_split(c.infer.split).has_value(),
              "'infer.split' must be train, val, test or all");
      require(c.infer.threshold > 0.0 && c.infer.threshold < 1.0,
              "'infer.threshold' must lie in (0, 1)");
      break;
  }
}

}  // namespace crackres::cli
