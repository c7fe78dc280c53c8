// Copyright 2026 The mraug Authors.
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

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

#include "mraug/dataset.hpp"
#include "mraug/phantom.hpp"
#include "mraug/pipeline.hpp"
#include "mraug/recon.hpp"

// Run configuration: one flat JSON object. Values are resolved in the order
// defaults, config file, MRAUG_<KEY> environment variables, command-line
// flags; later sources win.

namespace mraug {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ReconMethod { kZeroFilled, kTv, kBoth };
enum class ReconSource { kDataset, kRun };

struct RunConfig {
  std::string dataset_dir = "data";
  std::string output_dir = "aug";
  std::string recon_dir = "recon";
  std::string results_file = "results.tsv";
  std::uint64_t seed = 0;
  Mode mode = Mode::kMRAugment;
  std::uint64_t epoch_first = 50;
  std::uint64_t epoch_last = 50;
  AugmentConfig augment{};
  DatasetParams dataset{};
  ReconSource recon_source = ReconSource::kDataset;
  ReconMethod recon_method = ReconMethod::kBoth;
  TvParams tv{.lambda = 1e-2, .iters = 100, .step = 0.5, .mu_relative = 1e-6, .max_halvings = 60};
  unsigned noise_stride = 4;
  unsigned workers = 1;

  void validate() const {
    try {
      augment.validate();
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
    if (epoch_first > epoch_last) throw ConfigError("epoch_first must not exceed epoch_last");
    if (dataset.height < 32 || dataset.width < 32) throw ConfigError("height and width must be >= 32");
    if (dataset.coils == 0) throw ConfigError("coils must be >= 1");
    if (dataset.sigma < 0.0) throw ConfigError("sigma must be non-negative");
    if (tv.iters < 1) throw ConfigError("tv_iters must be >= 1");
    if (!(tv.step > 0.0)) throw ConfigError("tv_step must be positive");
    if (tv.lambda < 0.0) throw ConfigError("tv_lambda must be non-negative");
    if (noise_stride < 1) throw ConfigError("noise_stride must be >= 1");
    if (workers < 1) throw ConfigError("workers must be >= 1");
  }
};

namespace detail {

template <typename T>
T get_as(const json& v, const std::string& key) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("");
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0)) {
        throw ConfigError("");
      }
    } else if constexpr (std::is_arithmetic_v<T>) {
      if (!v.is_number()) throw ConfigError("");
    } else {
      if (!v.is_string()) throw ConfigError("");
    }
    return v.get<T>();
  } catch (const std::exception&) {
    std::string kind = "a string";
    if constexpr (std::is_same_v<T, bool>) kind = "true or false";
    else if constexpr (std::is_unsigned_v<T>) kind = "a non-negative integer";
    else if constexpr (std::is_arithmetic_v<T>) kind = "a number";
    throw ConfigError("config key '" + key + "': expected " + kind + ", got " + v.dump());
  }
}

}  // namespace detail

/// One documented configuration key.
struct ConfigField {
  std::string key;
  std::string type;
  std::string doc;
  std::function<json(const RunConfig&)> get;
  std::function<void(RunConfig&, const json&)> set;
};

inline const std::vector<ConfigField>& config_fields() {
  using detail::get_as;
  static const std::vector<ConfigField> fields = [] {
    std::vector<ConfigField> f;
    auto str = [&f](std::string key, std::string doc, std::string RunConfig::*member) {
      f.push_back({key, "string", std::move(doc), [member](const RunConfig& c) { return json(c.*member); },
                   [member, key](RunConfig& c, const json& v) { c.*member = get_as<std::string>(v, key); }});
    };
    auto num = [&f]<typename T>(std::string key, std::string type, std::string doc, auto access) {
      f.push_back({key, std::move(type), std::move(doc),
                   [access](const RunConfig& c) { return json(access(const_cast<RunConfig&>(c))); },
                   [access, key](RunConfig& c, const json& v) { access(c) = get_as<T>(v, key); }});
    };
    auto choice = [&f](std::string key, std::string doc, std::vector<std::string> options,
                       std::function<std::string(const RunConfig&)> get,
                       std::function<void(RunConfig&, std::size_t)> set) {
      std::string type;
      for (const auto& o : options) type += (type.empty() ? "" : "|") + o;
      f.push_back({key, type, std::move(doc), [get](const RunConfig& c) { return json(get(c)); },
                   [options, set, key](RunConfig& c, const json& v) {
                     const auto s = get_as<std::string>(v, key);
                     for (std::size_t i = 0; i < options.size(); ++i) {
                       if (options[i] == s) return set(c, i);
                     }
                     throw ConfigError("config key '" + key + "': unknown value '" + s + "'");
                   }});
    };

    str("dataset_dir", "dataset directory (meta.json plus raw slice files)", &RunConfig::dataset_dir);
    str("output_dir", "augmented run directory (manifest.jsonl plus pair files)", &RunConfig::output_dir);
    str("recon_dir", "reconstruction directory (recon.jsonl plus images)", &RunConfig::recon_dir);
    str("results_file", "metrics table written by the metrics verb", &RunConfig::results_file);
    num.operator()<std::uint64_t>("seed", "uint", "global seed for every random stream",
                                  [](RunConfig& c) -> std::uint64_t& { return c.seed; });
    choice("mode", "augmentation mode", {"mraugment", "naive", "object-level"},
           [](const RunConfig& c) { return std::string(to_string(c.mode)); },
           [](RunConfig& c, std::size_t i) { c.mode = static_cast<Mode>(i); });
    num.operator()<std::uint64_t>("epoch_first", "uint", "first epoch to augment",
                                  [](RunConfig& c) -> std::uint64_t& { return c.epoch_first; });
    num.operator()<std::uint64_t>("epoch_last", "uint", "last epoch to augment (inclusive)",
                                  [](RunConfig& c) -> std::uint64_t& { return c.epoch_last; });

    num.operator()<unsigned>("total_epochs", "uint", "schedule length T",
                             [](RunConfig& c) -> unsigned& { return c.augment.total_epochs; });
    num.operator()<double>("p_max", "number", "final augmentation probability",
                           [](RunConfig& c) -> double& { return c.augment.p_max; });
    num.operator()<double>("schedule_c", "number", "exponential schedule sharpness c",
                           [](RunConfig& c) -> double& { return c.augment.c; });
    choice("schedule", "probability schedule", {"exponential", "constant"},
           [](const RunConfig& c) {
             return std::string(c.augment.schedule == Schedule::kExponential ? "exponential" : "constant");
           },
           [](RunConfig& c, std::size_t i) {
             c.augment.schedule = i == 0 ? Schedule::kExponential : Schedule::kConstant;
           });
    const char* names[kTransformCount] = {"hflip", "vflip", "rot90", "rotation",
                                          "translation", "scale_iso", "scale_aniso", "shear"};
    for (std::size_t i = 0; i < kTransformCount; ++i) {
      num.operator()<double>(std::string("w_") + names[i], "number",
                             std::string("weight of ") + names[i],
                             [i](RunConfig& c) -> double& { return c.augment.weights[i]; });
    }
    auto range = [&num](const std::string& base, const std::string& what, Range AugmentConfig::*member) {
      num.operator()<double>(base + "_min", "number", "lower bound of " + what,
                             [member](RunConfig& c) -> double& { return (c.augment.*member).lo; });
      num.operator()<double>(base + "_max", "number", "upper bound of " + what,
                             [member](RunConfig& c) -> double& { return (c.augment.*member).hi; });
    };
    range("rotation", "the rotation angle in degrees", &AugmentConfig::rotation_degrees);
    range("translate_x", "the horizontal shift as a fraction of the width", &AugmentConfig::translate_x);
    range("translate_y", "the vertical shift as a fraction of the height", &AugmentConfig::translate_y);
    range("scale_iso", "the isotropic scale factor", &AugmentConfig::scale_iso);
    range("scale_aniso", "each anisotropic scale factor", &AugmentConfig::scale_aniso);
    range("shear", "each shear angle in degrees", &AugmentConfig::shear_degrees);
    num.operator()<bool>("translate_integer", "bool", "round shifts to whole pixels",
                         [](RunConfig& c) -> bool& { return c.augment.translate_integer; });
    num.operator()<unsigned>("upsample_factor", "uint", "upsampling before interpolating transforms",
                             [](RunConfig& c) -> unsigned& { return c.augment.interp.upsample; });
    num.operator()<unsigned>("acceleration", "uint", "undersampling factor R (1 = full mask)",
                             [](RunConfig& c) -> unsigned& { return c.augment.acceleration; });
    num.operator()<double>("center_fraction", "number", "fraction of always-sampled center lines",
                           [](RunConfig& c) -> double& { return c.augment.center_fraction; });
    choice("mask_policy", "training masks", {"random", "per_volume"},
           [](const RunConfig& c) {
             return std::string(c.augment.mask_policy == MaskPolicy::kRandomPerSlice ? "random" : "per_volume");
           },
           [](RunConfig& c, std::size_t i) {
             c.augment.mask_policy = i == 0 ? MaskPolicy::kRandomPerSlice : MaskPolicy::kFixedPerVolume;
           });
    num.operator()<std::size_t>("crop_height", "uint", "target height (0 = full)",
                                [](RunConfig& c) -> std::size_t& { return c.augment.crop.height; });
    num.operator()<std::size_t>("crop_width", "uint", "target width (0 = full)",
                                [](RunConfig& c) -> std::size_t& { return c.augment.crop.width; });

    num.operator()<std::size_t>("volumes", "uint", "simulated volumes",
                                [](RunConfig& c) -> std::size_t& { return c.dataset.volumes; });
    num.operator()<std::size_t>("slices_per_volume", "uint", "simulated slices per volume",
                                [](RunConfig& c) -> std::size_t& { return c.dataset.slices_per_volume; });
    num.operator()<std::size_t>("height", "uint", "simulated slice height",
                                [](RunConfig& c) -> std::size_t& { return c.dataset.height; });
    num.operator()<std::size_t>("width", "uint", "simulated slice width (phase encoding)",
                                [](RunConfig& c) -> std::size_t& { return c.dataset.width; });
    num.operator()<std::size_t>("coils", "uint", "simulated receiver coils",
                                [](RunConfig& c) -> std::size_t& { return c.dataset.coils; });
    num.operator()<double>("sigma", "number", "k-space noise deviation per component",
                           [](RunConfig& c) -> double& { return c.dataset.sigma; });

    choice("recon_source", "what the recon verb reconstructs", {"dataset", "run"},
           [](const RunConfig& c) {
             return std::string(c.recon_source == ReconSource::kDataset ? "dataset" : "run");
           },
           [](RunConfig& c, std::size_t i) {
             c.recon_source = i == 0 ? ReconSource::kDataset : ReconSource::kRun;
           });
    choice("recon_method", "reconstructors to run", {"zero_filled", "tv", "both"},
           [](const RunConfig& c) {
             switch (c.recon_method) {
               case ReconMethod::kZeroFilled:
                 return std::string("zero_filled");
               case ReconMethod::kTv:
                 return std::string("tv");
               case ReconMethod::kBoth:
                 break;
             }
             return std::string("both");
           },
           [](RunConfig& c, std::size_t i) { c.recon_method = static_cast<ReconMethod>(i); });
    num.operator()<double>("tv_lambda", "number", "TV regularization weight",
                           [](RunConfig& c) -> double& { return c.tv.lambda; });
    num.operator()<unsigned>("tv_iters", "uint", "TV gradient-descent iterations",
                             [](RunConfig& c) -> unsigned& { return c.tv.iters; });
    num.operator()<double>("tv_step", "number", "initial TV step size",
                           [](RunConfig& c) -> double& { return c.tv.step; });
    num.operator()<unsigned>("noise_stride", "uint",
                             "pixel stride of the samples fed to the marginal noise test",
                             [](RunConfig& c) -> unsigned& { return c.noise_stride; });
    num.operator()<unsigned>("workers", "uint", "worker threads (outputs do not depend on it)",
                             [](RunConfig& c) -> unsigned& { return c.workers; });
    return f;
  }();
  return fields;
}

inline json to_json(const RunConfig& c) {
  json j = json::object();
  for (const auto& f : config_fields()) j[f.key] = f.get(c);
  return j;
}

/// Applies every key of a flat JSON object; unknown keys are errors.
inline void apply_json(RunConfig& c, const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a flat JSON object");
  for (const auto& [key, value] : j.items()) {
    bool found = false;
    for (const auto& f : config_fields()) {
      if (f.key == key) {
        f.set(c, value);
        found = true;
        break;
      }
    }
    if (!found) throw ConfigError("unknown config key '" + key + "'");
  }
}

inline RunConfig load_config_file(const fs::path& path, RunConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("malformed config file " + path.string() + ": " + e.what());
  }
  apply_json(base, j);
  return base;
}

inline constexpr const char* kEnvPrefix = "MRAUG_";

/// Applies MRAUG_<KEY> variables (key upper-cased). Values are read as JSON
/// when they parse, otherwise as plain strings.
inline void apply_env(RunConfig& c, const std::function<const char*(const char*)>& getenv_fn =
                                        [](const char* n) { return std::getenv(n); }) {
  for (const auto& f : config_fields()) {
    std::string var = kEnvPrefix;
    for (char ch : f.key) var += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    const char* raw = getenv_fn(var.c_str());
    if (raw == nullptr) continue;
    json v = json::parse(raw, nullptr, false);
    if (v.is_discarded() || (f.type.find('|') != std::string::npos && !v.is_string()) ||
        (f.type == "string" && !v.is_string())) {
      v = std::string(raw);
    }
    try {
      f.set(c, v);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(e.what()) + " (from " + var + ")");
    }
  }
}

/// Human-readable schema: key, type, default, description.
inline std::string config_schema() {
  const RunConfig defaults;
  std::ostringstream out;
  out << "Configuration keys (flat JSON object; env override " << kEnvPrefix << "<KEY>):\n";
  for (const auto& f : config_fields()) {
    out << "  " << f.key << " (" << f.type << ", default " << f.get(defaults).dump() << ")\n"
        << "      " << f.doc << '\n';
  }
  return out.str();
}

}  // namespace mraug
