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

#include <algorithm>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mraug/commands.hpp"
#include "mraug/config.hpp"

// Command-line front end:
//
//   mraug <simulate|augment|validate-noise|recon|metrics>
//         [--config PATH] [--seed U64] [--mode M] [--epochs A..B] [--workers K]
//   mraug --help-config
//
// Exit codes: 0 success, 1 runtime error, 2 usage or configuration error,
// 3 validate-noise verdict FAIL.

namespace mraug::cli {

inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;

/// Parses "A..B" or "A" into an inclusive epoch range.
inline std::pair<std::uint64_t, std::uint64_t> parse_epochs(const std::string& s) {
  auto to_u64 = [&s](const std::string& part) {
    if (part.empty() || !std::all_of(part.begin(), part.end(), ::isdigit)) {
      throw ConfigError("--epochs: expected A..B with non-negative integers, got '" + s + "'");
    }
    return static_cast<std::uint64_t>(std::stoull(part));
  };
  const auto dots = s.find("..");
  if (dots == std::string::npos) {
    const auto e = to_u64(s);
    return {e, e};
  }
  return {to_u64(s.substr(0, dots)), to_u64(s.substr(dots + 2))};
}

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::string> epochs;
  std::optional<unsigned> workers;
};

inline RunConfig resolve_config(const Overrides& o) {
  RunConfig cfg;
  if (!o.config.empty()) cfg = load_config_file(o.config, cfg);
  apply_env(cfg);
  if (o.seed) cfg.seed = *o.seed;
  if (o.mode) {
    const auto m = parse_mode(*o.mode);
    if (!m) throw ConfigError("--mode: unknown mode '" + *o.mode + "'");
    cfg.mode = *m;
  }
  if (o.epochs) std::tie(cfg.epoch_first, cfg.epoch_last) = parse_epochs(*o.epochs);
  if (o.workers) cfg.workers = *o.workers;
  cfg.validate();
  return cfg;
}

/// Runs the tool on `args` (without the program name).
inline int run(std::vector<std::string> args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Simulated accelerated MRI and physics-aware data augmentation", "mraug"};
  app.require_subcommand(0, 1);
  bool help_config = false;
  app.add_flag("--help-config", help_config, "print every configuration key and exit");

  Overrides o;
  const std::vector<std::pair<std::string, std::string>> verbs = {
      {"simulate", "generate a synthetic phantom dataset"},
      {"augment", "write augmented training pairs and their manifest"},
      {"validate-noise", "test the noise statistics of an augmented run"},
      {"recon", "zero-filled and TV reconstruction of a dataset or run"},
      {"metrics", "SSIM, PSNR and NMSE of reconstructions against their targets"},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, doc] : verbs) {
    CLI::App* sub = app.add_subcommand(name, doc);
    sub->add_option("--config", o.config, "flat JSON config file");
    sub->add_option("--seed", o.seed, "global seed");
    sub->add_option("--mode", o.mode, "mraugment | naive | object-level");
    sub->add_option("--epochs", o.epochs, "epoch range A..B (inclusive)");
    sub->add_option("--workers", o.workers, "worker threads");
    subs.push_back(sub);
  }

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "mraug: " << e.what() << '\n';
    return kExitUsage;
  }
  if (help_config) {
    out << config_schema();
    return 0;
  }
  CLI::App* chosen = nullptr;
  for (auto* s : subs) {
    if (s->parsed()) chosen = s;
  }
  if (chosen == nullptr) {
    err << app.help();
    return kExitUsage;
  }

  RunConfig cfg;
  try {
    cfg = resolve_config(o);
  } catch (const ConfigError& e) {
    err << "mraug: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    const std::string verb = chosen->get_name();
    if (verb == "simulate") return cmd_simulate(cfg, out);
    if (verb == "augment") return cmd_augment(cfg, out);
    if (verb == "validate-noise") return cmd_validate_noise(cfg, out);
    if (verb == "recon") return cmd_recon(cfg, out);
    return cmd_metrics(cfg, out);
  } catch (const std::exception& e) {
    err << "mraug " << chosen->get_name() << ": " << e.what() << '\n';
    return kExitError;
  }
}

inline int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(std::move(args));
}

}  // namespace mraug::cli
