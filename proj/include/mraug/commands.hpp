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
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mraug/acquisition.hpp"
#include "mraug/config.hpp"
#include "mraug/dataset.hpp"
#include "mraug/fourier.hpp"
#include "mraug/metrics.hpp"
#include "mraug/parallel.hpp"
#include "mraug/phantom.hpp"
#include "mraug/pipeline.hpp"
#include "mraug/recon.hpp"
#include "mraug/transforms.hpp"

// The verbs of the command-line tool. Every command writes its outputs in a
// fixed order, so file contents do not depend on the number of workers.

namespace mraug {

inline constexpr const char* kManifestFile = "manifest.jsonl";
inline constexpr const char* kNoiseReportFile = "noise_report.json";
inline constexpr const char* kReconManifestFile = "recon.jsonl";

/// Largest off-diagonal |C_ij| / SE_ij accepted as uncorrelated coils.
inline constexpr double kCoilCovarianceZ = 3.0;

namespace detail {

inline std::string pair_stem(std::uint64_t epoch, std::uint64_t volume, std::uint64_t slice) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "e%04llu_v%03llu_s%03llu", static_cast<unsigned long long>(epoch),
                static_cast<unsigned long long>(volume), static_cast<unsigned long long>(slice));
  return buf;
}

inline std::string slice_stem(std::uint64_t volume, std::uint64_t slice) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "v%03llu_s%03llu", static_cast<unsigned long long>(volume),
                static_cast<unsigned long long>(slice));
  return buf;
}

inline bool needs_maps(Mode mode) { return mode != Mode::kMRAugment; }

inline std::vector<SensitivityMaps> read_all_maps(const fs::path& root, const DatasetMeta& meta) {
  std::vector<SensitivityMaps> maps;
  for (std::uint64_t v = 0; v < meta.volumes; ++v) maps.push_back(read_maps(root, meta, v));
  return maps;
}

inline std::vector<float> to_floats(const RealGrid& g) { return {g.begin(), g.end()}; }

inline std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// simulate

inline int cmd_simulate(const RunConfig& cfg, std::ostream& log) {
  DatasetParams p = cfg.dataset;
  p.seed = cfg.seed;
  const DatasetMeta meta = synth_dataset(p, cfg.dataset_dir, cfg.workers);
  log << "simulate: wrote " << meta.slices.size() << " slices (" << meta.height << "x" << meta.width
      << ", " << meta.coils << " coils, sigma " << meta.sigma << ") to " << cfg.dataset_dir << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// augment

/// Produces every (epoch, slice) pair of the configured epoch range and the
/// manifest describing them.
inline std::vector<ManifestRecord> run_augment(const RunConfig& cfg) {
  const fs::path root = cfg.dataset_dir;
  const fs::path out = cfg.output_dir;
  const DatasetMeta meta = read_meta(root);
  const std::vector<SensitivityMaps> maps =
      detail::needs_maps(cfg.mode) ? detail::read_all_maps(root, meta) : std::vector<SensitivityMaps>{};
  fs::create_directories(out);

  struct Job {
    std::uint64_t epoch;
    std::size_t entry;
  };
  std::vector<Job> jobs;
  for (std::uint64_t e = cfg.epoch_first; e <= cfg.epoch_last; ++e)
    for (std::size_t i = 0; i < meta.slices.size(); ++i) jobs.push_back({e, i});

  std::vector<ManifestRecord> records(jobs.size());
  parallel_for(jobs.size(), cfg.workers, [&](std::size_t j) {
    const SliceEntry& entry = meta.slices[jobs[j].entry];
    const CoilStack k = read_slice(root, meta, entry);
    const SliceKey key{cfg.seed, entry.volume, entry.slice, jobs[j].epoch};
    const SensitivityMaps* m = maps.empty() ? nullptr : &maps[entry.volume];
    const AugmentedPair pair = augment(cfg.mode, k, cfg.augment, key, m);

    const std::string stem = detail::pair_stem(key.epoch, key.volume, key.slice);
    ManifestRecord& r = records[j];
    r.mode = cfg.mode;
    r.spec = pair.spec;
    r.mask_seed = pair.mask.seed;
    r.acceleration = pair.mask.acceleration;
    r.center_fraction = pair.mask.center_fraction;
    r.mask = mask_to_string(pair.mask);
    r.kspace_file = stem + "_kspace.bin";
    r.target_file = stem + "_target.bin";
    r.coils = pair.kspace.coils();
    r.kspace_shape = pair.kspace.shape();
    r.target_shape = pair.target.shape();
    write_coil_stack(out / r.kspace_file, pair.kspace);
    write_real_grid(out / r.target_file, pair.target);
  });
  write_manifest(out / kManifestFile, records);
  return records;
}

inline int cmd_augment(const RunConfig& cfg, std::ostream& log) {
  const auto records = run_augment(cfg);
  std::size_t augmented = 0;
  for (const auto& r : records) augmented += r.spec.empty() ? 0 : 1;
  log << "augment: mode " << to_string(cfg.mode) << ", epochs " << cfg.epoch_first << ".."
      << cfg.epoch_last << ", " << records.size() << " pairs (" << augmented
      << " with transforms) in " << cfg.output_dir << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// validate-noise

struct NoiseValidation {
  std::size_t records = 0;
  std::size_t replay_mismatches = 0;
  NoiseReport marginal;  ///< residuals standardized by their exact per-pixel deviation
  NoiseReport raw;       ///< residuals as they are
  CoilCovariance covariance;
  bool covariance_ok = false;
  bool pass = false;
};

/// Expected per-pixel deviation of the augmented noise in each coil, in units
/// of the k-space noise deviation.
inline std::vector<RealGrid> augmented_noise_scale(Mode mode, const TransformSpec& spec,
                                                   GridShape image, std::size_t coils,
                                                   const AugmentConfig& cfg,
                                                   const SensitivityMaps* maps) {
  const RealGrid gain = noise_gain(image, spec, cfg.interp);
  if (!detail::needs_maps(mode)) return std::vector<RealGrid>(coils, gain);
  const SensitivityMaps s =
      mode == Mode::kNaive ? detail::require_maps(maps, "noise scale").cropped(image)
                           : detail::require_maps(maps, "noise scale");
  std::vector<RealGrid> out;
  for (std::size_t i = 0; i < coils; ++i) {
    RealGrid g(image);
    for (std::size_t p = 0; p < g.size(); ++p) g[p] = std::abs(s[i][p]) * gain[p];
    out.push_back(std::move(g));
  }
  return out;
}

/// Replays every manifest record of a run on the noisy dataset slice and on
/// its regenerated noise-free counterpart. The difference of the two
/// augmented coil images is the augmented noise; it is tested for Gaussian
/// marginals (after dividing by its exact per-pixel deviation) and for
/// independence across coils. Also checks that the stored pairs match the
/// replay bit for bit.
inline NoiseValidation run_validate_noise(const RunConfig& cfg) {
  const fs::path root = cfg.dataset_dir;
  const fs::path run = cfg.output_dir;
  const DatasetMeta meta = read_meta(root);
  if (!(meta.sigma > 0.0)) throw DomainError("validate-noise: dataset has no injected noise");
  const auto records = read_manifest(run / kManifestFile);
  if (records.empty()) throw IoError("validate-noise: empty manifest in " + run.string());

  std::map<std::pair<std::uint64_t, std::uint64_t>, std::size_t> index;
  for (std::size_t i = 0; i < meta.slices.size(); ++i) {
    index[{meta.slices[i].volume, meta.slices[i].slice}] = i;
  }
  bool any_maps = false;
  for (const auto& r : records) any_maps = any_maps || detail::needs_maps(r.mode);
  const std::vector<SensitivityMaps> maps =
      any_maps ? detail::read_all_maps(root, meta) : std::vector<SensitivityMaps>{};
  std::vector<SensitivityMaps> clean_maps;
  for (std::uint64_t v = 0; v < meta.volumes; ++v) {
    clean_maps.push_back(volume_maps(meta.seed, v, meta.height, meta.width, meta.coils));
  }

  struct Part {
    CoilStack standardized;
    CoilStack raw;
    bool mismatch = false;
  };
  std::vector<Part> parts(records.size());
  const std::size_t stride = cfg.noise_stride;
  parallel_for(records.size(), cfg.workers, [&](std::size_t i) {
    const ManifestRecord& rec = records[i];
    const auto it = index.find({rec.spec.volume, rec.spec.slice});
    if (it == index.end()) throw IoError("validate-noise: manifest slice missing from dataset");
    const SliceEntry& entry = meta.slices[it->second];
    const SensitivityMaps* m = detail::needs_maps(rec.mode) ? &maps[entry.volume] : nullptr;

    const CoilStack noisy = read_slice(root, meta, entry);
    const CoilStack clean =
        simulate_slice(meta.seed, entry.volume, entry.slice, clean_maps[entry.volume], 0.0).kspace;

    const AugmentedPair pair = replay(rec.mode, noisy, rec.spec, rec.to_mask(), cfg.augment, m);
    const CoilStack stored_k = read_coil_stack(run / rec.kspace_file, rec.coils, rec.kspace_shape);
    const RealGrid stored_t = read_real_grid(run / rec.target_file, rec.target_shape);
    parts[i].mismatch = quantize(pair.kspace) != stored_k ||
                        detail::to_floats(pair.target) != detail::to_floats(stored_t);

    const CoilStack residual =
        subtract(augmented_coil_images(rec.mode, noisy, rec.spec, cfg.augment, m),
                 augmented_coil_images(rec.mode, clean, rec.spec, cfg.augment, m));
    const GridShape image = residual.shape();
    const auto scale =
        augmented_noise_scale(rec.mode, rec.spec, image, residual.coils(), cfg.augment, m);
    const GridShape sub{(image.height + stride - 1) / stride, (image.width + stride - 1) / stride};
    CoilStack standardized(residual.coils(), sub);
    CoilStack raw(residual.coils(), sub);
    for (std::size_t c = 0; c < residual.coils(); ++c) {
      for (std::size_t r = 0; r < sub.height; ++r) {
        for (std::size_t q = 0; q < sub.width; ++q) {
          const cplx v = residual[c](r * stride, q * stride);
          const double s = scale[c](r * stride, q * stride);
          raw[c](r, q) = v;
          standardized[c](r, q) = s > 0.0 ? v / s : cplx{};
        }
      }
    }
    parts[i].standardized = std::move(standardized);
    parts[i].raw = std::move(raw);
  });

  NoiseValidation out;
  out.records = records.size();
  std::vector<CoilStack> standardized;
  std::vector<CoilStack> raw;
  for (auto& p : parts) {
    out.replay_mismatches += p.mismatch ? 1 : 0;
    standardized.push_back(std::move(p.standardized));
    raw.push_back(std::move(p.raw));
  }
  out.marginal = validate_noise(flatten(standardized));
  out.raw = validate_noise(flatten(raw));
  out.covariance = cross_coil_covariance(standardized);
  out.covariance_ok = out.covariance.max_offdiagonal_z() <= kCoilCovarianceZ;
  out.pass = out.replay_mismatches == 0 && out.marginal.pass && out.covariance_ok;
  return out;
}

inline json to_json(const NoiseReport& r) {
  return {{"samples", r.samples},
          {"mean_re", r.mean.real()},
          {"mean_im", r.mean.imag()},
          {"var_re", r.var_re},
          {"var_im", r.var_im},
          {"correlation", r.correlation},
          {"ks_statistic", r.ks_statistic},
          {"ks_p_value", r.ks_p_value},
          {"mean_ok", r.mean_ok},
          {"variance_ok", r.variance_ok},
          {"correlation_ok", r.correlation_ok},
          {"ks_ok", r.ks_ok},
          {"pass", r.pass}};
}

inline json to_json(const NoiseValidation& v) {
  return {{"records", v.records},
          {"replay_mismatches", v.replay_mismatches},
          {"marginal", to_json(v.marginal)},
          {"raw", to_json(v.raw)},
          {"coil_covariance_max_z", v.covariance.max_offdiagonal_z()},
          {"coil_correlation_max", v.covariance.max_offdiagonal_correlation()},
          {"coil_covariance_ok", v.covariance_ok},
          {"pass", v.pass}};
}

inline void print_noise_report(std::ostream& log, const char* label, const NoiseReport& r) {
  log << "  " << label << ": n=" << r.samples << " mean=(" << r.mean.real() << ", " << r.mean.imag()
      << ") var=(" << r.var_re << ", " << r.var_im << ") corr=" << r.correlation
      << " ks_p=" << r.ks_p_value << " -> " << (r.pass ? "pass" : "fail") << '\n';
}

/// Exit code 0 when the run's noise passes, 3 when it does not.
inline int cmd_validate_noise(const RunConfig& cfg, std::ostream& log) {
  const NoiseValidation v = run_validate_noise(cfg);
  {
    const fs::path path = fs::path(cfg.output_dir) / kNoiseReportFile;
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << to_json(v).dump(2) << '\n';
  }
  log << "validate-noise: " << v.records << " records, " << v.replay_mismatches
      << " replay mismatches\n";
  print_noise_report(log, "marginal (standardized)", v.marginal);
  print_noise_report(log, "raw", v.raw);
  log << "  coil covariance: max |C_ij|/SE = " << v.covariance.max_offdiagonal_z()
      << ", max correlation = " << v.covariance.max_offdiagonal_correlation() << " -> "
      << (v.covariance_ok ? "pass" : "fail") << '\n';
  log << (v.pass ? "PASS" : "FAIL") << '\n';
  return v.pass ? 0 : 3;
}

// ---------------------------------------------------------------------------
// recon

struct ReconRecord {
  std::uint64_t volume = 0;
  std::uint64_t slice = 0;
  std::uint64_t epoch = 0;
  GridShape shape;
  std::string target_file;
  std::string zero_filled_file;  ///< empty when not computed
  std::string tv_file;           ///< empty when not computed
};

inline json to_json(const ReconRecord& r) {
  json j = {{"volume", r.volume}, {"slice", r.slice},         {"epoch", r.epoch},
            {"height", r.shape.height}, {"width", r.shape.width}, {"target", r.target_file}};
  if (!r.zero_filled_file.empty()) j["zero_filled"] = r.zero_filled_file;
  if (!r.tv_file.empty()) j["tv"] = r.tv_file;
  return j;
}

inline ReconRecord recon_record_from_json(const json& j) {
  ReconRecord r;
  r.volume = j.at("volume").get<std::uint64_t>();
  r.slice = j.at("slice").get<std::uint64_t>();
  r.epoch = j.at("epoch").get<std::uint64_t>();
  r.shape = {j.at("height").get<std::size_t>(), j.at("width").get<std::size_t>()};
  r.target_file = j.at("target").get<std::string>();
  if (j.contains("zero_filled")) r.zero_filled_file = j.at("zero_filled").get<std::string>();
  if (j.contains("tv")) r.tv_file = j.at("tv").get<std::string>();
  return r;
}

inline std::vector<ReconRecord> read_recon_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("missing reconstruction manifest " + path.string());
  std::vector<ReconRecord> out;
  std::string line;
  try {
    while (std::getline(in, line)) {
      if (!line.empty()) out.push_back(recon_record_from_json(json::parse(line)));
    }
  } catch (const json::exception& e) {
    throw IoError("malformed reconstruction manifest " + path.string() + ": " + e.what());
  }
  return out;
}

/// Reconstructs either the dataset (retrospectively undersampled with the
/// per-volume validation mask) or the pairs of an augmented run.
inline std::vector<ReconRecord> run_recon(const RunConfig& cfg) {
  const fs::path out = cfg.recon_dir;
  fs::create_directories(out);

  struct Job {
    ReconRecord rec;
    std::function<void(CoilStack&, UndersamplingMask&, RealGrid&)> load;
  };
  std::vector<Job> jobs;
  if (cfg.recon_source == ReconSource::kDataset) {
    const fs::path root = cfg.dataset_dir;
    const auto meta = std::make_shared<DatasetMeta>(read_meta(root));
    const GridShape crop = cfg.augment.target_shape(meta->shape());
    for (const auto& entry : meta->slices) {
      Job job;
      job.rec.volume = entry.volume;
      job.rec.slice = entry.slice;
      job.rec.shape = crop;
      job.load = [&cfg, root, meta, entry, crop](CoilStack& k, UndersamplingMask& mask,
                                                 RealGrid& target) {
        const CoilStack full = read_slice(root, *meta, entry);
        mask = cfg.augment.acceleration == 1
                   ? make_full_mask(meta->width)
                   : make_volume_mask(meta->width, cfg.augment.acceleration,
                                      cfg.augment.center_fraction, cfg.seed, entry.volume);
        k = apply_mask(full, mask);
        target = center_crop(rss(ifft2c(full)), crop);
      };
      jobs.push_back(std::move(job));
    }
  } else {
    const fs::path run = cfg.output_dir;
    for (const auto& r : read_manifest(run / kManifestFile)) {
      Job job;
      job.rec.volume = r.spec.volume;
      job.rec.slice = r.spec.slice;
      job.rec.epoch = r.spec.epoch;
      job.rec.shape = r.target_shape;
      job.load = [run, r](CoilStack& k, UndersamplingMask& mask, RealGrid& target) {
        k = read_coil_stack(run / r.kspace_file, r.coils, r.kspace_shape);
        mask = r.to_mask();
        target = read_real_grid(run / r.target_file, r.target_shape);
      };
      jobs.push_back(std::move(job));
    }
  }

  const bool do_zf = cfg.recon_method != ReconMethod::kTv;
  const bool do_tv = cfg.recon_method != ReconMethod::kZeroFilled;
  std::vector<ReconRecord> records(jobs.size());
  parallel_for(jobs.size(), cfg.workers, [&](std::size_t i) {
    ReconRecord rec = jobs[i].rec;
    CoilStack k;
    UndersamplingMask mask;
    RealGrid target;
    jobs[i].load(k, mask, target);
    const std::string stem =
        cfg.recon_source == ReconSource::kDataset
            ? detail::slice_stem(rec.volume, rec.slice)
            : detail::pair_stem(rec.epoch, rec.volume, rec.slice);
    rec.target_file = stem + "_target.bin";
    write_real_grid(out / rec.target_file, target);
    if (do_zf) {
      rec.zero_filled_file = stem + "_zf.bin";
      write_real_grid(out / rec.zero_filled_file, zero_filled(k, mask, rec.shape));
    }
    if (do_tv) {
      rec.tv_file = stem + "_tv.bin";
      write_real_grid(out / rec.tv_file, tv_reconstruct(k, mask, cfg.tv, rec.shape).image);
    }
    records[i] = std::move(rec);
  });

  std::ofstream manifest(out / kReconManifestFile, std::ios::trunc);
  if (!manifest) throw IoError("cannot write " + (out / kReconManifestFile).string());
  for (const auto& r : records) manifest << to_json(r).dump() << '\n';
  return records;
}

inline int cmd_recon(const RunConfig& cfg, std::ostream& log) {
  const auto records = run_recon(cfg);
  log << "recon: " << records.size() << " slices reconstructed into " << cfg.recon_dir << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// metrics

struct MetricRow {
  std::uint64_t volume = 0;
  std::uint64_t slice = 0;
  std::uint64_t epoch = 0;
  std::string method;
  double ssim = 0.0;
  double psnr = 0.0;
  double nmse = 0.0;
};

/// SSIM, PSNR and NMSE of every reconstruction against its reference, with
/// the data range taken as the maximum of the reference volume.
inline std::vector<MetricRow> run_metrics(const RunConfig& cfg) {
  const fs::path dir = cfg.recon_dir;
  const auto records = read_recon_manifest(dir / kReconManifestFile);
  std::vector<RealGrid> targets(records.size());
  parallel_for(records.size(), cfg.workers, [&](std::size_t i) {
    targets[i] = read_real_grid(dir / records[i].target_file, records[i].shape);
  });
  std::map<std::pair<std::uint64_t, std::uint64_t>, double> range;
  for (std::size_t i = 0; i < records.size(); ++i) {
    double& r = range[{records[i].epoch, records[i].volume}];
    for (double v : targets[i]) r = std::max(r, v);
  }

  std::vector<std::vector<MetricRow>> rows(records.size());
  parallel_for(records.size(), cfg.workers, [&](std::size_t i) {
    const ReconRecord& rec = records[i];
    double data_range = range.at({rec.epoch, rec.volume});
    if (!(data_range > 0.0)) data_range = 1.0;
    for (const auto& [method, file] : {std::pair<std::string, std::string>{"zero_filled", rec.zero_filled_file},
                                       std::pair<std::string, std::string>{"tv", rec.tv_file}}) {
      if (file.empty()) continue;
      const RealGrid x = read_real_grid(dir / file, rec.shape);
      rows[i].push_back({rec.volume, rec.slice, rec.epoch, method, ssim(x, targets[i], data_range),
                         psnr(x, targets[i], data_range), nmse(x, targets[i])});
    }
  });
  std::vector<MetricRow> out;
  for (auto& r : rows) out.insert(out.end(), r.begin(), r.end());
  return out;
}

/// Tab-separated table: one row per slice and method, then one mean row per
/// method.
inline std::string metrics_table(const std::vector<MetricRow>& rows) {
  std::string s = "volume\tslice\tepoch\tmethod\tssim\tpsnr\tnmse\n";
  std::vector<std::string> methods;
  for (const auto& r : rows) {
    s += std::to_string(r.volume) + '\t' + std::to_string(r.slice) + '\t' + std::to_string(r.epoch) +
         '\t' + r.method + '\t' + detail::format_number(r.ssim) + '\t' +
         detail::format_number(r.psnr) + '\t' + detail::format_number(r.nmse) + '\n';
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) {
      methods.push_back(r.method);
    }
  }
  for (const auto& m : methods) {
    double ss = 0, ps = 0, ns = 0;
    std::size_t n = 0;
    for (const auto& r : rows) {
      if (r.method != m) continue;
      ss += r.ssim;
      ps += r.psnr;
      ns += r.nmse;
      ++n;
    }
    const double d = static_cast<double>(n);
    s += "all\tall\tall\t" + m + '\t' + detail::format_number(ss / d) + '\t' +
         detail::format_number(ps / d) + '\t' + detail::format_number(ns / d) + '\n';
  }
  return s;
}

inline int cmd_metrics(const RunConfig& cfg, std::ostream& log) {
  const std::string table = metrics_table(run_metrics(cfg));
  std::ofstream out(cfg.results_file, std::ios::trunc);
  if (!out) throw IoError("cannot write " + cfg.results_file);
  out << table;
  log << table;
  return 0;
}

}  // namespace mraug
