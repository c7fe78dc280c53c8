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

#include <bit>
#include <cstdio>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mraug/acquisition.hpp"
#include "mraug/grid.hpp"
#include "mraug/pipeline.hpp"
#include "mraug/transforms.hpp"

// On-disk layout.
//
//   <root>/meta.json           dataset description (dims, coils, sigma, seed,
//                              slice and map file names)
//   <root>/vVVV_sSSS.bin       fully sampled k-space of one slice
//   <root>/vVVV_maps.bin       sensitivity maps of one volume
//
// Every .bin file is headerless little-endian float32: complex stacks as
// (re, im) pairs, coil-major then row-major (N*H*W*2 floats); real images as
// H*W floats, row-major.

namespace mraug {

namespace fs = std::filesystem;
using json = nlohmann::json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  }
  return v;
}

inline void write_floats(const fs::path& path, const std::vector<float>& values) {
  std::vector<std::uint32_t> words(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    words[i] = to_little_endian(std::bit_cast<std::uint32_t>(values[i]));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(words.data()),
            static_cast<std::streamsize>(words.size() * sizeof(std::uint32_t)));
  if (!out) throw IoError("failed writing " + path.string());
}

inline std::vector<float> read_floats(const fs::path& path, std::size_t count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes != count * sizeof(float)) {
    throw IoError(path.string() + ": expected " + std::to_string(count * sizeof(float)) +
                  " bytes, found " + std::to_string(bytes));
  }
  in.seekg(0);
  std::vector<std::uint32_t> words(count);
  in.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw IoError("failed reading " + path.string());
  std::vector<float> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    values[i] = std::bit_cast<float>(to_little_endian(words[i]));
  }
  return values;
}

}  // namespace detail

inline void write_coil_stack(const fs::path& path, const CoilStack& stack) {
  std::vector<float> values;
  values.reserve(stack.coils() * stack.shape().size() * 2);
  for (const auto& g : stack) {
    for (const auto& v : g) {
      values.push_back(static_cast<float>(v.real()));
      values.push_back(static_cast<float>(v.imag()));
    }
  }
  detail::write_floats(path, values);
}

inline CoilStack read_coil_stack(const fs::path& path, std::size_t coils, GridShape shape) {
  const auto values = detail::read_floats(path, coils * shape.size() * 2);
  std::vector<ComplexGrid> grids;
  grids.reserve(coils);
  std::size_t k = 0;
  for (std::size_t i = 0; i < coils; ++i) {
    ComplexGrid g(shape);
    for (auto& v : g) {
      v = cplx(values[k], values[k + 1]);
      k += 2;
    }
    grids.push_back(std::move(g));
  }
  return CoilStack(std::move(grids));
}

inline void write_real_grid(const fs::path& path, const RealGrid& g) {
  std::vector<float> values(g.begin(), g.end());
  detail::write_floats(path, values);
}

inline RealGrid read_real_grid(const fs::path& path, GridShape shape) {
  const auto values = detail::read_floats(path, shape.size());
  return RealGrid(shape.height, shape.width, std::vector<double>(values.begin(), values.end()));
}

/// Round-trips a stack through float32, i.e. what a reader of the file sees.
inline CoilStack quantize(const CoilStack& stack) {
  std::vector<ComplexGrid> out;
  for (const auto& g : stack) {
    ComplexGrid q(g.shape());
    for (std::size_t i = 0; i < g.size(); ++i) {
      q[i] = cplx(static_cast<float>(g[i].real()), static_cast<float>(g[i].imag()));
    }
    out.push_back(std::move(q));
  }
  return CoilStack(std::move(out));
}

struct SliceEntry {
  std::uint64_t volume = 0;
  std::uint64_t slice = 0;
  std::string file;
};

struct DatasetMeta {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t coils = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::size_t volumes = 0;
  std::size_t slices_per_volume = 0;
  std::vector<SliceEntry> slices;
  std::vector<std::string> map_files;  ///< one per volume, may be empty

  GridShape shape() const { return {height, width}; }
};

inline std::string slice_file_name(std::uint64_t volume, std::uint64_t slice) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "v%03llu_s%03llu.bin", static_cast<unsigned long long>(volume),
                static_cast<unsigned long long>(slice));
  return buf;
}

inline std::string maps_file_name(std::uint64_t volume) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "v%03llu_maps.bin", static_cast<unsigned long long>(volume));
  return buf;
}

inline json to_json(const DatasetMeta& m) {
  json j;
  j["format"] = "mraug-dataset";
  j["version"] = 1;
  j["height"] = m.height;
  j["width"] = m.width;
  j["coils"] = m.coils;
  j["sigma"] = m.sigma;
  j["seed"] = m.seed;
  j["volumes"] = m.volumes;
  j["slices_per_volume"] = m.slices_per_volume;
  j["slices"] = json::array();
  for (const auto& s : m.slices) {
    j["slices"].push_back({{"volume", s.volume}, {"slice", s.slice}, {"file", s.file}});
  }
  j["maps"] = m.map_files;
  return j;
}

inline DatasetMeta meta_from_json(const json& j) {
  try {
    DatasetMeta m;
    m.height = j.at("height").get<std::size_t>();
    m.width = j.at("width").get<std::size_t>();
    m.coils = j.at("coils").get<std::size_t>();
    m.sigma = j.at("sigma").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.volumes = j.at("volumes").get<std::size_t>();
    m.slices_per_volume = j.at("slices_per_volume").get<std::size_t>();
    for (const auto& s : j.at("slices")) {
      m.slices.push_back({s.at("volume").get<std::uint64_t>(), s.at("slice").get<std::uint64_t>(),
                          s.at("file").get<std::string>()});
    }
    if (j.contains("maps")) m.map_files = j.at("maps").get<std::vector<std::string>>();
    return m;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed dataset meta: ") + e.what());
  }
}

inline void write_meta(const fs::path& root, const DatasetMeta& m) {
  std::ofstream out(root / "meta.json", std::ios::trunc);
  if (!out) throw IoError("cannot write " + (root / "meta.json").string());
  out << to_json(m).dump(2) << '\n';
}

inline DatasetMeta read_meta(const fs::path& root) {
  std::ifstream in(root / "meta.json");
  if (!in) throw IoError("missing dataset meta file " + (root / "meta.json").string());
  try {
    return meta_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw IoError(std::string("malformed dataset meta: ") + e.what());
  }
}

inline CoilStack read_slice(const fs::path& root, const DatasetMeta& m, const SliceEntry& s) {
  return read_coil_stack(root / s.file, m.coils, m.shape());
}

inline SensitivityMaps read_maps(const fs::path& root, const DatasetMeta& m,
                                 std::uint64_t volume) {
  if (volume >= m.map_files.size() || m.map_files[volume].empty()) {
    throw IoError("dataset has no sensitivity maps for volume " + std::to_string(volume));
  }
  const CoilStack s = read_coil_stack(root / m.map_files[volume], m.coils, m.shape());
  return SensitivityMaps(s.grids());
}

// ---------------------------------------------------------------------------
// Transform specs and manifest records

inline json to_json(const TransformKind& t) {
  json j;
  j["type"] = name(t);
  std::visit(
      [&j](const auto& v) {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, Rot90>) {
          j["k"] = v.k;
        } else if constexpr (std::is_same_v<V, Rotate>) {
          j["degrees"] = v.degrees;
        } else if constexpr (std::is_same_v<V, Translate>) {
          j["dx"] = v.dx;
          j["dy"] = v.dy;
        } else if constexpr (std::is_same_v<V, ScaleIso>) {
          j["s"] = v.s;
        } else if constexpr (std::is_same_v<V, ScaleAniso>) {
          j["sx"] = v.sx;
          j["sy"] = v.sy;
        } else if constexpr (std::is_same_v<V, Shear>) {
          j["x_degrees"] = v.x_degrees;
          j["y_degrees"] = v.y_degrees;
        }
      },
      t);
  return j;
}

inline TransformKind transform_from_json(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "hflip") return HFlip{};
  if (type == "vflip") return VFlip{};
  if (type == "rot90") return Rot90{j.at("k").get<int>()};
  if (type == "rotation") return Rotate{j.at("degrees").get<double>()};
  if (type == "translation") return Translate{j.at("dx").get<double>(), j.at("dy").get<double>()};
  if (type == "scale_iso") return ScaleIso{j.at("s").get<double>()};
  if (type == "scale_aniso") {
    return ScaleAniso{j.at("sx").get<double>(), j.at("sy").get<double>()};
  }
  if (type == "shear") {
    return Shear{j.at("x_degrees").get<double>(), j.at("y_degrees").get<double>()};
  }
  throw IoError("unknown transform type '" + type + "'");
}

inline json to_json(const TransformSpec& s) {
  json j;
  j["volume"] = s.volume;
  j["slice"] = s.slice;
  j["epoch"] = s.epoch;
  j["p"] = s.p;
  j["transforms"] = json::array();
  for (const auto& t : s.transforms) j["transforms"].push_back(to_json(t));
  return j;
}

inline TransformSpec spec_from_json(const json& j) {
  TransformSpec s;
  s.volume = j.at("volume").get<std::uint64_t>();
  s.slice = j.at("slice").get<std::uint64_t>();
  s.epoch = j.at("epoch").get<std::uint64_t>();
  s.p = j.at("p").get<double>();
  for (const auto& t : j.at("transforms")) s.transforms.push_back(transform_from_json(t));
  return s;
}

inline std::string mask_to_string(const UndersamplingMask& m) {
  std::string s(m.width(), '0');
  for (std::size_t c = 0; c < m.width(); ++c) s[c] = m[c] ? '1' : '0';
  return s;
}

/// One produced training pair.
struct ManifestRecord {
  Mode mode = Mode::kMRAugment;
  TransformSpec spec;
  std::uint64_t mask_seed = 0;
  unsigned acceleration = 1;
  double center_fraction = 0.0;
  std::string mask;  ///< '0'/'1' per k-space column
  std::string kspace_file;
  std::string target_file;
  std::size_t coils = 0;
  GridShape kspace_shape;
  GridShape target_shape;

  UndersamplingMask to_mask() const {
    UndersamplingMask m;
    m.selected.resize(mask.size());
    for (std::size_t c = 0; c < mask.size(); ++c) m.selected[c] = mask[c] == '1' ? 1 : 0;
    m.acceleration = acceleration;
    m.center_fraction = center_fraction;
    m.center_lines = acceleration == 1 ? mask.size() : center_line_count(mask.size(), center_fraction);
    m.seed = mask_seed;
    return m;
  }
};

inline json to_json(const ManifestRecord& r) {
  json j;
  j["mode"] = std::string(to_string(r.mode));
  j["spec"] = to_json(r.spec);
  j["mask_seed"] = r.mask_seed;
  j["acceleration"] = r.acceleration;
  j["center_fraction"] = r.center_fraction;
  j["mask"] = r.mask;
  j["kspace_file"] = r.kspace_file;
  j["target_file"] = r.target_file;
  j["coils"] = r.coils;
  j["kspace_shape"] = {r.kspace_shape.height, r.kspace_shape.width};
  j["target_shape"] = {r.target_shape.height, r.target_shape.width};
  return j;
}

inline ManifestRecord record_from_json(const json& j) {
  ManifestRecord r;
  const auto mode = parse_mode(j.at("mode").get<std::string>());
  if (!mode) throw IoError("manifest: unknown mode");
  r.mode = *mode;
  r.spec = spec_from_json(j.at("spec"));
  r.mask_seed = j.at("mask_seed").get<std::uint64_t>();
  r.acceleration = j.at("acceleration").get<unsigned>();
  r.center_fraction = j.at("center_fraction").get<double>();
  r.mask = j.at("mask").get<std::string>();
  r.kspace_file = j.at("kspace_file").get<std::string>();
  r.target_file = j.at("target_file").get<std::string>();
  r.coils = j.at("coils").get<std::size_t>();
  r.kspace_shape = {j.at("kspace_shape")[0].get<std::size_t>(),
                    j.at("kspace_shape")[1].get<std::size_t>()};
  r.target_shape = {j.at("target_shape")[0].get<std::size_t>(),
                    j.at("target_shape")[1].get<std::size_t>()};
  return r;
}

inline void write_manifest(const fs::path& path, const std::vector<ManifestRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

inline std::vector<ManifestRecord> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("missing manifest " + path.string());
  std::vector<ManifestRecord> out;
  std::string line;
  try {
    while (std::getline(in, line)) {
      if (!line.empty()) out.push_back(record_from_json(json::parse(line)));
    }
  } catch (const json::exception& e) {
    throw IoError("malformed manifest " + path.string() + ": " + e.what());
  }
  return out;
}

}  // namespace mraug
