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

// Augments one simulated 8-coil slice over a few epochs and writes the
// targets as PGM images, then reconstructs the last pair.
//
//   augment_phantom [out_dir]

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "mraug/metrics.hpp"
#include "mraug/phantom.hpp"
#include "mraug/pipeline.hpp"
#include "mraug/recon.hpp"

namespace {

void write_pgm(const std::filesystem::path& path, const mraug::RealGrid& g) {
  const double hi = std::max(1e-12, *std::max_element(g.begin(), g.end()));
  std::ofstream out(path, std::ios::binary);
  out << "P5\n" << g.width() << ' ' << g.height() << "\n255\n";
  for (double v : g) out.put(static_cast<char>(std::clamp(v / hi, 0.0, 1.0) * 255.0 + 0.5));
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path out = argc > 1 ? argv[1] : "augment_phantom_out";
  std::filesystem::create_directories(out);

  constexpr std::uint64_t kSeed = 7;
  const mraug::SensitivityMaps maps = mraug::volume_maps(kSeed, 0, 256, 192, 8);
  const mraug::CoilStack k = mraug::simulate_slice(kSeed, 0, 0, maps, 0.002).kspace;

  mraug::AugmentConfig cfg;
  cfg.crop = {192, 192};
  for (std::uint64_t epoch : {0, 10, 25, 50}) {
    const mraug::AugmentedPair pair = mraug::augment_slice(k, cfg, {kSeed, 0, 0, epoch});
    std::cout << "epoch " << epoch << ": p = " << pair.spec.p << ", transforms:";
    for (const auto& t : pair.spec.transforms) std::cout << ' ' << mraug::name(t);
    std::cout << ", " << pair.mask.selected_count() << "/" << pair.mask.width() << " lines\n";
    char name[32];
    std::snprintf(name, sizeof(name), "target_e%02llu.pgm", static_cast<unsigned long long>(epoch));
    write_pgm(out / name, pair.target);

    if (epoch == 50) {
      const mraug::RealGrid zf = mraug::zero_filled(pair.kspace, pair.mask, cfg.crop);
      mraug::TvParams tv;
      tv.lambda = 1e-2;
      const mraug::RealGrid rec = mraug::tv_reconstruct(pair.kspace, pair.mask, tv, cfg.crop).image;
      const double range = *std::max_element(pair.target.begin(), pair.target.end());
      std::cout << "  zero-filled SSIM " << mraug::ssim(zf, pair.target, range) << ", TV SSIM "
                << mraug::ssim(rec, pair.target, range) << '\n';
      write_pgm(out / "zero_filled_e50.pgm", zf);
      write_pgm(out / "tv_e50.pgm", rec);
    }
  }
  std::cout << "images written to " << out.string() << '\n';
  return 0;
}
