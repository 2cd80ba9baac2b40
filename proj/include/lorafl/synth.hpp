#pragma once

#include <cstdint>

#include "lorafl/data.hpp"

namespace lorafl {

// Seeded synthetic dataset: each class gets a random prototype image and
// samples are the prototype plus Gaussian pixel noise. Useful for smoke
// tests and desk-scale runs when the real datasets are not on disk.
struct SynthConfig {
  std::size_t count = 2000;
  std::size_t classes = 10;
  std::size_t height = 28;
  std::size_t width = 28;
  std::size_t channels = 1;
  double noise_std = 24.0;
  std::uint64_t seed = 0;
};

ImageStore make_synthetic(const SynthConfig& cfg);

}  // namespace lorafl
