#include "lorafl/synth.hpp"

#include <algorithm>
#include <cmath>

#include "lorafl/rng.hpp"

namespace lorafl {

ImageStore make_synthetic(const SynthConfig& cfg) {
  if (cfg.count < 1 || cfg.classes < 1)
    throw ValidationError("make_synthetic: count and classes must be >= 1");

  ImageStore store;
  store.height = cfg.height;
  store.width = cfg.width;
  store.channels = cfg.channels;
  store.num_classes = cfg.classes;
  const std::size_t dim = store.image_bytes();

  Rng rng(cfg.seed);
  std::vector<double> prototypes(cfg.classes * dim);
  for (auto& v : prototypes) v = 255.0 * rng.uniform01();

  store.pixels.resize(cfg.count * dim);
  store.labels.resize(cfg.count);
  for (std::size_t i = 0; i < cfg.count; ++i) {
    const std::uint8_t cls = std::uint8_t(i % cfg.classes);  // balanced classes
    store.labels[i] = cls;
    const double* proto = prototypes.data() + std::size_t(cls) * dim;
    std::uint8_t* px = store.pixels.data() + i * dim;
    for (std::size_t j = 0; j < dim; ++j) {
      const double v = proto[j] + cfg.noise_std * rng.gaussian();
      px[j] = std::uint8_t(std::clamp(v, 0.0, 255.0));
    }
  }
  return store;
}

}  // namespace lorafl
