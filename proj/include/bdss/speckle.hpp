#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "bdss/raster.hpp"

namespace bdss {

// Number-of-looks law for noise synthesis: a fixed L or a uniform interval
// [looks_min, looks_max], plus the master seed all realizations derive from.
struct SpeckleSpec {
  double looks_min = 1.0;
  double looks_max = 1.0;
  std::uint64_t seed = 0;

  static SpeckleSpec fixed(double looks, std::uint64_t seed);
  static SpeckleSpec interval(double lo, double hi, std::uint64_t seed);

  bool is_fixed() const { return looks_min == looks_max; }
  void validate() const;  // throws std::domain_error when L < 1 or the interval is empty
};

// One multiplicative speckle realization: unit-mean Gamma(L, L) draws.
struct NoiseField {
  int width = 0;
  int height = 0;
  std::vector<float> values;
  double looks_used = 0.0;
};

// Realized L for substream `index`: the fixed value, or a uniform draw.
double sample_looks(const SpeckleSpec& spec, std::uint64_t index = 0);

// i.i.d. Gamma(shape=L, rate=L) field; deterministic given (spec.seed, index).
NoiseField sample_speckle(int height, int width, const SpeckleSpec& spec,
                          std::uint64_t index = 0);

// y = n .* x, no clipping. x must be non-negative intensity imagery.
ImageRaster apply_speckle(const ImageRaster& clean, const NoiseField& noise);

// Two independent realizations (y, y') of the same clean image, one per RNG
// substream. Each realization draws its own L when the spec is an interval.
std::pair<ImageRaster, ImageRaster> make_training_pair(const ImageRaster& clean,
                                                       const SpeckleSpec& spec,
                                                       std::uint64_t pair_index);

}  // namespace bdss
