#include "bdss/speckle.hpp"

#include <stdexcept>
#include <string>

#include "bdss/errors.hpp"
#include "bdss/rng.hpp"

namespace bdss {

SpeckleSpec SpeckleSpec::fixed(double looks, std::uint64_t seed) {
  SpeckleSpec s{looks, looks, seed};
  s.validate();
  return s;
}

SpeckleSpec SpeckleSpec::interval(double lo, double hi, std::uint64_t seed) {
  SpeckleSpec s{lo, hi, seed};
  s.validate();
  return s;
}

void SpeckleSpec::validate() const {
  if (looks_min < 1.0)
    throw std::domain_error("speckle: looks must be >= 1, got " + std::to_string(looks_min));
  if (looks_max < looks_min)
    throw std::domain_error("speckle: empty looks interval [" + std::to_string(looks_min) + "," +
                            std::to_string(looks_max) + "]");
}

double sample_looks(const SpeckleSpec& spec, std::uint64_t index) {
  spec.validate();
  if (spec.is_fixed()) return spec.looks_min;
  rng::Stream stream(rng::substream(spec.seed, {rng::kLooks, index}));
  return stream.uniform_in(spec.looks_min, spec.looks_max);
}

NoiseField sample_speckle(int height, int width, const SpeckleSpec& spec, std::uint64_t index) {
  spec.validate();
  if (height <= 0 || width <= 0)
    throw config_error("sample_speckle: non-positive field extent " + std::to_string(width) +
                       "x" + std::to_string(height));
  rng::Stream stream(rng::substream(spec.seed, {rng::kNoise, index}));
  NoiseField field;
  field.width = width;
  field.height = height;
  field.looks_used =
      spec.is_fixed() ? spec.looks_min : stream.uniform_in(spec.looks_min, spec.looks_max);
  const double looks = field.looks_used;
  field.values.resize(static_cast<std::size_t>(width) * height);
  for (auto& v : field.values) v = static_cast<float>(stream.gamma(looks) / looks);
  return field;
}

ImageRaster apply_speckle(const ImageRaster& clean, const NoiseField& noise) {
  if (clean.width != noise.width || clean.height != noise.height)
    throw config_error("apply_speckle: image " + std::to_string(clean.width) + "x" +
                       std::to_string(clean.height) + " vs noise " + std::to_string(noise.width) +
                       "x" + std::to_string(noise.height));
  for (float v : clean.values)
    if (v < 0.0f)
      throw std::domain_error("apply_speckle: clean image has negative intensities");
  ImageRaster out = clean;
  out.tag = ImageRaster::Tag::speckled;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] *= noise.values[i];
  return out;
}

std::pair<ImageRaster, ImageRaster> make_training_pair(const ImageRaster& clean,
                                                       const SpeckleSpec& spec,
                                                       std::uint64_t pair_index) {
  const NoiseField n0 = sample_speckle(clean.height, clean.width, spec, 2 * pair_index);
  const NoiseField n1 = sample_speckle(clean.height, clean.width, spec, 2 * pair_index + 1);
  return {apply_speckle(clean, n0), apply_speckle(clean, n1)};
}

}  // namespace bdss
