#include "bdss/model.hpp"

#include <iostream>

namespace bdss {

ModelConfig ModelConfig::desk_scale(int factor) {
  if (factor < 1) throw config_error("scale_factor must be >= 1");
  ModelConfig c = full_scale();
  auto divide = [&](int v, const char* what) {
    if (v % factor != 0)
      throw config_error(std::string("scale_factor ") + std::to_string(factor) +
                         " does not divide " + what + " width " + std::to_string(v));
    return v / factor;
  };
  c.lowlevel_channels = divide(c.lowlevel_channels, "LowLevel");
  for (auto& b : c.blocks) b.growth = divide(b.growth, "DenseBlock growth");
  c.bottleneck_channels = divide(c.bottleneck_channels, "Bottleneck");
  c.scale_factor = factor;
  return c;
}

void ModelConfig::validate() const {
  if (input_channels < 1) throw config_error("model config: input channels must be >= 1");
  if (lowlevel_channels < 1) throw config_error("model config: LowLevel channels must be >= 1");
  if (bottleneck_channels < 1)
    throw config_error("model config: Bottleneck channels must be >= 1");
  if (blocks.empty()) throw config_error("model config: needs at least one dense block");
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    const std::string where = "model config: DenseBlock " + std::to_string(i + 1);
    if (b.growth < 1) throw config_error(where + ": growth must be >= 1");
    if (b.kernel < 1 || b.kernel % 2 == 0)
      throw config_error(where + ": kernel must be odd and >= 1");
    if (b.layer_dilations.empty()) throw config_error(where + ": no layers");
    for (std::size_t l = 0; l < b.layer_dilations.size(); ++l)
      if (b.layer_dilations[l] < 1)
        throw config_error(where + " layer " + std::to_string(l + 1) +
                           ": dilation must be >= 1");
  }
}

int receptive_field(const ModelConfig& config) {
  config.validate();
  int extent = 1;
  extent += 1 * (3 - 1);  // LowLevel
  for (const auto& b : config.blocks)
    for (int d : b.layer_dilations) extent += d * (b.kernel - 1);
  // bottleneck is 1x1; reconstruction is a 3x3
  extent += 1 * (3 - 1);
  return extent;
}

namespace detail {

void warn_small_input(int h, int w, int fov_max) {
  static bool warned = false;
  if (!warned && (h < fov_max || w < fov_max)) {
    std::cerr << "bdss: input " << w << "x" << h << " is smaller than the largest layer"
              << " footprint " << fov_max << "x" << fov_max << "; padding dominates\n";
    warned = true;
  }
}

}  // namespace detail

}  // namespace bdss
