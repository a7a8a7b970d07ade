#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bdss {

// Single-channel row-major raster, nominally in [0,1].
struct ImageRaster {
  enum class Tag { clean, speckled, despeckled };

  int width = 0;
  int height = 0;
  std::vector<float> values;
  Tag tag = Tag::clean;

  static ImageRaster make(int width, int height, float fill = 0.0f,
                          Tag tag = Tag::clean);

  float at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
  float& at(int y, int x) { return values[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return values.size(); }
};

inline constexpr char kRasterMagic[4] = {'B', 'D', 'S', 'R'};
inline constexpr std::uint32_t kRasterVersion = 1;

// Reads a PGM (P5, maxval 255, mapped linearly to [0,1]) or a BDSR float
// raster, detected by magic. Parse failures throw io_error with a byte offset.
ImageRaster read_raster(const std::string& path);

// 8-bit binary PGM; values are clipped to [0,1] and quantized.
void write_pgm(const ImageRaster& raster, const std::string& path);

// BDSR float raster; round-trips bit-exactly.
void write_bdsr(const ImageRaster& raster, const std::string& path);

// Chooses the format from the extension: ".pgm" writes PGM, anything else BDSR.
void write_raster(const ImageRaster& raster, const std::string& path);

}  // namespace bdss
