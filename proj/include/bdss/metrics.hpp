#pragma once

#include <string>
#include <vector>

#include "bdss/raster.hpp"

namespace bdss {

struct Region {
  std::string name;
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;
};

// Bounds and area checks; throws config_error when the region does not fit.
void validate_region(const Region& region, const ImageRaster& image, int min_area = 2);

inline constexpr double kPsnrCap = 99.0;  // reported when MSE is exactly zero

// 10*log10(peak^2 / MSE), capped at 99 dB for identical images.
double psnr(const ImageRaster& reference, const ImageRaster& test, double peak = 1.0);

// Mean local SSIM, 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03.
double ssim(const ImageRaster& reference, const ImageRaster& test, double peak = 1.0);

// Equivalent number of looks over a homogeneous region: mean^2 / variance
// (unbiased variance). Zero variance is a degenerate-region error.
double enl(const ImageRaster& image, const Region& region);

// Absolute dB change of the patch max/mean ratio before vs after despeckling.
double tcr(const ImageRaster& speckled, const ImageRaster& despeckled, const Region& patch);

// Edge preservation degree, ratio-of-average form: sums of |horizontal ratio /
// vertical ratio| over the despeckled region divided by the same sum over the
// speckled region. Ideal value 1.
double epd_roa(const ImageRaster& speckled, const ImageRaster& despeckled, const Region& region);

// Per-direction variant (separate horizontal and vertical edge ratios),
// offered alongside the combined form above.
struct EpdDirectional {
  double horizontal = 0.0;
  double vertical = 0.0;
};
EpdDirectional epd_roa_directional(const ImageRaster& speckled, const ImageRaster& despeckled,
                                   const Region& region);

// Mean of ratio: mean(despeckled) / mean(speckled) over the region. Ideal 1.
double mor(const ImageRaster& speckled, const ImageRaster& despeckled, const Region& region);

// Region spec file: one entry per line, `name x0 y0 w h` for regions and
// `name point x0 y0 w h` for point-target patches. '#' starts a comment.
struct RegionFile {
  std::vector<Region> regions;
  std::vector<Region> targets;
};
RegionFile read_region_file(const std::string& path);

struct MetricRow {
  std::string image;
  std::string index;
  std::string region;
  double value = 0.0;
};

struct MetricReport {
  std::vector<MetricRow> rows;

  // Appends one `mean` row per index, mirroring the Mean rows of the tables.
  void append_means();
  // Fixed schema: header `image,index,region,value`, `%.9g` values.
  void write_csv(const std::string& path) const;
  std::string to_csv() const;
};

}  // namespace bdss
