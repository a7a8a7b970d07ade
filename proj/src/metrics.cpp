#include "bdss/metrics.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "bdss/errors.hpp"

namespace bdss {

namespace {

constexpr double kRatioEps = 1e-12;  // zero-denominator guard, keeps ratios scale-invariant

void require_same_size(const ImageRaster& a, const ImageRaster& b, const char* op) {
  if (a.width != b.width || a.height != b.height)
    throw config_error(std::string(op) + ": image sizes " + std::to_string(a.width) + "x" +
                       std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                       std::to_string(b.height));
}

double region_mean(const ImageRaster& img, const Region& r) {
  double acc = 0.0;
  for (int y = r.y0; y < r.y0 + r.height; ++y)
    for (int x = r.x0; x < r.x0 + r.width; ++x) acc += img.at(y, x);
  return acc / (static_cast<double>(r.width) * r.height);
}

}  // namespace

void validate_region(const Region& region, const ImageRaster& image, int min_area) {
  if (region.width <= 0 || region.height <= 0 || region.x0 < 0 || region.y0 < 0 ||
      region.x0 + region.width > image.width || region.y0 + region.height > image.height)
    throw config_error("region '" + region.name + "' (" + std::to_string(region.x0) + "," +
                       std::to_string(region.y0) + " " + std::to_string(region.width) + "x" +
                       std::to_string(region.height) + ") does not fit a " +
                       std::to_string(image.width) + "x" + std::to_string(image.height) +
                       " image");
  if (region.width * region.height < min_area)
    throw config_error("region '" + region.name + "' area " +
                       std::to_string(region.width * region.height) + " below minimum " +
                       std::to_string(min_area));
}

double psnr(const ImageRaster& reference, const ImageRaster& test, double peak) {
  require_same_size(reference, test, "psnr");
  if (peak <= 0.0) throw config_error("psnr: peak must be positive");
  double acc = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = static_cast<double>(reference.values[i]) - test.values[i];
    acc += d * d;
  }
  const double mse = acc / static_cast<double>(reference.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

double ssim(const ImageRaster& reference, const ImageRaster& test, double peak) {
  require_same_size(reference, test, "ssim");
  constexpr int kWin = 11;
  constexpr double kSigma = 1.5;
  if (reference.width < kWin || reference.height < kWin)
    throw config_error("ssim: image " + std::to_string(reference.width) + "x" +
                       std::to_string(reference.height) + " smaller than the 11x11 window");
  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);

  std::array<double, kWin> g;
  double gsum = 0.0;
  for (int i = 0; i < kWin; ++i) {
    const double d = i - (kWin - 1) / 2.0;
    g[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    gsum += g[i];
  }
  for (auto& v : g) v /= gsum;

  const int w = reference.width, h = reference.height;
  const int cols = w - kWin + 1, rows = h - kWin + 1;

  // separable pass: horizontal filter of the five products, then vertical
  const std::size_t stripe = static_cast<std::size_t>(h) * cols;
  std::vector<double> hx(stripe), hy(stripe), hxx(stripe), hyy(stripe), hxy(stripe);
  for (int y = 0; y < h; ++y) {
    for (int ox = 0; ox < cols; ++ox) {
      double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
      for (int k = 0; k < kWin; ++k) {
        const double a = reference.at(y, ox + k);
        const double b = test.at(y, ox + k);
        sx += g[k] * a;
        sy += g[k] * b;
        sxx += g[k] * a * a;
        syy += g[k] * b * b;
        sxy += g[k] * (a * b);  // parenthesized: swap-symmetric rounding
      }
      const std::size_t idx = static_cast<std::size_t>(y) * cols + ox;
      hx[idx] = sx;
      hy[idx] = sy;
      hxx[idx] = sxx;
      hyy[idx] = syy;
      hxy[idx] = sxy;
    }
  }
  double acc = 0.0;
  for (int oy = 0; oy < rows; ++oy) {
    for (int ox = 0; ox < cols; ++ox) {
      double mx = 0, my = 0, mxx = 0, myy = 0, mxy = 0;
      for (int k = 0; k < kWin; ++k) {
        const std::size_t idx = static_cast<std::size_t>(oy + k) * cols + ox;
        mx += g[k] * hx[idx];
        my += g[k] * hy[idx];
        mxx += g[k] * hxx[idx];
        myy += g[k] * hyy[idx];
        mxy += g[k] * hxy[idx];
      }
      const double vx = mxx - mx * mx;
      const double vy = myy - my * my;
      const double cov = mxy - mx * my;
      // parenthesized so swapping the images is bitwise symmetric
      acc += ((2.0 * (mx * my) + c1) * (2.0 * cov + c2)) /
             ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
  }
  return acc / (static_cast<double>(rows) * cols);
}

double enl(const ImageRaster& image, const Region& region) {
  validate_region(region, image, 2);
  const double n = static_cast<double>(region.width) * region.height;
  const double mu = region_mean(image, region);
  double ss = 0.0;
  for (int y = region.y0; y < region.y0 + region.height; ++y)
    for (int x = region.x0; x < region.x0 + region.width; ++x) {
      const double d = image.at(y, x) - mu;
      ss += d * d;
    }
  const double var = ss / (n - 1.0);
  if (var == 0.0)
    throw std::domain_error("enl: degenerate region '" + region.name + "' (zero variance)");
  return mu * mu / var;
}

double tcr(const ImageRaster& speckled, const ImageRaster& despeckled, const Region& patch) {
  require_same_size(speckled, despeckled, "tcr");
  validate_region(patch, speckled, 1);
  auto ratio_db = [&](const ImageRaster& img) {
    double maxv = -1.0;
    for (int y = patch.y0; y < patch.y0 + patch.height; ++y)
      for (int x = patch.x0; x < patch.x0 + patch.width; ++x)
        maxv = std::max(maxv, static_cast<double>(img.at(y, x)));
    const double meanv = region_mean(img, patch);
    if (meanv <= 0.0)
      throw std::domain_error("tcr: non-positive mean in patch '" + patch.name + "'");
    return 20.0 * std::log10(maxv / meanv);
  };
  return std::abs(ratio_db(despeckled) - ratio_db(speckled));
}

namespace {

// Sum over the region of |horizontal ratio / vertical ratio|; pixels on the
// region's last row/column have no neighbor and are excluded.
double edge_ratio_sum(const ImageRaster& img, const Region& r) {
  double acc = 0.0;
  for (int y = r.y0; y < r.y0 + r.height - 1; ++y) {
    for (int x = r.x0; x < r.x0 + r.width - 1; ++x) {
      const double v = img.at(y, x);
      const double eh = v / std::max(static_cast<double>(img.at(y, x + 1)), kRatioEps);
      const double ev = v / std::max(static_cast<double>(img.at(y + 1, x)), kRatioEps);
      acc += std::abs(eh / std::max(std::abs(ev), kRatioEps));
    }
  }
  return acc;
}

double directional_sum(const ImageRaster& img, const Region& r, bool horizontal) {
  double acc = 0.0;
  const int ylim = r.y0 + r.height - (horizontal ? 0 : 1);
  const int xlim = r.x0 + r.width - (horizontal ? 1 : 0);
  for (int y = r.y0; y < ylim; ++y)
    for (int x = r.x0; x < xlim; ++x) {
      const double v = img.at(y, x);
      const double next = horizontal ? img.at(y, x + 1) : img.at(y + 1, x);
      acc += std::abs(v / std::max(next, kRatioEps));
    }
  return acc;
}

}  // namespace

double epd_roa(const ImageRaster& speckled, const ImageRaster& despeckled, const Region& region) {
  require_same_size(speckled, despeckled, "epd_roa");
  validate_region(region, speckled, 4);
  if (region.width < 2 || region.height < 2)
    throw config_error("epd_roa: region '" + region.name + "' must be at least 2x2");
  const double num = edge_ratio_sum(despeckled, region);
  const double den = edge_ratio_sum(speckled, region);
  return num / std::max(den, kRatioEps);
}

EpdDirectional epd_roa_directional(const ImageRaster& speckled, const ImageRaster& despeckled,
                                   const Region& region) {
  require_same_size(speckled, despeckled, "epd_roa");
  validate_region(region, speckled, 4);
  if (region.width < 2 || region.height < 2)
    throw config_error("epd_roa: region '" + region.name + "' must be at least 2x2");
  EpdDirectional out;
  out.horizontal = directional_sum(despeckled, region, true) /
                   std::max(directional_sum(speckled, region, true), kRatioEps);
  out.vertical = directional_sum(despeckled, region, false) /
                 std::max(directional_sum(speckled, region, false), kRatioEps);
  return out;
}

double mor(const ImageRaster& speckled, const ImageRaster& despeckled, const Region& region) {
  require_same_size(speckled, despeckled, "mor");
  validate_region(region, speckled, 1);
  const double ms = region_mean(speckled, region);
  if (ms <= 0.0)
    throw std::domain_error("mor: non-positive speckled mean in region '" + region.name + "'");
  return region_mean(despeckled, region) / ms;
}

RegionFile read_region_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error(path + ": cannot open for reading");
  RegionFile out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    const bool is_target = tok.size() == 6 && tok[1] == "point";
    if (!is_target && tok.size() != 5)
      throw io_error(path + ":" + std::to_string(lineno) +
                     ": expected `name x0 y0 w h` or `name point x0 y0 w h`");
    Region r;
    r.name = tok[0];
    try {
      const int base = is_target ? 2 : 1;
      r.x0 = std::stoi(tok[base]);
      r.y0 = std::stoi(tok[base + 1]);
      r.width = std::stoi(tok[base + 2]);
      r.height = std::stoi(tok[base + 3]);
    } catch (const std::exception&) {
      throw io_error(path + ":" + std::to_string(lineno) + ": non-integer region field");
    }
    (is_target ? out.targets : out.regions).push_back(std::move(r));
  }
  return out;
}

void MetricReport::append_means() {
  std::vector<std::string> seen;
  for (const auto& row : rows) {
    if (row.image == "mean") continue;
    bool found = false;
    for (const auto& s : seen) found = found || s == row.index;
    if (!found) seen.push_back(row.index);
  }
  for (const auto& index : seen) {
    double acc = 0.0;
    int count = 0;
    for (const auto& row : rows) {
      if (row.image == "mean" || row.index != index) continue;
      acc += row.value;
      ++count;
    }
    if (count > 0) rows.push_back({"mean", index, "", acc / count});
  }
}

std::string MetricReport::to_csv() const {
  std::string out = "image,index,region,value\n";
  char buf[64];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%.9g", row.value);
    out += row.image + "," + row.index + "," + row.region + "," + buf + "\n";
  }
  return out;
}

void MetricReport::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  const std::string csv = to_csv();
  out.write(csv.data(), static_cast<std::streamsize>(csv.size()));
  if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace bdss
