// Test-only oracles, kept independent of the library's compute paths.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "bdss/raster.hpp"
#include "bdss/rng.hpp"
#include "bdss/tensor.hpp"

namespace oracle {

// Literal dilated cross-correlation with zero padding: a direct quadruple
// sum per output element, no shared code with the library kernels.
template <typename T>
std::vector<T> conv2d(const std::vector<T>& in, int B, int Cin, int H, int W,
                      const std::vector<T>& kernel, int Cout, int k, const std::vector<T>& bias,
                      int dilation, int padding, int& out_h, int& out_w) {
  out_h = H + 2 * padding - dilation * (k - 1);
  out_w = W + 2 * padding - dilation * (k - 1);
  std::vector<T> out(static_cast<std::size_t>(B) * Cout * out_h * out_w, T(0));
  for (int b = 0; b < B; ++b)
    for (int co = 0; co < Cout; ++co)
      for (int oy = 0; oy < out_h; ++oy)
        for (int ox = 0; ox < out_w; ++ox) {
          T acc = bias.empty() ? T(0) : bias[co];
          for (int ci = 0; ci < Cin; ++ci)
            for (int ky = 0; ky < k; ++ky)
              for (int kx = 0; kx < k; ++kx) {
                const int iy = oy + ky * dilation - padding;
                const int ix = ox + kx * dilation - padding;
                if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
                acc += in[((static_cast<std::size_t>(b) * Cin + ci) * H + iy) * W + ix] *
                       kernel[((static_cast<std::size_t>(co) * Cin + ci) * k + ky) * k + kx];
              }
          out[((static_cast<std::size_t>(b) * Cout + co) * out_h + oy) * out_w + ox] = acc;
        }
  return out;
}

// Central finite differences through an arbitrary re-evaluation functional.
// Perturbs leaf values in place, so the functional must rebuild the graph.
struct FiniteDiffReport {
  double max_rel_err = 0.0;
  int checked = 0;
};

inline FiniteDiffReport check_gradient(bdss::Tensor<double>& leaf,
                                       const std::function<double()>& eval,
                                       const std::function<void()>& backward_fill,
                                       int probes, bdss::rng::Stream& pick,
                                       double step = 1e-6) {
  backward_fill();
  const auto analytic = leaf.grad();
  FiniteDiffReport report;
  const std::size_t n = leaf.numel();
  for (int p = 0; p < probes; ++p) {
    const std::size_t i = static_cast<std::size_t>(pick.next() % n);
    const double saved = leaf.values()[i];
    leaf.values()[i] = saved + step;
    const double up = eval();
    leaf.values()[i] = saved - step;
    const double down = eval();
    leaf.values()[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-8});
    report.max_rel_err = std::max(report.max_rel_err, std::abs(numeric - analytic[i]) / denom);
    ++report.checked;
  }
  return report;
}

// Textbook Adam on a scalar, used as the independent optimizer reference.
struct ReferenceAdam {
  double m = 0.0, v = 0.0;
  long long t = 0;

  double step(double p, double g, double lr, double b1 = 0.9, double b2 = 0.999,
              double eps = 1e-8) {
    ++t;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t));
    const double vh = v / (1 - std::pow(b2, t));
    return p - lr * mh / (std::sqrt(vh) + eps);
  }
};

// Smooth synthetic scene in [0,1]: base level plus seeded Gaussian blobs and
// a gentle gradient. Stands in for natural test imagery.
inline bdss::ImageRaster synth_scene(int height, int width, std::uint64_t seed) {
  bdss::rng::Stream stream(bdss::rng::mix(seed) ^ 0x5ce9e5u);
  bdss::ImageRaster img = bdss::ImageRaster::make(width, height, 0.0f);
  const double gx = stream.uniform_in(-0.25, 0.25);
  const double gy = stream.uniform_in(-0.25, 0.25);
  const double base = stream.uniform_in(0.25, 0.55);
  struct Blob {
    double cx, cy, amp, sigma;
  };
  std::vector<Blob> blobs;
  for (int i = 0; i < 7; ++i)
    blobs.push_back({stream.uniform_in(0, width), stream.uniform_in(0, height),
                     stream.uniform_in(-0.35, 0.45),
                     stream.uniform_in(width / 12.0, width / 3.0)});
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      double v = base + gx * (x - width / 2.0) / width + gy * (y - height / 2.0) / height;
      for (const auto& b : blobs) {
        const double dx = x - b.cx, dy = y - b.cy;
        v += b.amp * std::exp(-(dx * dx + dy * dy) / (2.0 * b.sigma * b.sigma));
      }
      img.at(y, x) = static_cast<float>(std::min(1.0, std::max(0.0, v)));
    }
  return img;
}

}  // namespace oracle
