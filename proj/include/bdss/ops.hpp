#pragma once

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "bdss/kernels.hpp"
#include "bdss/parallel.hpp"
#include "bdss/tensor.hpp"

namespace bdss {

// One-side extent of a single dilated layer's input footprint: (r+1)*l - 1.
// Reduces to r at l = 1.
int field_of_view(int kernel_extent, int dilation);

template <typename T>
struct ConvWeights {
  Tensor<T> kernel;  // (out_channels, in_channels, k, k)
  Tensor<T> bias;    // (out_channels)
  int dilation = 1;
  int padding = 0;
};

struct ConvGeometry {
  int batch, in_channels, in_h, in_w;
  int out_channels, k, dilation, padding;
  int out_h, out_w;
};

ConvGeometry conv_geometry(const Shape& input, const Shape& kernel, const Shape& bias,
                           int dilation, int padding);

namespace detail {

// Zero-padded dilated cross-correlation. All inner loops run over contiguous
// row segments so the dispatched axpy/dot kernels carry the arithmetic.
template <typename T>
void conv2d_forward(const ConvGeometry& g, const T* in, const T* kernel, const T* bias, T* out) {
  const auto& K = kernels::active<T>();
  const std::size_t in_plane = static_cast<std::size_t>(g.in_h) * g.in_w;
  const std::size_t out_plane = static_cast<std::size_t>(g.out_h) * g.out_w;
  parallel_for(0, static_cast<std::int64_t>(g.batch) * g.out_channels,
               [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t bc = lo; bc < hi; ++bc) {
      const int b = static_cast<int>(bc / g.out_channels);
      const int co = static_cast<int>(bc % g.out_channels);
      T* out_p = out + static_cast<std::size_t>(bc) * out_plane;
      std::fill(out_p, out_p + out_plane, bias[co]);
      for (int ci = 0; ci < g.in_channels; ++ci) {
        const T* in_p = in + (static_cast<std::size_t>(b) * g.in_channels + ci) * in_plane;
        const T* kp =
            kernel + (static_cast<std::size_t>(co) * g.in_channels + ci) * g.k * g.k;
        for (int ky = 0; ky < g.k; ++ky) {
          const int iy_off = ky * g.dilation - g.padding;
          const int oy0 = std::max(0, -iy_off);
          const int oy1 = std::min(g.out_h, g.in_h - iy_off);
          for (int kx = 0; kx < g.k; ++kx) {
            const T w = kp[ky * g.k + kx];
            const int ix_off = kx * g.dilation - g.padding;
            const int ox0 = std::max(0, -ix_off);
            const int ox1 = std::min(g.out_w, g.in_w - ix_off);
            if (ox0 >= ox1) continue;
            for (int oy = oy0; oy < oy1; ++oy) {
              K.axpy(static_cast<std::size_t>(ox1 - ox0), w,
                     in_p + static_cast<std::size_t>(oy + iy_off) * g.in_w + ox0 + ix_off,
                     out_p + static_cast<std::size_t>(oy) * g.out_w + ox0);
            }
          }
        }
      }
    }
  });
}

template <typename T>
void conv2d_backward_input(const ConvGeometry& g, const T* gout, const T* kernel, T* gin) {
  const auto& K = kernels::active<T>();
  const std::size_t in_plane = static_cast<std::size_t>(g.in_h) * g.in_w;
  const std::size_t out_plane = static_cast<std::size_t>(g.out_h) * g.out_w;
  parallel_for(0, static_cast<std::int64_t>(g.batch) * g.in_channels,
               [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t bc = lo; bc < hi; ++bc) {
      const int b = static_cast<int>(bc / g.in_channels);
      const int ci = static_cast<int>(bc % g.in_channels);
      T* gin_p = gin + static_cast<std::size_t>(bc) * in_plane;
      for (int co = 0; co < g.out_channels; ++co) {
        const T* gout_p =
            gout + (static_cast<std::size_t>(b) * g.out_channels + co) * out_plane;
        const T* kp =
            kernel + (static_cast<std::size_t>(co) * g.in_channels + ci) * g.k * g.k;
        for (int ky = 0; ky < g.k; ++ky) {
          const int iy_off = ky * g.dilation - g.padding;
          const int oy0 = std::max(0, -iy_off);
          const int oy1 = std::min(g.out_h, g.in_h - iy_off);
          for (int kx = 0; kx < g.k; ++kx) {
            const T w = kp[ky * g.k + kx];
            const int ix_off = kx * g.dilation - g.padding;
            const int ox0 = std::max(0, -ix_off);
            const int ox1 = std::min(g.out_w, g.in_w - ix_off);
            if (ox0 >= ox1) continue;
            for (int oy = oy0; oy < oy1; ++oy) {
              K.axpy(static_cast<std::size_t>(ox1 - ox0), w,
                     gout_p + static_cast<std::size_t>(oy) * g.out_w + ox0,
                     gin_p + static_cast<std::size_t>(oy + iy_off) * g.in_w + ox0 + ix_off);
            }
          }
        }
      }
    }
  });
}

template <typename T>
void conv2d_backward_weight(const ConvGeometry& g, const T* gout, const T* in, T* gkernel) {
  const auto& K = kernels::active<T>();
  const std::size_t in_plane = static_cast<std::size_t>(g.in_h) * g.in_w;
  const std::size_t out_plane = static_cast<std::size_t>(g.out_h) * g.out_w;
  parallel_for(0, g.out_channels, [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t co = lo; co < hi; ++co) {
      T* gk_co = gkernel + static_cast<std::size_t>(co) * g.in_channels * g.k * g.k;
      for (int ci = 0; ci < g.in_channels; ++ci) {
        for (int ky = 0; ky < g.k; ++ky) {
          const int iy_off = ky * g.dilation - g.padding;
          const int oy0 = std::max(0, -iy_off);
          const int oy1 = std::min(g.out_h, g.in_h - iy_off);
          for (int kx = 0; kx < g.k; ++kx) {
            const int ix_off = kx * g.dilation - g.padding;
            const int ox0 = std::max(0, -ix_off);
            const int ox1 = std::min(g.out_w, g.in_w - ix_off);
            if (ox0 >= ox1) continue;
            T acc = 0;
            for (int b = 0; b < g.batch; ++b) {
              const T* gout_p =
                  gout + (static_cast<std::size_t>(b) * g.out_channels + co) * out_plane;
              const T* in_p =
                  in + (static_cast<std::size_t>(b) * g.in_channels + ci) * in_plane;
              for (int oy = oy0; oy < oy1; ++oy) {
                acc += K.dot(static_cast<std::size_t>(ox1 - ox0),
                             gout_p + static_cast<std::size_t>(oy) * g.out_w + ox0,
                             in_p + static_cast<std::size_t>(oy + iy_off) * g.in_w + ox0 +
                                 ix_off);
              }
            }
            gk_co[(ci * g.k + ky) * g.k + kx] += acc;
          }
        }
      }
    }
  });
}

template <typename T>
void conv2d_backward_bias(const ConvGeometry& g, const T* gout, T* gbias) {
  const auto& K = kernels::active<T>();
  const std::size_t out_plane = static_cast<std::size_t>(g.out_h) * g.out_w;
  for (int co = 0; co < g.out_channels; ++co) {
    T acc = 0;
    for (int b = 0; b < g.batch; ++b)
      acc += K.sum(out_plane,
                   gout + (static_cast<std::size_t>(b) * g.out_channels + co) * out_plane);
    gbias[co] += acc;
  }
}

template <typename T>
void accumulate(typename Tensor<T>::Node& parent, const T* g, std::size_t n, T factor = T(1)) {
  Tensor<T>::Node::ensure_grad(parent);
  kernels::active<T>().axpy(n, factor, g, parent.grad.data());
}

}  // namespace detail

// Dilated 2D convolution with zero padding: out = input (*_l) kernel + bias.
// Output extent is H + 2*padding - dilation*(k-1).
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const ConvWeights<T>& w) {
  const ConvGeometry g =
      conv_geometry(input.shape(), w.kernel.shape(), w.bias.shape(), w.dilation, w.padding);
  std::vector<T> out(static_cast<std::size_t>(g.batch) * g.out_channels * g.out_h * g.out_w);
  detail::conv2d_forward(g, input.data().data(), w.kernel.data().data(), w.bias.data().data(),
                         out.data());
  return Tensor<T>::make_node(
      {g.batch, g.out_channels, g.out_h, g.out_w}, std::move(out), {input, w.kernel, w.bias},
      [g](typename Tensor<T>::Node& self) {
        const T* gout = self.grad.data();
        auto& in_node = *self.parents[0].node();
        auto& k_node = *self.parents[1].node();
        auto& b_node = *self.parents[2].node();
        if (in_node.requires_grad) {
          Tensor<T>::Node::ensure_grad(in_node);
          detail::conv2d_backward_input(g, gout, k_node.values.data(), in_node.grad.data());
        }
        if (k_node.requires_grad) {
          Tensor<T>::Node::ensure_grad(k_node);
          detail::conv2d_backward_weight(g, gout, in_node.values.data(), k_node.grad.data());
        }
        if (b_node.requires_grad) {
          Tensor<T>::Node::ensure_grad(b_node);
          detail::conv2d_backward_bias(g, gout, b_node.grad.data());
        }
      });
}

// PReLU: x where x >= 0, slope*x otherwise. A single-element slope broadcasts
// over the whole tensor; otherwise slopes are per channel (dim 1).
// The derivative at exactly x = 0 takes the positive branch.
template <typename T>
Tensor<T> prelu(const Tensor<T>& x, const Tensor<T>& slopes) {
  const bool broadcast = slopes.numel() == 1;
  int channels = 1;
  std::size_t plane = x.numel();
  std::size_t outer = 1;
  if (!broadcast) {
    if (x.rank() < 2 || slopes.rank() != 1 || slopes.dim(0) != x.dim(1))
      throw config_error("prelu: got " + std::to_string(slopes.numel()) + " slopes for shape " +
                         shape_str(x.shape()));
    channels = x.dim(1);
    outer = static_cast<std::size_t>(x.dim(0)) * channels;
    plane = x.numel() / outer;
  }
  std::vector<T> out(x.numel());
  const auto& K = kernels::active<T>();
  const T* xv = x.data().data();
  const T* sv = slopes.data().data();
  for (std::size_t o = 0; o < outer; ++o)
    K.prelu(plane, xv + o * plane, sv[broadcast ? 0 : o % channels], out.data() + o * plane);
  return Tensor<T>::make_node(
      x.shape(), std::move(out), {x, slopes},
      [broadcast, channels, plane, outer](typename Tensor<T>::Node& self) {
        auto& x_node = *self.parents[0].node();
        auto& s_node = *self.parents[1].node();
        const auto& K = kernels::active<T>();
        const T* xv = x_node.values.data();
        const T* sv = s_node.values.data();
        const T* gy = self.grad.data();
        const bool want_x = x_node.requires_grad;
        const bool want_s = s_node.requires_grad;
        if (want_x) Tensor<T>::Node::ensure_grad(x_node);
        if (want_s) Tensor<T>::Node::ensure_grad(s_node);
        std::vector<T> scratch;
        for (std::size_t o = 0; o < outer; ++o) {
          const std::size_t c = broadcast ? 0 : o % channels;
          T* gx = nullptr;
          if (want_x) {
            gx = x_node.grad.data() + o * plane;
          } else {
            scratch.assign(plane, T(0));
            gx = scratch.data();
          }
          const T gs = K.prelu_grad(plane, xv + o * plane, gy + o * plane, sv[c], gx);
          if (want_s) s_node.grad[c] += gs;
        }
      });
}

// Channel-axis concatenation of rank-4 tensors sharing batch and spatial dims.
template <typename T>
Tensor<T> concat_channels(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) throw config_error("concat_channels: empty part list");
  const int batch = parts[0].dim(0);
  const int h = parts[0].rank() == 4 ? parts[0].dim(2) : 0;
  const int w = parts[0].rank() == 4 ? parts[0].dim(3) : 0;
  int total_c = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& p = parts[i];
    if (p.rank() != 4)
      throw config_error("concat_channels: part " + std::to_string(i) + " has shape " +
                         shape_str(p.shape()) + ", want rank 4");
    if (p.dim(0) != batch || p.dim(2) != h || p.dim(3) != w)
      throw config_error("concat_channels: part " + std::to_string(i) + " shape " +
                         shape_str(p.shape()) + " does not match " +
                         shape_str(parts[0].shape()));
    total_c += p.dim(1);
  }
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  std::vector<T> out(static_cast<std::size_t>(batch) * total_c * plane);
  int c0 = 0;
  for (const auto& p : parts) {
    const int pc = p.dim(1);
    const T* pv = p.data().data();
    for (int b = 0; b < batch; ++b) {
      std::memcpy(out.data() + (static_cast<std::size_t>(b) * total_c + c0) * plane,
                  pv + static_cast<std::size_t>(b) * pc * plane, sizeof(T) * pc * plane);
    }
    c0 += pc;
  }
  return Tensor<T>::make_node(
      {batch, total_c, h, w}, std::move(out), parts,
      [batch, total_c, plane](typename Tensor<T>::Node& self) {
        const T* gy = self.grad.data();
        int c0 = 0;
        for (auto& parent : self.parents) {
          auto& p = *parent.node();
          const int pc = p.shape[1];
          if (p.requires_grad) {
            Tensor<T>::Node::ensure_grad(p);
            for (int b = 0; b < batch; ++b) {
              kernels::active<T>().axpy(
                  static_cast<std::size_t>(pc) * plane, T(1),
                  gy + (static_cast<std::size_t>(b) * total_c + c0) * plane,
                  p.grad.data() + static_cast<std::size_t>(b) * pc * plane);
            }
          }
          c0 += pc;
        }
      });
}

// Contiguous channel slice [first, first+count) of a rank-4 tensor.
template <typename T>
Tensor<T> slice_channels(const Tensor<T>& x, int first, int count) {
  if (x.rank() != 4) throw config_error("slice_channels: want rank 4, got " + shape_str(x.shape()));
  const int c = x.dim(1);
  if (first < 0 || count < 1 || first + count > c)
    throw config_error("slice_channels: [" + std::to_string(first) + "," +
                       std::to_string(first + count) + ") out of " + std::to_string(c) +
                       " channels");
  const int batch = x.dim(0);
  const std::size_t plane = static_cast<std::size_t>(x.dim(2)) * x.dim(3);
  std::vector<T> out(static_cast<std::size_t>(batch) * count * plane);
  const T* xv = x.data().data();
  for (int b = 0; b < batch; ++b) {
    std::memcpy(out.data() + static_cast<std::size_t>(b) * count * plane,
                xv + (static_cast<std::size_t>(b) * c + first) * plane,
                sizeof(T) * count * plane);
  }
  return Tensor<T>::make_node(
      {batch, count, x.dim(2), x.dim(3)}, std::move(out), {x},
      [batch, c, first, count, plane](typename Tensor<T>::Node& self) {
        auto& p = *self.parents[0].node();
        if (!p.requires_grad) return;
        Tensor<T>::Node::ensure_grad(p);
        for (int b = 0; b < batch; ++b) {
          kernels::active<T>().axpy(
              static_cast<std::size_t>(count) * plane, T(1),
              self.grad.data() + static_cast<std::size_t>(b) * count * plane,
              p.grad.data() + (static_cast<std::size_t>(b) * c + first) * plane);
        }
      });
}

namespace detail {
template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.shape() != b.shape())
    throw config_error(std::string(op) + ": shape " + shape_str(a.shape()) + " vs " +
                       shape_str(b.shape()));
}
}  // namespace detail

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require_same_shape(a, b, "add");
  std::vector<T> out(a.numel());
  kernels::active<T>().add(a.numel(), a.data().data(), b.data().data(), out.data());
  return Tensor<T>::make_node(a.shape(), std::move(out), {a, b},
                              [](typename Tensor<T>::Node& self) {
                                for (auto& parent : self.parents) {
                                  auto& p = *parent.node();
                                  if (p.requires_grad)
                                    detail::accumulate<T>(p, self.grad.data(), self.grad.size());
                                }
                              });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require_same_shape(a, b, "sub");
  std::vector<T> out(a.numel());
  kernels::active<T>().sub(a.numel(), a.data().data(), b.data().data(), out.data());
  return Tensor<T>::make_node(a.shape(), std::move(out), {a, b},
                              [](typename Tensor<T>::Node& self) {
                                auto& pa = *self.parents[0].node();
                                auto& pb = *self.parents[1].node();
                                if (pa.requires_grad)
                                  detail::accumulate<T>(pa, self.grad.data(), self.grad.size());
                                if (pb.requires_grad)
                                  detail::accumulate<T>(pb, self.grad.data(), self.grad.size(),
                                                        T(-1));
                              });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require_same_shape(a, b, "mul");
  std::vector<T> out(a.numel());
  kernels::active<T>().mul(a.numel(), a.data().data(), b.data().data(), out.data());
  return Tensor<T>::make_node(
      a.shape(), std::move(out), {a, b}, [](typename Tensor<T>::Node& self) {
        auto& pa = *self.parents[0].node();
        auto& pb = *self.parents[1].node();
        const auto& K = kernels::active<T>();
        if (pa.requires_grad) {
          Tensor<T>::Node::ensure_grad(pa);
          K.mul_acc(self.grad.size(), self.grad.data(), pb.values.data(), pa.grad.data());
        }
        if (pb.requires_grad) {
          Tensor<T>::Node::ensure_grad(pb);
          K.mul_acc(self.grad.size(), self.grad.data(), pa.values.data(), pb.grad.data());
        }
      });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor) {
  std::vector<T> out(x.numel());
  kernels::active<T>().scale(x.numel(), factor, x.data().data(), out.data());
  return Tensor<T>::make_node(x.shape(), std::move(out), {x},
                              [factor](typename Tensor<T>::Node& self) {
                                auto& p = *self.parents[0].node();
                                if (p.requires_grad)
                                  detail::accumulate<T>(p, self.grad.data(), self.grad.size(),
                                                        factor);
                              });
}

// Mean over all elements, as a single-element tensor.
template <typename T>
Tensor<T> mean(const Tensor<T>& x) {
  const std::size_t n = x.numel();
  const T m = kernels::active<T>().sum(n, x.data().data()) / static_cast<T>(n);
  return Tensor<T>::make_node({1}, {m}, {x}, [n](typename Tensor<T>::Node& self) {
    auto& p = *self.parents[0].node();
    if (!p.requires_grad) return;
    Tensor<T>::Node::ensure_grad(p);
    kernels::active<T>().add_scalar(n, self.grad[0] / static_cast<T>(n), p.grad.data());
  });
}

template <typename T>
void check_finite(const Tensor<T>& t, const std::string& what) {
  for (T v : t.data())
    if (!std::isfinite(v)) throw std::runtime_error(what + " contains non-finite values");
}

}  // namespace bdss
