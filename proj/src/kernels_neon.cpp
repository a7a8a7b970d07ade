// NEON kernel table for aarch64 (NEON is baseline there, no extra flags).

#include "kernel_tables.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>

namespace bdss::kernels {
namespace {

// ---- float ----

void axpy_f(std::size_t n, float a, const float* x, float* y) {
  const float32x4_t va = vdupq_n_f32(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) vst1q_f32(y + i, vfmaq_f32(vld1q_f32(y + i), va, vld1q_f32(x + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

float dot_f(std::size_t n, const float* a, const float* b) {
  float32x4_t acc = vdupq_n_f32(0.0f);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = vfmaq_f32(acc, vld1q_f32(a + i), vld1q_f32(b + i));
  float r = vaddvq_f32(acc);
  for (; i < n; ++i) r += a[i] * b[i];
  return r;
}

void add_f(std::size_t n, const float* a, const float* b, float* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) vst1q_f32(out + i, vaddq_f32(vld1q_f32(a + i), vld1q_f32(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_f(std::size_t n, const float* a, const float* b, float* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) vst1q_f32(out + i, vsubq_f32(vld1q_f32(a + i), vld1q_f32(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_f(std::size_t n, const float* a, const float* b, float* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) vst1q_f32(out + i, vmulq_f32(vld1q_f32(a + i), vld1q_f32(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void mul_acc_f(std::size_t n, const float* a, const float* b, float* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    vst1q_f32(out + i, vfmaq_f32(vld1q_f32(out + i), vld1q_f32(a + i), vld1q_f32(b + i)));
  for (; i < n; ++i) out[i] += a[i] * b[i];
}

void scale_f(std::size_t n, float a, const float* x, float* out) {
  const float32x4_t va = vdupq_n_f32(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) vst1q_f32(out + i, vmulq_f32(va, vld1q_f32(x + i)));
  for (; i < n; ++i) out[i] = a * x[i];
}

void add_scalar_f(std::size_t n, float a, float* out) {
  const float32x4_t va = vdupq_n_f32(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) vst1q_f32(out + i, vaddq_f32(va, vld1q_f32(out + i)));
  for (; i < n; ++i) out[i] += a;
}

float sum_f(std::size_t n, const float* x) {
  float32x4_t acc = vdupq_n_f32(0.0f);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = vaddq_f32(acc, vld1q_f32(x + i));
  float r = vaddvq_f32(acc);
  for (; i < n; ++i) r += x[i];
  return r;
}

float sum_sq_diff_f(std::size_t n, const float* a, const float* b) {
  float32x4_t acc = vdupq_n_f32(0.0f);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t d = vsubq_f32(vld1q_f32(a + i), vld1q_f32(b + i));
    acc = vfmaq_f32(acc, d, d);
  }
  float r = vaddvq_f32(acc);
  for (; i < n; ++i) {
    const float d = a[i] - b[i];
    r += d * d;
  }
  return r;
}

void prelu_f(std::size_t n, const float* x, float slope, float* out) {
  const float32x4_t vs = vdupq_n_f32(slope);
  const float32x4_t zero = vdupq_n_f32(0.0f);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t vx = vld1q_f32(x + i);
    const uint32x4_t ge = vcgeq_f32(vx, zero);
    vst1q_f32(out + i, vbslq_f32(ge, vx, vmulq_f32(vs, vx)));
  }
  for (; i < n; ++i) out[i] = x[i] >= 0 ? x[i] : slope * x[i];
}

float prelu_grad_f(std::size_t n, const float* x, const float* gy, float slope, float* gx) {
  const float32x4_t vs = vdupq_n_f32(slope);
  const float32x4_t one = vdupq_n_f32(1.0f);
  const float32x4_t zero = vdupq_n_f32(0.0f);
  float32x4_t acc = vdupq_n_f32(0.0f);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t vx = vld1q_f32(x + i);
    const float32x4_t vg = vld1q_f32(gy + i);
    const uint32x4_t ge = vcgeq_f32(vx, zero);
    vst1q_f32(gx + i, vfmaq_f32(vld1q_f32(gx + i), vg, vbslq_f32(ge, one, vs)));
    acc = vaddq_f32(acc, vbslq_f32(ge, zero, vmulq_f32(vg, vx)));
  }
  float gs = vaddvq_f32(acc);
  for (; i < n; ++i) {
    if (x[i] >= 0) {
      gx[i] += gy[i];
    } else {
      gx[i] += slope * gy[i];
      gs += gy[i] * x[i];
    }
  }
  return gs;
}

void adam_f(std::size_t n, float* p, const float* g, float* m, float* v, float lr, float b1,
            float b2, float eps, float bc1, float bc2) {
  const float32x4_t vb1 = vdupq_n_f32(b1);
  const float32x4_t vb2 = vdupq_n_f32(b2);
  const float32x4_t vc1 = vdupq_n_f32(1.0f - b1);
  const float32x4_t vc2 = vdupq_n_f32(1.0f - b2);
  const float32x4_t vlr = vdupq_n_f32(lr);
  const float32x4_t veps = vdupq_n_f32(eps);
  const float32x4_t vbc1 = vdupq_n_f32(bc1);
  const float32x4_t vbc2 = vdupq_n_f32(bc2);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t vg = vld1q_f32(g + i);
    float32x4_t vm = vfmaq_f32(vmulq_f32(vc1, vg), vb1, vld1q_f32(m + i));
    float32x4_t vv = vfmaq_f32(vmulq_f32(vc2, vmulq_f32(vg, vg)), vb2, vld1q_f32(v + i));
    vst1q_f32(m + i, vm);
    vst1q_f32(v + i, vv);
    const float32x4_t den = vaddq_f32(vsqrtq_f32(vmulq_f32(vv, vbc2)), veps);
    const float32x4_t step = vdivq_f32(vmulq_f32(vlr, vmulq_f32(vm, vbc1)), den);
    vst1q_f32(p + i, vsubq_f32(vld1q_f32(p + i), step));
  }
  for (; i < n; ++i) {
    m[i] = b1 * m[i] + (1.0f - b1) * g[i];
    v[i] = b2 * v[i] + (1.0f - b2) * g[i] * g[i];
    p[i] -= lr * (m[i] * bc1) / (std::sqrt(v[i] * bc2) + eps);
  }
}

// ---- double ----

void axpy_d(std::size_t n, double a, const double* x, double* y) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

double dot_d(std::size_t n, const double* a, const double* b) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
  double r = vaddvq_f64(acc);
  for (; i < n; ++i) r += a[i] * b[i];
  return r;
}

void add_d(std::size_t n, const double* a, const double* b, double* out) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_d(std::size_t n, const double* a, const double* b, double* out) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_d(std::size_t n, const double* a, const double* b, double* out) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void mul_acc_d(std::size_t n, const double* a, const double* b, double* out) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vfmaq_f64(vld1q_f64(out + i), vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] += a[i] * b[i];
}

void scale_d(std::size_t n, double a, const double* x, double* out) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vmulq_f64(va, vld1q_f64(x + i)));
  for (; i < n; ++i) out[i] = a * x[i];
}

void add_scalar_d(std::size_t n, double a, double* out) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vaddq_f64(va, vld1q_f64(out + i)));
  for (; i < n; ++i) out[i] += a;
}

double sum_d(std::size_t n, const double* x) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(x + i));
  double r = vaddvq_f64(acc);
  for (; i < n; ++i) r += x[i];
  return r;
}

double sum_sq_diff_d(std::size_t n, const double* a, const double* b) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vfmaq_f64(acc, d, d);
  }
  double r = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    r += d * d;
  }
  return r;
}

void prelu_d(std::size_t n, const double* x, double slope, double* out) {
  const float64x2_t vs = vdupq_n_f64(slope);
  const float64x2_t zero = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t vx = vld1q_f64(x + i);
    vst1q_f64(out + i, vbslq_f64(vcgeq_f64(vx, zero), vx, vmulq_f64(vs, vx)));
  }
  for (; i < n; ++i) out[i] = x[i] >= 0 ? x[i] : slope * x[i];
}

double prelu_grad_d(std::size_t n, const double* x, const double* gy, double slope, double* gx) {
  const float64x2_t vs = vdupq_n_f64(slope);
  const float64x2_t one = vdupq_n_f64(1.0);
  const float64x2_t zero = vdupq_n_f64(0.0);
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t vx = vld1q_f64(x + i);
    const float64x2_t vg = vld1q_f64(gy + i);
    const uint64x2_t ge = vcgeq_f64(vx, zero);
    vst1q_f64(gx + i, vfmaq_f64(vld1q_f64(gx + i), vg, vbslq_f64(ge, one, vs)));
    acc = vaddq_f64(acc, vbslq_f64(ge, zero, vmulq_f64(vg, vx)));
  }
  double gs = vaddvq_f64(acc);
  for (; i < n; ++i) {
    if (x[i] >= 0) {
      gx[i] += gy[i];
    } else {
      gx[i] += slope * gy[i];
      gs += gy[i] * x[i];
    }
  }
  return gs;
}

void adam_d(std::size_t n, double* p, const double* g, double* m, double* v, double lr, double b1,
            double b2, double eps, double bc1, double bc2) {
  const float64x2_t vb1 = vdupq_n_f64(b1);
  const float64x2_t vb2 = vdupq_n_f64(b2);
  const float64x2_t vc1 = vdupq_n_f64(1.0 - b1);
  const float64x2_t vc2 = vdupq_n_f64(1.0 - b2);
  const float64x2_t vlr = vdupq_n_f64(lr);
  const float64x2_t veps = vdupq_n_f64(eps);
  const float64x2_t vbc1 = vdupq_n_f64(bc1);
  const float64x2_t vbc2 = vdupq_n_f64(bc2);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t vg = vld1q_f64(g + i);
    float64x2_t vm = vfmaq_f64(vmulq_f64(vc1, vg), vb1, vld1q_f64(m + i));
    float64x2_t vv = vfmaq_f64(vmulq_f64(vc2, vmulq_f64(vg, vg)), vb2, vld1q_f64(v + i));
    vst1q_f64(m + i, vm);
    vst1q_f64(v + i, vv);
    const float64x2_t den = vaddq_f64(vsqrtq_f64(vmulq_f64(vv, vbc2)), veps);
    const float64x2_t step = vdivq_f64(vmulq_f64(vlr, vmulq_f64(vm, vbc1)), den);
    vst1q_f64(p + i, vsubq_f64(vld1q_f64(p + i), step));
  }
  for (; i < n; ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    p[i] -= lr * (m[i] * bc1) / (std::sqrt(v[i] * bc2) + eps);
  }
}

const Table<float> kF32 = {axpy_f, dot_f,       add_f,  sub_f,        mul_f,   mul_acc_f,
                           scale_f, add_scalar_f, sum_f, sum_sq_diff_f, prelu_f, prelu_grad_f,
                           adam_f};
const Table<double> kF64 = {axpy_d, dot_d,       add_d,  sub_d,        mul_d,   mul_acc_d,
                            scale_d, add_scalar_d, sum_d, sum_sq_diff_d, prelu_d, prelu_grad_d,
                            adam_d};

}  // namespace

const Table<float>* neon_f32() { return &kF32; }
const Table<double>* neon_f64() { return &kF64; }

}  // namespace bdss::kernels

#else

namespace bdss::kernels {
const Table<float>* neon_f32() { return nullptr; }
const Table<double>* neon_f64() { return nullptr; }
}  // namespace bdss::kernels

#endif
