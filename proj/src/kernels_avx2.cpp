// AVX2+FMA kernel table. This file is compiled with -mavx2 -mfma on x86-64;
// the dispatcher only hands these pointers out after a cpuid check.

#include "kernel_tables.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

namespace bdss::kernels {
namespace {

inline float hsum(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  lo = _mm_add_ps(lo, _mm_movehl_ps(lo, lo));
  lo = _mm_add_ss(lo, _mm_shuffle_ps(lo, lo, 1));
  return _mm_cvtss_f32(lo);
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
}

// ---- float ----

void axpy_f(std::size_t n, float a, const float* x, float* y) {
  const __m256 va = _mm256_set1_ps(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 vy = _mm256_loadu_ps(y + i);
    vy = _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), vy);
    _mm256_storeu_ps(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

float dot_f(std::size_t n, const float* a, const float* b) {
  __m256 acc = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    acc = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc);
  float r = hsum(acc);
  for (; i < n; ++i) r += a[i] * b[i];
  return r;
}

void add_f(std::size_t n, const float* a, const float* b, float* out) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(out + i, _mm256_add_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_f(std::size_t n, const float* a, const float* b, float* out) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(out + i, _mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_f(std::size_t n, const float* a, const float* b, float* out) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(out + i, _mm256_mul_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void mul_acc_f(std::size_t n, const float* a, const float* b, float* out) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256 vo = _mm256_loadu_ps(out + i);
    vo = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), vo);
    _mm256_storeu_ps(out + i, vo);
  }
  for (; i < n; ++i) out[i] += a[i] * b[i];
}

void scale_f(std::size_t n, float a, const float* x, float* out) {
  const __m256 va = _mm256_set1_ps(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(out + i, _mm256_mul_ps(va, _mm256_loadu_ps(x + i)));
  for (; i < n; ++i) out[i] = a * x[i];
}

void add_scalar_f(std::size_t n, float a, float* out) {
  const __m256 va = _mm256_set1_ps(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(out + i, _mm256_add_ps(va, _mm256_loadu_ps(out + i)));
  for (; i < n; ++i) out[i] += a;
}

float sum_f(std::size_t n, const float* x) {
  __m256 acc = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) acc = _mm256_add_ps(acc, _mm256_loadu_ps(x + i));
  float r = hsum(acc);
  for (; i < n; ++i) r += x[i];
  return r;
}

float sum_sq_diff_f(std::size_t n, const float* a, const float* b) {
  __m256 acc = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 d = _mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i));
    acc = _mm256_fmadd_ps(d, d, acc);
  }
  float r = hsum(acc);
  for (; i < n; ++i) {
    const float d = a[i] - b[i];
    r += d * d;
  }
  return r;
}

void prelu_f(std::size_t n, const float* x, float slope, float* out) {
  const __m256 vs = _mm256_set1_ps(slope);
  const __m256 zero = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 vx = _mm256_loadu_ps(x + i);
    const __m256 ge = _mm256_cmp_ps(vx, zero, _CMP_GE_OQ);
    _mm256_storeu_ps(out + i, _mm256_blendv_ps(_mm256_mul_ps(vs, vx), vx, ge));
  }
  for (; i < n; ++i) out[i] = x[i] >= 0 ? x[i] : slope * x[i];
}

float prelu_grad_f(std::size_t n, const float* x, const float* gy, float slope, float* gx) {
  const __m256 vs = _mm256_set1_ps(slope);
  const __m256 one = _mm256_set1_ps(1.0f);
  const __m256 zero = _mm256_setzero_ps();
  __m256 acc = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 vx = _mm256_loadu_ps(x + i);
    const __m256 vg = _mm256_loadu_ps(gy + i);
    const __m256 ge = _mm256_cmp_ps(vx, zero, _CMP_GE_OQ);
    const __m256 factor = _mm256_blendv_ps(vs, one, ge);
    __m256 vgx = _mm256_loadu_ps(gx + i);
    vgx = _mm256_fmadd_ps(vg, factor, vgx);
    _mm256_storeu_ps(gx + i, vgx);
    acc = _mm256_add_ps(acc, _mm256_andnot_ps(ge, _mm256_mul_ps(vg, vx)));
  }
  float gs = hsum(acc);
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
  const __m256 vb1 = _mm256_set1_ps(b1);
  const __m256 vb2 = _mm256_set1_ps(b2);
  const __m256 vc1 = _mm256_set1_ps(1.0f - b1);
  const __m256 vc2 = _mm256_set1_ps(1.0f - b2);
  const __m256 vlr = _mm256_set1_ps(lr);
  const __m256 veps = _mm256_set1_ps(eps);
  const __m256 vbc1 = _mm256_set1_ps(bc1);
  const __m256 vbc2 = _mm256_set1_ps(bc2);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 vg = _mm256_loadu_ps(g + i);
    __m256 vm = _mm256_loadu_ps(m + i);
    __m256 vv = _mm256_loadu_ps(v + i);
    vm = _mm256_fmadd_ps(vb1, vm, _mm256_mul_ps(vc1, vg));
    vv = _mm256_fmadd_ps(vb2, vv, _mm256_mul_ps(vc2, _mm256_mul_ps(vg, vg)));
    _mm256_storeu_ps(m + i, vm);
    _mm256_storeu_ps(v + i, vv);
    const __m256 den = _mm256_add_ps(_mm256_sqrt_ps(_mm256_mul_ps(vv, vbc2)), veps);
    const __m256 step = _mm256_div_ps(_mm256_mul_ps(vlr, _mm256_mul_ps(vm, vbc1)), den);
    _mm256_storeu_ps(p + i, _mm256_sub_ps(_mm256_loadu_ps(p + i), step));
  }
  for (; i < n; ++i) {
    m[i] = b1 * m[i] + (1.0f - b1) * g[i];
    v[i] = b2 * v[i] + (1.0f - b2) * g[i] * g[i];
    p[i] -= lr * (m[i] * bc1) / (std::sqrt(v[i] * bc2) + eps);
  }
}

// ---- double ----

void axpy_d(std::size_t n, double a, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

double dot_d(std::size_t n, const double* a, const double* b) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double r = hsum(acc);
  for (; i < n; ++i) r += a[i] * b[i];
  return r;
}

void add_d(std::size_t n, const double* a, const double* b, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub_d(std::size_t n, const double* a, const double* b, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul_d(std::size_t n, const double* a, const double* b, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void mul_acc_d(std::size_t n, const double* a, const double* b, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vo = _mm256_loadu_pd(out + i);
    vo = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), vo);
    _mm256_storeu_pd(out + i, vo);
  }
  for (; i < n; ++i) out[i] += a[i] * b[i];
}

void scale_d(std::size_t n, double a, const double* x, double* out) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = a * x[i];
}

void add_scalar_d(std::size_t n, double a, double* out) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_add_pd(va, _mm256_loadu_pd(out + i)));
  for (; i < n; ++i) out[i] += a;
}

double sum_d(std::size_t n, const double* x) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double r = hsum(acc);
  for (; i < n; ++i) r += x[i];
  return r;
}

double sum_sq_diff_d(std::size_t n, const double* a, const double* b) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double r = hsum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    r += d * d;
  }
  return r;
}

void prelu_d(std::size_t n, const double* x, double slope, double* out) {
  const __m256d vs = _mm256_set1_pd(slope);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    const __m256d ge = _mm256_cmp_pd(vx, zero, _CMP_GE_OQ);
    _mm256_storeu_pd(out + i, _mm256_blendv_pd(_mm256_mul_pd(vs, vx), vx, ge));
  }
  for (; i < n; ++i) out[i] = x[i] >= 0 ? x[i] : slope * x[i];
}

double prelu_grad_d(std::size_t n, const double* x, const double* gy, double slope, double* gx) {
  const __m256d vs = _mm256_set1_pd(slope);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d zero = _mm256_setzero_pd();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    const __m256d vg = _mm256_loadu_pd(gy + i);
    const __m256d ge = _mm256_cmp_pd(vx, zero, _CMP_GE_OQ);
    __m256d vgx = _mm256_loadu_pd(gx + i);
    vgx = _mm256_fmadd_pd(vg, _mm256_blendv_pd(vs, one, ge), vgx);
    _mm256_storeu_pd(gx + i, vgx);
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(ge, _mm256_mul_pd(vg, vx)));
  }
  double gs = hsum(acc);
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
  const __m256d vb1 = _mm256_set1_pd(b1);
  const __m256d vb2 = _mm256_set1_pd(b2);
  const __m256d vc1 = _mm256_set1_pd(1.0 - b1);
  const __m256d vc2 = _mm256_set1_pd(1.0 - b2);
  const __m256d vlr = _mm256_set1_pd(lr);
  const __m256d veps = _mm256_set1_pd(eps);
  const __m256d vbc1 = _mm256_set1_pd(bc1);
  const __m256d vbc2 = _mm256_set1_pd(bc2);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vg = _mm256_loadu_pd(g + i);
    __m256d vm = _mm256_loadu_pd(m + i);
    __m256d vv = _mm256_loadu_pd(v + i);
    vm = _mm256_fmadd_pd(vb1, vm, _mm256_mul_pd(vc1, vg));
    vv = _mm256_fmadd_pd(vb2, vv, _mm256_mul_pd(vc2, _mm256_mul_pd(vg, vg)));
    _mm256_storeu_pd(m + i, vm);
    _mm256_storeu_pd(v + i, vv);
    const __m256d den = _mm256_add_pd(_mm256_sqrt_pd(_mm256_mul_pd(vv, vbc2)), veps);
    const __m256d step = _mm256_div_pd(_mm256_mul_pd(vlr, _mm256_mul_pd(vm, vbc1)), den);
    _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
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

const Table<float>* avx2_f32() { return &kF32; }
const Table<double>* avx2_f64() { return &kF64; }
bool avx2_runtime_ok() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

}  // namespace bdss::kernels

#else

namespace bdss::kernels {
const Table<float>* avx2_f32() { return nullptr; }
const Table<double>* avx2_f64() { return nullptr; }
bool avx2_runtime_ok() { return false; }
}  // namespace bdss::kernels

#endif
