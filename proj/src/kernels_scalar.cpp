#include <cmath>

#include "kernel_tables.hpp"

namespace bdss::kernels {
namespace {

template <typename T>
void axpy_(std::size_t n, T a, const T* x, T* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

template <typename T>
T dot_(std::size_t n, const T* a, const T* b) {
  T acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

template <typename T>
void add_(std::size_t n, const T* a, const T* b, T* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

template <typename T>
void sub_(std::size_t n, const T* a, const T* b, T* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

template <typename T>
void mul_(std::size_t n, const T* a, const T* b, T* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

template <typename T>
void mul_acc_(std::size_t n, const T* a, const T* b, T* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] += a[i] * b[i];
}

template <typename T>
void scale_(std::size_t n, T a, const T* x, T* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i];
}

template <typename T>
void add_scalar_(std::size_t n, T a, T* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] += a;
}

template <typename T>
T sum_(std::size_t n, const T* x) {
  T acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

template <typename T>
T sum_sq_diff_(std::size_t n, const T* a, const T* b) {
  T acc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const T d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

template <typename T>
void prelu_(std::size_t n, const T* x, T slope, T* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] >= 0 ? x[i] : slope * x[i];
}

template <typename T>
T prelu_grad_(std::size_t n, const T* x, const T* gy, T slope, T* gx) {
  T gs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] >= 0) {
      gx[i] += gy[i];
    } else {
      gx[i] += slope * gy[i];
      gs += gy[i] * x[i];
    }
  }
  return gs;
}

template <typename T>
void adam_(std::size_t n, T* p, const T* g, T* m, T* v, T lr, T b1, T b2, T eps, T bc1, T bc2) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = b1 * m[i] + (T(1) - b1) * g[i];
    v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
    const T mh = m[i] * bc1;
    const T vh = v[i] * bc2;
    p[i] -= lr * mh / (std::sqrt(vh) + eps);
  }
}

template <typename T>
constexpr Table<T> make_table() {
  Table<T> t{};
  t.axpy = &axpy_<T>;
  t.dot = &dot_<T>;
  t.add = &add_<T>;
  t.sub = &sub_<T>;
  t.mul = &mul_<T>;
  t.mul_acc = &mul_acc_<T>;
  t.scale = &scale_<T>;
  t.add_scalar = &add_scalar_<T>;
  t.sum = &sum_<T>;
  t.sum_sq_diff = &sum_sq_diff_<T>;
  t.prelu = &prelu_<T>;
  t.prelu_grad = &prelu_grad_<T>;
  t.adam = &adam_<T>;
  return t;
}

const Table<float> kF32 = make_table<float>();
const Table<double> kF64 = make_table<double>();

}  // namespace

const Table<float>* scalar_f32() { return &kF32; }
const Table<double>* scalar_f64() { return &kF64; }

}  // namespace bdss::kernels
