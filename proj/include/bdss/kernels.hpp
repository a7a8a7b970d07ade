#pragma once

#include <cstddef>

namespace bdss::kernels {

enum class Isa { scalar, avx2, neon };

const char* isa_name(Isa isa);
bool supported(Isa isa);
Isa best_supported();

// Active table selection. Initialized on first use from the BDSS_KERNELS
// environment variable (scalar|avx2|neon) or best_supported().
Isa active_isa();
void set_active(Isa isa);  // throws config_error if unsupported on this host

// Flat-array primitives behind every hot loop. The scalar table is the
// reference implementation; SIMD tables must agree with it to round-off
// (see the kernel equivalence tests).
template <typename T>
struct Table {
  void (*axpy)(std::size_t n, T a, const T* x, T* y);  // y += a*x
  T (*dot)(std::size_t n, const T* a, const T* b);
  void (*add)(std::size_t n, const T* a, const T* b, T* out);
  void (*sub)(std::size_t n, const T* a, const T* b, T* out);
  void (*mul)(std::size_t n, const T* a, const T* b, T* out);
  void (*mul_acc)(std::size_t n, const T* a, const T* b, T* out);  // out += a*b
  void (*scale)(std::size_t n, T a, const T* x, T* out);           // out = a*x
  void (*add_scalar)(std::size_t n, T a, T* out);                  // out += a
  T (*sum)(std::size_t n, const T* x);
  T (*sum_sq_diff)(std::size_t n, const T* a, const T* b);
  void (*prelu)(std::size_t n, const T* x, T slope, T* out);
  // gx += gy * (x >= 0 ? 1 : slope); returns sum over x<0 of gy*x (slope grad)
  T (*prelu_grad)(std::size_t n, const T* x, const T* gy, T slope, T* gx);
  // in-place bias-corrected Adam; bc1 = 1/(1-b1^t), bc2 = 1/(1-b2^t)
  void (*adam)(std::size_t n, T* p, const T* g, T* m, T* v, T lr, T b1, T b2, T eps, T bc1,
               T bc2);
};

template <typename T>
const Table<T>& table(Isa isa);  // throws config_error if unsupported

template <>
const Table<float>& table<float>(Isa isa);
template <>
const Table<double>& table<double>(Isa isa);

template <typename T>
const Table<T>& active() {
  return table<T>(active_isa());
}

}  // namespace bdss::kernels
