#include <doctest.h>

#include <cmath>
#include <vector>

#include "bdss/kernels.hpp"
#include "bdss/rng.hpp"

using namespace bdss;

namespace {

template <typename T>
std::vector<T> random_vec(std::size_t n, rng::Stream& stream, double lo = -2.0, double hi = 2.0) {
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(stream.uniform_in(lo, hi));
  return v;
}

template <typename T>
void expect_close(const std::vector<T>& a, const std::vector<T>& b, double rel) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(double(a[i])), std::abs(double(b[i])), 1.0});
    CHECK(std::abs(double(a[i]) - double(b[i])) / denom <= rel);
  }
}

// Exercises every table entry on both ISAs and compares against the scalar
// reference. Sizes straddle the vector width so tails are covered.
template <typename T>
void equivalence_suite(kernels::Isa isa, double rel) {
  const auto& simd = kernels::table<T>(isa);
  const auto& ref = kernels::table<T>(kernels::Isa::scalar);
  rng::Stream stream(0x6b65726e656c73ull ^ static_cast<std::uint64_t>(rel * 1e18));
  for (std::size_t n : {1u, 3u, 7u, 8u, 9u, 31u, 64u, 100u, 1023u}) {
    const auto a = random_vec<T>(n, stream);
    const auto b = random_vec<T>(n, stream);

    auto y1 = random_vec<T>(n, stream);
    auto y2 = y1;
    const T alpha = static_cast<T>(stream.uniform_in(-1.5, 1.5));
    simd.axpy(n, alpha, a.data(), y1.data());
    ref.axpy(n, alpha, a.data(), y2.data());
    expect_close(y1, y2, rel);

    {
      const double d1 = simd.dot(n, a.data(), b.data());
      const double d2 = ref.dot(n, a.data(), b.data());
      CHECK(std::abs(d1 - d2) <= rel * std::max({std::abs(d1), std::abs(d2), 1.0}));
    }
    {
      std::vector<T> o1(n), o2(n);
      simd.add(n, a.data(), b.data(), o1.data());
      ref.add(n, a.data(), b.data(), o2.data());
      expect_close(o1, o2, rel);
      simd.sub(n, a.data(), b.data(), o1.data());
      ref.sub(n, a.data(), b.data(), o2.data());
      expect_close(o1, o2, rel);
      simd.mul(n, a.data(), b.data(), o1.data());
      ref.mul(n, a.data(), b.data(), o2.data());
      expect_close(o1, o2, rel);
      simd.scale(n, alpha, a.data(), o1.data());
      ref.scale(n, alpha, a.data(), o2.data());
      expect_close(o1, o2, rel);
    }
    {
      auto o1 = random_vec<T>(n, stream);
      auto o2 = o1;
      simd.mul_acc(n, a.data(), b.data(), o1.data());
      ref.mul_acc(n, a.data(), b.data(), o2.data());
      expect_close(o1, o2, rel);
      simd.add_scalar(n, alpha, o1.data());
      ref.add_scalar(n, alpha, o2.data());
      expect_close(o1, o2, rel);
    }
    {
      const double s1 = simd.sum(n, a.data());
      const double s2 = ref.sum(n, a.data());
      CHECK(std::abs(s1 - s2) <= rel * std::max({std::abs(s1), std::abs(s2), 1.0}));
      const double q1 = simd.sum_sq_diff(n, a.data(), b.data());
      const double q2 = ref.sum_sq_diff(n, a.data(), b.data());
      CHECK(std::abs(q1 - q2) <= rel * std::max(q2, 1.0));
    }
    {
      std::vector<T> o1(n), o2(n);
      const T slope = static_cast<T>(0.25);
      simd.prelu(n, a.data(), slope, o1.data());
      ref.prelu(n, a.data(), slope, o2.data());
      expect_close(o1, o2, rel);

      auto g1 = random_vec<T>(n, stream);
      auto g2 = g1;
      const auto gy = random_vec<T>(n, stream);
      const T gs1 = simd.prelu_grad(n, a.data(), gy.data(), slope, g1.data());
      const T gs2 = ref.prelu_grad(n, a.data(), gy.data(), slope, g2.data());
      expect_close(g1, g2, rel);
      CHECK(std::abs(double(gs1) - double(gs2)) <=
            rel * std::max({std::abs(double(gs1)), std::abs(double(gs2)), 1.0}));
    }
    {
      auto p1 = random_vec<T>(n, stream);
      auto p2 = p1;
      auto m1 = random_vec<T>(n, stream, 0.0, 0.5);
      auto m2 = m1;
      auto v1 = random_vec<T>(n, stream, 0.0, 0.5);
      auto v2 = v1;
      const auto g = random_vec<T>(n, stream);
      simd.adam(n, p1.data(), g.data(), m1.data(), v1.data(), T(0.01), T(0.9), T(0.999),
                T(1e-8), T(1.1), T(1.2));
      ref.adam(n, p2.data(), g.data(), m2.data(), v2.data(), T(0.01), T(0.9), T(0.999),
               T(1e-8), T(1.1), T(1.2));
      expect_close(p1, p2, rel);
      expect_close(m1, m2, rel);
      expect_close(v1, v2, rel);
    }
  }
}

}  // namespace

TEST_CASE("kernel dispatch reports a supported isa") {
  CHECK(kernels::supported(kernels::Isa::scalar));
  CHECK(kernels::supported(kernels::active_isa()));
  CHECK(kernels::isa_name(kernels::best_supported()) != nullptr);
}

TEST_CASE("simd kernel tables match the scalar reference") {
  bool tested_any = false;
  for (kernels::Isa isa : {kernels::Isa::avx2, kernels::Isa::neon}) {
    if (!kernels::supported(isa)) continue;
    tested_any = true;
    equivalence_suite<float>(isa, 2e-6);
    equivalence_suite<double>(isa, 1e-14);
  }
  if (!tested_any)
    MESSAGE("no SIMD isa available on this host; scalar-only configuration");
}

TEST_CASE("prelu kernel treats x == 0 as the positive branch") {
  const auto& K = kernels::table<float>(kernels::Isa::scalar);
  const float x[3] = {-1.0f, 0.0f, 2.0f};
  float out[3];
  K.prelu(3, x, 0.25f, out);
  CHECK(out[0] == doctest::Approx(-0.25f));
  CHECK(out[1] == 0.0f);
  CHECK(out[2] == 2.0f);

  float gx[3] = {0, 0, 0};
  const float gy[3] = {1, 1, 1};
  const float gs = K.prelu_grad(3, x, gy, 0.25f, gx);
  CHECK(gx[0] == doctest::Approx(0.25f));
  CHECK(gx[1] == 1.0f);  // positive branch at zero
  CHECK(gx[2] == 1.0f);
  CHECK(gs == doctest::Approx(-1.0f));
}
