#include <doctest.h>

#include <cmath>
#include <vector>

#include "bdss/ops.hpp"
#include "bdss/rng.hpp"
#include "oracles.hpp"

using namespace bdss;

namespace {

template <typename T>
Tensor<T> random_tensor(Shape shape, rng::Stream& stream, bool requires_grad = false,
                        double lo = -1.0, double hi = 1.0) {
  std::vector<T> v(shape_numel(shape));
  for (auto& x : v) x = static_cast<T>(stream.uniform_in(lo, hi));
  return Tensor<T>::from(std::move(shape), std::move(v), requires_grad);
}

template <typename T>
ConvWeights<T> random_conv(int cout, int cin, int k, int dilation, int padding,
                           rng::Stream& stream) {
  ConvWeights<T> w;
  w.kernel = random_tensor<T>({cout, cin, k, k}, stream, true);
  w.bias = random_tensor<T>({cout}, stream, true);
  w.dilation = dilation;
  w.padding = padding;
  return w;
}

}  // namespace

TEST_CASE("field_of_view reproduces the dilation table") {
  CHECK(field_of_view(3, 1) == 3);
  CHECK(field_of_view(3, 2) == 7);
  CHECK(field_of_view(3, 3) == 11);
  CHECK(field_of_view(3, 4) == 15);
  CHECK(field_of_view(1, 5) == 9);
  for (int l = 1; l <= 8; ++l) {
    const int fov = field_of_view(3, l);
    CHECK(fov * fov == ((3 + 1) * l - 1) * ((3 + 1) * l - 1));
  }
  CHECK(field_of_view(5, 1) == 5);  // l = 1 reduces to the kernel extent
  CHECK_THROWS_AS(field_of_view(2, 1), config_error);
  CHECK_THROWS_AS(field_of_view(3, 0), config_error);
}

TEST_CASE("conv2d identity kernel passes the input through") {
  ConvWeights<float> w;
  w.kernel = Tensor<float>::zeros({1, 1, 3, 3});
  w.kernel.values()[4] = 1.0f;  // center tap
  w.bias = Tensor<float>::zeros({1});
  w.dilation = 1;
  w.padding = 1;
  rng::Stream stream(11);
  Tensor<float> x = random_tensor<float>({1, 1, 3, 3}, stream);
  Tensor<float> y = conv2d(x, w);
  REQUIRE(y.shape() == x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) CHECK(y.data()[i] == x.data()[i]);
}

TEST_CASE("conv2d dilation-2 all-ones kernel counts in-bounds taps") {
  ConvWeights<float> w;
  w.kernel = Tensor<float>::full({1, 1, 3, 3}, 1.0f);
  w.bias = Tensor<float>::zeros({1});
  w.dilation = 2;
  w.padding = 2;
  Tensor<float> x = Tensor<float>::full({1, 1, 5, 5}, 1.0f);
  Tensor<float> y = conv2d(x, w);
  REQUIRE(y.shape() == Shape{1, 1, 5, 5});
  CHECK(y.data()[2 * 5 + 2] == 9.0f);  // center: all taps land inside
  CHECK(y.data()[0] == 4.0f);          // corner: only 4 of 9 taps in bounds
}

TEST_CASE("conv2d matches the literal dilated-sum oracle") {
  rng::Stream stream(0xc0ffee);
  for (int dilation = 1; dilation <= 4; ++dilation) {
    // f32 path
    {
      Tensor<float> x = random_tensor<float>({1, 2, 8, 8}, stream);
      auto w = random_conv<float>(3, 2, 3, dilation, dilation, stream);
      Tensor<float> y = conv2d(x, w);
      int oh, ow;
      const auto expect = oracle::conv2d<float>(
          {x.data().begin(), x.data().end()}, 1, 2, 8, 8,
          {w.kernel.data().begin(), w.kernel.data().end()}, 3, 3,
          {w.bias.data().begin(), w.bias.data().end()}, dilation, dilation, oh, ow);
      REQUIRE(y.shape() == Shape{1, 3, oh, ow});
      for (std::size_t i = 0; i < expect.size(); ++i)
        CHECK(std::abs(y.data()[i] - expect[i]) <= 1e-5f);
    }
    // f64 verification path
    {
      Tensor<double> x = random_tensor<double>({2, 2, 7, 9}, stream);
      auto w = random_conv<double>(2, 2, 3, dilation, dilation, stream);
      Tensor<double> y = conv2d(x, w);
      int oh, ow;
      const auto expect = oracle::conv2d<double>(
          {x.data().begin(), x.data().end()}, 2, 2, 7, 9,
          {w.kernel.data().begin(), w.kernel.data().end()}, 2, 3,
          {w.bias.data().begin(), w.bias.data().end()}, dilation, dilation, oh, ow);
      for (std::size_t i = 0; i < expect.size(); ++i)
        CHECK(std::abs(y.data()[i] - expect[i]) <= 1e-12);
    }
  }
}

TEST_CASE("conv2d rejects bad wiring and empty geometry") {
  rng::Stream stream(5);
  Tensor<float> x = random_tensor<float>({1, 2, 4, 4}, stream);
  auto w = random_conv<float>(1, 3, 3, 1, 1, stream);  // expects 3 channels
  CHECK_THROWS_AS(conv2d(x, w), config_error);
  auto w2 = random_conv<float>(1, 2, 3, 4, 0, stream);  // span 9 > input 4, no padding
  CHECK_THROWS_AS(conv2d(x, w2), geometry_error);
}

TEST_CASE("prelu forward examples") {
  Tensor<float> slope = Tensor<float>::from({1}, {0.25f});
  {
    Tensor<float> x = Tensor<float>::from({3}, {2.0f, 0.0f, 5.0f});
    Tensor<float> y = prelu(x, slope);
    CHECK(y.data()[0] == 2.0f);
    CHECK(y.data()[1] == 0.0f);
    CHECK(y.data()[2] == 5.0f);
  }
  {
    Tensor<float> x = Tensor<float>::from({1}, {-1.0f});
    CHECK(prelu(x, slope).data()[0] == doctest::Approx(-0.25f));
  }
  Tensor<float> bad_slopes = Tensor<float>::from({3}, {0.1f, 0.2f, 0.3f});
  Tensor<float> x4 = Tensor<float>::zeros({1, 2, 2, 2});
  CHECK_THROWS_AS(prelu(x4, bad_slopes), config_error);
}

TEST_CASE("prelu slope gradient equals the sum of negative inputs") {
  Tensor<double> x = Tensor<double>::from({2}, {-2.0, 3.0});
  Tensor<double> a = Tensor<double>::from({1}, {0.25}, true);
  auto eval = [&] { return mean(prelu(x, a)).item() * 2.0; };  // sum = mean * n
  a.zero_grad();
  Tensor<double> loss = scale(mean(prelu(x, a)), 2.0);
  loss.backward();
  CHECK(a.grad()[0] == doctest::Approx(-2.0).epsilon(1e-12));

  // central finite difference cross-check
  const double step = 1e-6;
  a.values()[0] = 0.25 + step;
  const double up = eval();
  a.values()[0] = 0.25 - step;
  const double down = eval();
  const double numeric = (up - down) / (2 * step);
  CHECK(std::abs(numeric - (-2.0)) / 2.0 <= 1e-6);
}

TEST_CASE("concat_channels ordering, unary identity and gradient routing") {
  rng::Stream stream(7);
  Tensor<float> a = random_tensor<float>({2, 16, 3, 3}, stream, true);
  Tensor<float> b = random_tensor<float>({2, 16, 3, 3}, stream, true);
  {
    Tensor<float> one = concat_channels<float>({a});
    REQUIRE(one.shape() == a.shape());
    for (std::size_t i = 0; i < a.numel(); ++i) CHECK(one.data()[i] == a.data()[i]);
  }
  Tensor<float> cat = concat_channels<float>({a, b});
  REQUIRE(cat.shape() == Shape{2, 32, 3, 3});
  // ordering preserved
  CHECK(cat.data()[0] == a.data()[0]);
  CHECK(cat.data()[16 * 9] == b.data()[0]);

  // a loss reading only channel 20 deposits gradient solely in part two
  Tensor<float> sliced = slice_channels(cat, 20, 1);
  Tensor<float> loss = mean(sliced);
  loss.backward();
  REQUIRE(a.has_grad());
  REQUIRE(b.has_grad());
  for (float g : a.grad()) CHECK(g == 0.0f);
  float total = 0;
  for (float g : b.grad()) total += std::abs(g);
  CHECK(total > 0.0f);

  Tensor<float> mismatched = random_tensor<float>({2, 4, 5, 3}, stream);
  CHECK_THROWS_AS(concat_channels<float>({a, mismatched}), config_error);
}

TEST_CASE("concat then slice is the identity forward and backward") {
  rng::Stream stream(99);
  Tensor<double> a = random_tensor<double>({1, 3, 4, 4}, stream, true);
  Tensor<double> b = random_tensor<double>({1, 5, 4, 4}, stream, true);
  Tensor<double> cat = concat_channels<double>({a, b});
  Tensor<double> back_a = slice_channels(cat, 0, 3);
  Tensor<double> back_b = slice_channels(cat, 3, 5);
  for (std::size_t i = 0; i < a.numel(); ++i) CHECK(back_a.data()[i] == a.data()[i]);
  for (std::size_t i = 0; i < b.numel(); ++i) CHECK(back_b.data()[i] == b.data()[i]);

  // backward: d(mean(back_a))/da equals d(mean(a))/da elementwise
  Tensor<double> loss = mean(back_a);
  loss.backward();
  for (double g : a.grad()) CHECK(g == doctest::Approx(1.0 / a.numel()));
  for (double g : b.grad()) CHECK(g == 0.0);
}

TEST_CASE("backward: polynomial, disconnected leaf, accumulation, scalar guard") {
  Tensor<double> x = Tensor<double>::from({1}, {3.0}, true);
  Tensor<double> z = Tensor<double>::from({1}, {4.0}, true);
  Tensor<double> loss = mean(mul(x, x));  // x^2
  loss.backward();
  CHECK(x.grad()[0] == doctest::Approx(6.0));
  CHECK_FALSE(z.has_grad());  // disconnected leaf left untouched -> zero by convention

  // repeated backward accumulates additively on leaves
  loss.backward();
  CHECK(x.grad()[0] == doctest::Approx(12.0));
  x.zero_grad();
  loss.backward();
  CHECK(x.grad()[0] == doctest::Approx(6.0));

  Tensor<double> vec = Tensor<double>::from({2}, {1.0, 2.0}, true);
  Tensor<double> nonscalar = mul(vec, vec);
  CHECK_THROWS_AS(nonscalar.backward(), config_error);
}

TEST_CASE("conv loss gradients match central finite differences at f64") {
  rng::Stream stream(0xfeed);
  rng::Stream pick(0xdead);
  Tensor<double> x = random_tensor<double>({1, 2, 6, 6}, stream, true);
  auto w = random_conv<double>(2, 2, 3, 2, 2, stream);
  Tensor<double> target = random_tensor<double>({1, 2, 6, 6}, stream);

  auto build_loss = [&] {
    Tensor<double> d = sub(conv2d(x, w), target);
    return mean(mul(d, d));
  };
  auto eval = [&] { return build_loss().item(); };

  for (Tensor<double>* leaf : {&w.kernel, &w.bias, &x}) {
    auto backward_fill = [&] {
      leaf->zero_grad();
      build_loss().backward();
    };
    const auto report = oracle::check_gradient(*leaf, eval, backward_fill, 25, pick);
    CHECK(report.max_rel_err <= 1e-4);
  }
}

TEST_CASE("elementwise and mean gradients match finite differences") {
  rng::Stream stream(0xabc);
  rng::Stream pick(0xdef);
  Tensor<double> a = random_tensor<double>({2, 3, 4, 4}, stream, true);
  Tensor<double> b = random_tensor<double>({2, 3, 4, 4}, stream, true);
  Tensor<double> slopes = Tensor<double>::full({3}, 0.25, true);

  auto build_loss = [&] {
    Tensor<double> p = prelu(add(mul(a, b), scale(sub(a, b), 0.5)), slopes);
    return mean(mul(p, p));
  };
  auto eval = [&] { return build_loss().item(); };
  for (Tensor<double>* leaf : {&a, &b, &slopes}) {
    auto backward_fill = [&] {
      leaf->zero_grad();
      build_loss().backward();
    };
    const auto report = oracle::check_gradient(*leaf, eval, backward_fill, 25, pick);
    CHECK(report.max_rel_err <= 1e-4);
  }
}

TEST_CASE("no-grad mode builds value-only nodes") {
  rng::Stream stream(3);
  Tensor<float> x = random_tensor<float>({1, 1, 4, 4}, stream, true);
  auto w = random_conv<float>(1, 1, 3, 1, 1, stream);
  NoGradGuard guard;
  Tensor<float> y = conv2d(x, w);
  CHECK_FALSE(y.requires_grad());
  CHECK(y.is_leaf());
}
