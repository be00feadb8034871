#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "moero/metrics.hpp"
#include "moero/mri_core.hpp"
#include "moero/rng.hpp"

using namespace moero;
using namespace moero::metrics;

namespace {

ComplexImage scaled(const ComplexImage& x, double s) {
  ComplexImage y = x;
  for (auto& v : y.data()) v *= s;
  return y;
}

ComplexImage positive_image(int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  ComplexImage x(h, w);
  for (auto& v : x.data()) v = 0.5 + rng.uniform();
  return x;
}

}  // namespace

TEST_CASE("nmse") {
  const auto x = make_phantom(32, 32, 0);
  CHECK(nmse(x, x) == 0.0);
  CHECK(nmse(ComplexImage(32, 32), x) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(nmse(scaled(x, 1.1), x) - 0.01) < 1e-12);
  CHECK_THROWS_AS(nmse(x, ComplexImage(32, 32)), DegenerateReference);
  CHECK_THROWS_AS(nmse(x, ComplexImage(16, 32)), DimensionError);
}

TEST_CASE("nmse is 2-homogeneous in the error") {
  const auto x = positive_image(16, 16, 1);
  Rng rng(2);
  ComplexImage e1 = x, e2 = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = 0.1 * rng.uniform();  // keeps x + e positive, so magnitudes add linearly
    e1.data()[i] += e;
    e2.data()[i] += 2 * e;
  }
  CHECK(std::abs(nmse(e2, x) - 4 * nmse(e1, x)) < 1e-9);
}

TEST_CASE("psnr") {
  const auto x = positive_image(16, 16, 3);
  CHECK(std::isinf(psnr(x, x)));
  CHECK(psnr(x, x) > 0);
  // constant reference at 1 and estimate at 2: MSE = max^2
  ComplexImage one(8, 8), two(8, 8);
  for (auto& v : one.data()) v = 1.0;
  for (auto& v : two.data()) v = 2.0;
  CHECK(std::abs(psnr(two, one)) < 1e-12);
  // halving the MSE adds 10 log10 2
  ComplexImage a = x, b = x;
  a.data()[0] += 0.2;
  a.data()[1] += 0.2;
  b.data()[0] += 0.2;
  CHECK(psnr(b, x) - psnr(a, x) == doctest::Approx(10 * std::log10(2.0)).epsilon(1e-12));
  CHECK(psnr(b, x) - psnr(a, x) == doctest::Approx(3.0103).epsilon(1e-5));
}

TEST_CASE("ssim") {
  const auto x = make_phantom(32, 32, 4);
  CHECK(std::abs(ssim(x, x) - 1.0) < 1e-9);
  CHECK(ssim(scaled(x, -1.0), x) == doctest::Approx(1.0));  // magnitudes are sign blind
  const auto m = magnitude(positive_image(16, 16, 5));
  std::vector<double> neg(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) neg[i] = -m[i];
  const auto [lo, hi] = std::minmax_element(m.begin(), m.end());
  CHECK(ssim_real(neg, m, 16, 16, *hi - *lo) < 1.0);
  CHECK(ssim(scaled(x, 0.5), x) < 1.0);
  ComplexImage flat(16, 16);
  for (auto& v : flat.data()) v = 1.0;
  CHECK_THROWS_AS(ssim(flat, flat), DegenerateReference);
  CHECK_THROWS_AS(ssim(ComplexImage(6, 6), ComplexImage(6, 6)), DimensionError);
  const auto r = evaluate(scaled(x, 0.9), x);
  CHECK(r.ssim <= 1.0);
  CHECK(r.nmse >= 0.0);
}

TEST_CASE("metrics are permutation covariant") {
  const auto x = make_phantom(24, 24, 6);
  ComplexImage y = x;
  Rng rng(7);
  for (auto& v : y.data()) v += 0.02 * rng.normal();
  // spatial permutation: transpose followed by a periodic shift
  auto permute = [](const ComplexImage& a) {
    ComplexImage o(a.width(), a.height());
    for (int i = 0; i < a.height(); ++i)
      for (int j = 0; j < a.width(); ++j) o((j + 5) % a.width(), (i + 3) % a.height()) = a(i, j);
    return o;
  };
  CHECK(nmse(permute(y), permute(x)) == doctest::Approx(nmse(y, x)).epsilon(1e-12));
  CHECK(psnr(permute(y), permute(x)) == doctest::Approx(psnr(y, x)).epsilon(1e-12));
  // windowed SSIM is covariant only under window-preserving maps; a transpose qualifies
  ComplexImage tx(24, 24), ty(24, 24);
  for (int i = 0; i < 24; ++i)
    for (int j = 0; j < 24; ++j) {
      tx(j, i) = x(i, j);
      ty(j, i) = y(i, j);
    }
  CHECK(ssim(ty, tx) == doctest::Approx(ssim(y, x)).epsilon(1e-12));
}
