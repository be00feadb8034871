#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "moero/fft.hpp"
#include "moero/mri_core.hpp"
#include "moero/rng.hpp"
#include "reference.hpp"

using namespace moero;

namespace {

ComplexImage random_image(int h, int w, Rng& rng) {
  ComplexImage x(h, w);
  for (auto& v : x.data()) v = {rng.normal(), rng.normal()};
  return x;
}

KSpace random_kspace(int c, int h, int w, Rng& rng) {
  KSpace y(c, h, w);
  for (auto& v : y.data()) v = {rng.normal(), rng.normal()};
  return y;
}

CoilSensitivityMaps ones(int h, int w) {
  CoilSensitivityMaps s(1, h, w);
  for (auto& v : s.data()) v = 1.0;
  return s;
}

double max_diff(std::span<const cplx> a, std::span<const cplx> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("image shape checks") {
  CHECK_THROWS_AS(ComplexImage(3, 8), DimensionError);
  CHECK_NOTHROW(ComplexImage(4, 4));
  CHECK_THROWS_AS(ComplexImage(4, 4, std::vector<cplx>(15)), DimensionError);
}

TEST_CASE("fft agrees with the direct DFT oracle") {
  Rng rng(1);
  for (auto [h, w] : {std::pair{8, 8}, std::pair{5, 7}, std::pair{6, 9}}) {
    const auto x = random_image(h, w, rng);
    std::vector<cplx> in(x.data().begin(), x.data().end()), out(in.size());
    fft::fft2c(in, out, h, w);
    CHECK(max_diff(out, reference::dft2c_full(in, h, w)) < 1e-12);
    CHECK(max_diff(out, reference::dft2c(in, h, w)) < 1e-12);
    std::vector<cplx> back(in.size());
    fft::ifft2c(out, back, h, w);
    CHECK(max_diff(back, in) < 1e-12);
  }
}

TEST_CASE("forward of zero is zero") {
  const AcquisitionModel model(make_coil_maps(4, 16, 16, 0), make_mask(MaskFamily::Uniform, 16, 4, 4, 0));
  const auto y = forward(ComplexImage(16, 16), model);
  for (const auto& v : y.data()) CHECK(v == cplx{});
  const auto x = adjoint(KSpace(4, 16, 16), model);
  for (const auto& v : x.data()) CHECK(v == cplx{});
}

TEST_CASE("centered delta has flat spectrum") {
  const int h = 16, w = 12;
  ComplexImage x(h, w);
  x(h / 2, w / 2) = 1.0;
  const auto y = forward(x, AcquisitionModel(ones(h, w), SamplingMask::full(h)));
  for (const auto& v : y.data()) CHECK(std::abs(v) == doctest::Approx(1.0 / std::sqrt(h * w)).epsilon(1e-12));
  // zero frequency at the array center: every coefficient of a centered delta is real and positive
  for (const auto& v : y.data()) CHECK(std::abs(v.imag()) < 1e-12);
}

TEST_CASE("unsampled lines are exactly zero") {
  const auto m = make_mask(MaskFamily::KtGaussian, 32, 4, 8, 5);
  const AcquisitionModel model(make_coil_maps(3, 32, 32, 2), m);
  const auto y = forward(make_phantom(32, 32, 1), model);
  for (int c = 0; c < 3; ++c)
    for (int k = 0; k < 32; ++k)
      if (!m.sampled(k))
        for (int x = 0; x < 32; ++x) CHECK(y(c, k, x) == cplx{});
}

TEST_CASE("adjoint dot-product test") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int c = 1 + trial % 4;
    const AcquisitionModel model(make_coil_maps(c, 16, 24, trial), make_mask(MaskFamily::KtRadial, 16, 2 + trial % 3, 4, trial));
    const auto x = random_image(16, 24, rng);
    const auto y = random_kspace(c, 16, 24, rng);
    const cplx lhs = inner(forward(x, model).data(), y.data());
    const cplx rhs = inner(x.data(), adjoint(y, model).data());
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::sqrt(norm2(x.data()) * norm2(y.data())));
  }
}

TEST_CASE("matches the serial reference operators") {
  Rng rng(3);
  const auto s = make_coil_maps(3, 12, 10, 4);
  const auto m = make_mask(MaskFamily::Uniform, 12, 2, 2, 1);
  const AcquisitionModel model(s, m);
  const auto x = random_image(12, 10, rng);
  const auto y = random_kspace(3, 12, 10, rng);
  CHECK(max_diff(forward(x, model).data(), reference::forward(x, s, m).data()) < 1e-12);
  CHECK(max_diff(adjoint(y, model).data(), reference::adjoint(y, s, m).data()) < 1e-12);
}

TEST_CASE("unitary with full mask and unit map") {
  Rng rng(11);
  const auto x = random_image(16, 16, rng);
  const AcquisitionModel model(ones(16, 16), SamplingMask::full(16));
  const auto y = forward(x, model);
  CHECK(std::sqrt(norm2(y.data())) == doctest::Approx(std::sqrt(norm2(x.data()))).epsilon(1e-10));
  CHECK(max_diff(adjoint(y, model).data(), x.data()) < 1e-10);
}

TEST_CASE("SENSE combination inverts the full forward model") {
  const auto x = make_phantom(32, 32, 0);
  const auto s = make_coil_maps(8, 32, 32, 0);
  const auto y = forward(x, AcquisitionModel(s, SamplingMask::full(32)));
  CHECK(max_diff(sense_combine(y, s).data(), x.data()) < 1e-10);
  CHECK(max_diff(sense_combine(y, s).data(), adjoint(y, AcquisitionModel(s, SamplingMask::full(32))).data()) < 1e-12);
}

TEST_CASE("masking idempotence") {
  const auto x = make_phantom(32, 32, 2);
  const auto s = make_coil_maps(2, 32, 32, 2);
  const auto m = make_mask(MaskFamily::Uniform, 32, 4, 8, 3);
  const auto full = forward(x, AcquisitionModel(s, SamplingMask::full(32)));
  const auto part = forward(x, AcquisitionModel(s, m));
  for (int c = 0; c < 2; ++c)
    for (int k = 0; k < 32; ++k)
      for (int i = 0; i < 32; ++i) CHECK(part(c, k, i) == (m.sampled(k) ? full(c, k, i) : cplx{}));
}

TEST_CASE("shape mismatches throw") {
  const AcquisitionModel model(make_coil_maps(2, 16, 16, 0), SamplingMask::full(16));
  CHECK_THROWS_AS(forward(ComplexImage(16, 8), model), DimensionError);
  CHECK_THROWS_AS(adjoint(KSpace(3, 16, 16), model), DimensionError);
  CHECK_THROWS_AS(AcquisitionModel(make_coil_maps(2, 16, 16, 0), SamplingMask::full(8)), DimensionError);
  CHECK_THROWS_AS(sense_combine(KSpace(2, 8, 16), make_coil_maps(2, 16, 16, 0)), DimensionError);
}

TEST_CASE("phantom") {
  const auto a = make_phantom(64, 64, 0);
  CHECK(a == make_phantom(64, 64, 0));
  CHECK(max_abs(a.data()) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_FALSE(a == make_phantom(64, 64, 1));
  CHECK(a.all_finite());
  CHECK_THROWS_AS(make_phantom(15, 64, 0), ParameterError);
}

TEST_CASE("coil maps") {
  const auto one = make_coil_maps(1, 16, 16, 4);
  for (const auto& v : one.data()) CHECK(std::abs(v) == doctest::Approx(1.0).epsilon(1e-12));
  const auto eight = make_coil_maps(8, 64, 64, 0);
  CHECK(normalization_error(eight) < 1e-6);
  CHECK(eight == make_coil_maps(8, 64, 64, 0));
  CHECK_FALSE(eight == make_coil_maps(8, 64, 64, 1));
  CHECK_THROWS_AS(make_coil_maps(0, 16, 16, 0), ParameterError);
}

TEST_CASE("renormalize zeroes empty pixels") {
  CoilSensitivityMaps s(2, 4, 4);
  s(0, 1, 1) = 3.0;
  s(1, 1, 1) = cplx(0, 4.0);
  renormalize(s);
  CHECK(std::norm(s(0, 1, 1)) + std::norm(s(1, 1, 1)) == doctest::Approx(1.0));
  CHECK(s(0, 0, 0) == cplx{});
}
