#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "moero/augment.hpp"
#include "moero/metrics.hpp"
#include "moero/rng.hpp"
#include "reference.hpp"

using namespace moero;
using namespace moero::augment;

namespace {

double max_diff(std::span<const cplx> a, std::span<const cplx> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

KSpace random_kspace(int c, int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  KSpace y(c, h, w);
  for (auto& v : y.data()) v = {rng.normal(), rng.normal()};
  return y;
}

const std::vector<GeoTransform> kAll{FlipH{},           FlipV{},          ShiftInt{3, -2}, Rot90{1},
                                     RotArbitrary{0.4}, Scale{1.2, 0.85}, Elastic{4.0, 4.0, 9}};

}  // namespace

TEST_CASE("flip twice is identity") {
  const auto x = make_phantom(32, 24, 1);
  const auto s = make_coil_maps(4, 32, 24, 1);
  for (const GeoTransform& t : {GeoTransform{FlipH{}}, GeoTransform{FlipV{}}}) {
    auto [x1, s1] = apply_geo(x, s, t);
    auto [x2, s2] = apply_geo(x1, s1, t);
    CHECK(x2 == x);
    CHECK(s2 == s);
  }
}

TEST_CASE("four quarter turns are identity") {
  const auto x = make_phantom(32, 32, 2);
  const auto s = make_coil_maps(3, 32, 32, 2);
  auto cur = std::pair{x, s};
  for (int i = 0; i < 4; ++i) cur = apply_geo(cur.first, cur.second, Rot90{1});
  CHECK(cur.first == x);
  CHECK(cur.second == s);
  auto half = apply_geo(x, s, Rot90{2});
  auto twice = apply_geo(apply_geo(x, s, Rot90{1}).first, s, Rot90{1});
  CHECK(half.first == twice.first);
}

TEST_CASE("quarter turn is counter-clockwise") {
  ComplexImage x(4, 4);
  x(0, 3) = 1.0;  // top-right corner
  CoilSensitivityMaps s(1, 4, 4);
  for (auto& v : s.data()) v = 1.0;
  const auto r = apply_geo(x, s, Rot90{1}).first;
  CHECK(r(0, 0) == cplx(1.0));
}

TEST_CASE("odd quarter turns need a square image") {
  CHECK_THROWS_AS(apply_geo(make_phantom(32, 16, 0), make_coil_maps(1, 32, 16, 0), Rot90{1}), DimensionError);
  CHECK_NOTHROW(apply_geo(make_phantom(32, 16, 0), make_coil_maps(1, 32, 16, 0), Rot90{2}));
}

TEST_CASE("integer shift inverse is exact") {
  const auto x = make_phantom(32, 32, 3);
  const auto s = make_coil_maps(2, 32, 32, 3);
  auto [x1, s1] = apply_geo(x, s, ShiftInt{3, -2});
  CHECK(x1(3, 0) == x(0, 2));
  auto [x2, s2] = apply_geo(x1, s1, ShiftInt{-3, 2});
  CHECK(x2 == x);
  CHECK(s2 == s);
}

TEST_CASE("parameter ranges") {
  const auto x = make_phantom(16, 16, 0);
  const auto s = make_coil_maps(1, 16, 16, 0);
  CHECK_THROWS_AS(apply_geo(x, s, Scale{0.5, 1.0}), ParameterError);
  CHECK_THROWS_AS(apply_geo(x, s, Scale{1.0, 1.5}), ParameterError);
  CHECK_THROWS_AS(apply_geo(x, s, RotArbitrary{4.0}), ParameterError);
  CHECK_THROWS_AS(apply_geo(x, s, Elastic{11.0, 4.0, 0}), ParameterError);
  CHECK_THROWS_AS(apply_geo(x, s, Elastic{4.0, 1.0, 0}), ParameterError);
  CHECK_THROWS_AS(apply_geo(x, s, Rot90{4}), ParameterError);
  CHECK_THROWS_AS(apply_geo(x, make_coil_maps(1, 16, 20, 0), FlipH{}), DimensionError);
}

TEST_CASE("interpolated maps stay normalized where signal survives") {
  const auto x = make_phantom(48, 48, 5);
  const auto s = make_coil_maps(6, 48, 48, 5);
  for (const auto& t : kAll) {
    if (!is_interpolating(t)) continue;
    auto [xa, sa] = apply_geo(x, s, t);
    for (int y = 0; y < 48; ++y)
      for (int i = 0; i < 48; ++i) {
        double tot = 0.0;
        for (int c = 0; c < 6; ++c) tot += std::norm(sa(c, y, i));
        if (tot == 0.0)
          CHECK(xa(y, i) == cplx{});
        else
          CHECK(tot == doctest::Approx(1.0).epsilon(1e-9));
      }
  }
}

TEST_CASE("small rotation round trip is close on a smooth image") {
  const auto x = make_phantom(64, 64, 0);
  const auto s = make_coil_maps(4, 64, 64, 0);
  auto [x1, s1] = apply_geo(x, s, RotArbitrary{0.0});
  CHECK(max_diff(x1.data(), x.data()) < 1e-12);
  auto [x2, s2] = apply_geo(x, s, Scale{1.0, 1.0});
  CHECK(max_diff(x2.data(), x.data()) < 1e-12);
}

TEST_CASE("forward-model consistency on full masks") {
  const auto x = make_phantom(64, 64, 0);
  const auto s = make_coil_maps(8, 64, 64, 0);
  for (const auto& t : kAll) {
    auto [xa, sa] = apply_geo(x, s, t);
    const auto y = regenerate_kspace(xa, sa, SamplingMask::full(64));
    CHECK(max_diff(sense_combine(y, sa).data(), xa.data()) < 1e-5);
  }
}

TEST_CASE("regenerate_kspace matches forward and zero maps to zero") {
  const auto x = make_phantom(32, 32, 4);
  const auto s = make_coil_maps(3, 32, 32, 4);
  const auto m = make_mask(MaskFamily::Uniform, 32, 4, 8, 0);
  CHECK(regenerate_kspace(x, s, m) == forward(x, AcquisitionModel(s, m)));
  for (const auto& v : regenerate_kspace(ComplexImage(32, 32), s, m).data()) CHECK(v == cplx{});
}

TEST_CASE("horizontal flip mirrors k-space magnitude") {
  const int h = 16, w = 16;
  const auto x = make_phantom(h, w, 6);
  const auto s = make_coil_maps(2, h, w, 6);
  auto [xf, sf] = apply_geo(x, s, FlipH{});
  for (int c = 0; c < 2; ++c) {
    std::vector<cplx> a(x.size()), b(x.size());
    for (int y = 0; y < h; ++y)
      for (int i = 0; i < w; ++i) {
        a[static_cast<std::size_t>(y * w + i)] = s(c, y, i) * x(y, i);
        b[static_cast<std::size_t>(y * w + i)] = sf(c, y, i) * xf(y, i);
      }
    const auto ka = reference::dft2c(a, h, w), kb = reference::dft2c(b, h, w);
    const auto yb = regenerate_kspace(xf, sf, SamplingMask::full(h));
    for (int ky = 0; ky < h; ++ky)
      for (int kx = 0; kx < w; ++kx) {
        const double mirrored = std::abs(ka[static_cast<std::size_t>(ky * w + (w - kx) % w)]);
        CHECK(std::abs(kb[static_cast<std::size_t>(ky * w + kx)]) == doctest::Approx(mirrored).epsilon(1e-9));
        CHECK(std::abs(yb(c, ky, kx)) == doctest::Approx(mirrored).epsilon(1e-6));
      }
  }
}

TEST_CASE("thermal noise") {
  const auto y = random_kspace(2, 16, 16, 1);
  CHECK(add_thermal_noise(y, NoiseSpec{0.0, {}}, 3) == y);
  const auto a = add_thermal_noise(y, NoiseSpec{0.1, {}}, 1);
  const auto b = add_thermal_noise(y, NoiseSpec{0.1, {}}, 2);
  CHECK(a.same_shape(b));
  CHECK_FALSE(a == b);
  CHECK(a == add_thermal_noise(y, NoiseSpec{0.1, {}}, 1));
  CHECK(max_abs(a.data()) <= max_abs(y.data()) * (1 + 1e-12));
  CHECK_THROWS_AS(add_thermal_noise(y, NoiseSpec{-1.0, {}}, 1), ParameterError);
}

TEST_CASE("noise statistics") {
  const double sigma = 0.05;
  const KSpace zero(1, 1000, 1000);
  const auto n = add_thermal_noise(zero, NoiseSpec{sigma, {}}, 17);
  double sr = 0, si = 0, srr = 0, sii = 0;
  for (const auto& v : n.data()) {
    sr += v.real();
    si += v.imag();
    srr += v.real() * v.real();
    sii += v.imag() * v.imag();
  }
  const double N = static_cast<double>(n.size());
  const double target = sigma * sigma / 2;
  CHECK(srr / N == doctest::Approx(target).epsilon(0.05));
  CHECK(sii / N == doctest::Approx(target).epsilon(0.05));
  CHECK(std::abs(cplx(sr, si)) / N <= 3 * sigma / std::sqrt(N));
}

TEST_CASE("noise levels are relative to the infinity norm") {
  auto y = random_kspace(1, 8, 8, 2);
  const auto light = NoiseSpec::from_level(NoiseLevel::Light, y);
  const auto heavy = NoiseSpec::from_level(NoiseLevel::Heavy, y);
  CHECK(light.sigma == doctest::Approx(kLightNoiseFraction * max_abs(y.data())));
  CHECK(heavy.sigma == doctest::Approx(kHeavyNoiseFraction * max_abs(y.data())));
}

TEST_CASE("motion") {
  const auto y = random_kspace(3, 16, 12, 4);
  CHECK(apply_motion(y, MotionSpec{0.0, 0.0}) == y);
  const MotionSpec m{1.3, -2.1};
  const auto ym = apply_motion(y, m);
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(std::abs(ym.data()[i]) == std::abs(y.data()[i]));
  const auto back = apply_motion(ym, MotionSpec{-1.3, 2.1});
  CHECK(max_diff(back.data(), y.data()) < 1e-12);
  CHECK(std::abs(ym(0, 1, 0) - y(0, 1, 0) * std::polar(1.0, 1.3)) < 1e-14);
  CHECK(std::abs(ym(2, 2, 5) - y(2, 2, 5) * std::polar(1.0, -2.1)) < 1e-14);
}

TEST_CASE("sampling plan") {
  CHECK(sample_augmentation(AugPolicy::uniform(0.0), 5).empty());
  const auto all = sample_augmentation(AugPolicy::uniform(1.0), 5);
  REQUIRE(all.size() == 9);
  bool seen_kspace = false;
  for (const auto& a : all) {
    const bool image_domain = std::holds_alternative<GeoTransform>(a);
    if (!image_domain) seen_kspace = true;
    CHECK_FALSE((image_domain && seen_kspace));
  }
  CHECK(std::holds_alternative<NoiseStep>(all[7]));
  CHECK(std::holds_alternative<MotionSpec>(all[8]));
  AugPolicy bad;
  bad.noise_p = 1.5;
  CHECK_THROWS_AS(sample_augmentation(bad, 0), ParameterError);
}

TEST_CASE("firing rate at p = 0.5") {
  AugPolicy p;
  p.flip_h = 0.5;
  int fired = 0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) fired += sample_augmentation(p, seed).empty() ? 0 : 1;
  CHECK(fired >= 4700);
  CHECK(fired <= 5300);
}

TEST_CASE("augmented sample is deterministic and consistent") {
  const auto x = make_phantom(32, 32, 0);
  const auto s = make_coil_maps(4, 32, 32, 0);
  const auto plan = sample_augmentation(AugPolicy::uniform(1.0), 11);
  const auto a = apply_augmentations(x, s, plan);
  const auto b = apply_augmentations(x, s, plan);
  CHECK(a.kspace == b.kspace);
  CHECK(a.image == b.image);
  const auto geo_only = sample_augmentation(AugPolicy::uniform(1.0), 11);
  std::vector<Augmentation> geo;
  for (const auto& g : geo_only)
    if (std::holds_alternative<GeoTransform>(g)) geo.push_back(g);
  const auto c = apply_augmentations(x, s, geo);
  CHECK(max_diff(sense_combine(c.kspace, c.sens).data(), c.image.data()) < 1e-10);
}
