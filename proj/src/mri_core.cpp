#include "moero/mri_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "moero/fft.hpp"
#include "moero/rng.hpp"

namespace moero {
namespace {

void check_image(const ComplexImage& x, const AcquisitionModel& model) {
  if (!model.sens.matches_image(x))
    throw DimensionError("image is " + std::to_string(x.height()) + "x" + std::to_string(x.width()) +
                         " but coil maps are " + std::to_string(model.height()) + "x" + std::to_string(model.width()));
}

void check_kspace(const KSpace& y, const AcquisitionModel& model) {
  if (!y.same_shape(model.sens)) throw DimensionError("k-space shape does not match coil maps");
}

void zero_unsampled(std::span<cplx> plane, const SamplingMask& mask, int w) {
  for (int k = 0; k < mask.height(); ++k) {
    if (mask.sampled(k)) continue;
    std::fill_n(plane.begin() + static_cast<std::ptrdiff_t>(k) * w, w, cplx{});
  }
}

// Coil images are formed independently per coil, then combined per pixel
// in fixed coil order so the result does not depend on the thread count.
ComplexImage combine(const KSpace& y, const CoilSensitivityMaps& sens, const SamplingMask* mask) {
  const int nc = y.coils(), h = y.height(), w = y.width();
  const auto plane = y.plane();
  std::vector<cplx> images(y.size());
#pragma omp parallel for schedule(static)
  for (int c = 0; c < nc; ++c) {
    std::span<cplx> dst(images.data() + c * plane, plane);
    if (mask) {
      std::vector<cplx> masked(y.coil(c).begin(), y.coil(c).end());
      zero_unsampled(masked, *mask, w);
      fft::ifft2c(masked, dst, h, w);
    } else {
      fft::ifft2c(y.coil(c), dst, h, w);
    }
  }
  ComplexImage x(h, w);
  auto out = x.data();
  const auto s = sens.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(plane); ++p) {
    cplx acc{};
    for (int c = 0; c < nc; ++c) acc += std::conj(s[c * plane + p]) * images[c * plane + p];
    out[p] = acc;
  }
  return x;
}

}  // namespace

AcquisitionModel::AcquisitionModel(CoilSensitivityMaps s, SamplingMask m) : sens(std::move(s)), mask(std::move(m)) {
  if (mask.height() != sens.height())
    throw DimensionError("mask height " + std::to_string(mask.height()) + " does not match image height " +
                         std::to_string(sens.height()));
}

KSpace forward(const ComplexImage& x, const AcquisitionModel& model) {
  check_image(x, model);
  const int nc = model.coils(), h = model.height(), w = model.width();
  KSpace y(nc, h, w);
  const auto xs = x.data();
#pragma omp parallel for schedule(static)
  for (int c = 0; c < nc; ++c) {
    const auto s = model.sens.coil(c);
    std::vector<cplx> weighted(xs.size());
    for (std::size_t p = 0; p < xs.size(); ++p) weighted[p] = s[p] * xs[p];
    auto dst = y.coil(c);
    fft::fft2c(weighted, dst, h, w);
    zero_unsampled(dst, model.mask, w);
  }
  return y;
}

ComplexImage adjoint(const KSpace& y, const AcquisitionModel& model) {
  check_kspace(y, model);
  return combine(y, model.sens, &model.mask);
}

ComplexImage sense_combine(const KSpace& y, const CoilSensitivityMaps& sens) {
  if (!y.same_shape(sens)) throw DimensionError("k-space shape does not match coil maps");
  return combine(y, sens, nullptr);
}

ComplexImage make_phantom(int h, int w, std::uint64_t seed) {
  if (h < 16 || w < 16) throw ParameterError("phantom must be at least 16x16");
  Rng rng(sub_seed(seed, "phantom"));

  struct Ellipse {
    double cy, cx, ry, rx, angle, value;
  };
  std::vector<Ellipse> shapes;
  // body outline, then interior structures with distinct intensities
  shapes.push_back({0.0, 0.0, 0.85, 0.75, rng.uniform(-0.2, 0.2), 0.5});
  const int interior = 5 + static_cast<int>(rng.uniform_int(0, 3));
  for (int i = 0; i < interior; ++i) {
    Ellipse e;
    e.cy = rng.uniform(-0.45, 0.45);
    e.cx = rng.uniform(-0.4, 0.4);
    e.ry = rng.uniform(0.08, 0.3);
    e.rx = rng.uniform(0.08, 0.3);
    e.angle = rng.uniform(0.0, std::numbers::pi);
    e.value = 0.1 + 0.08 * i + rng.uniform(0.0, 0.05);
    shapes.push_back(e);
  }
  const double ramp_y = rng.uniform(-1.0, 1.0), ramp_x = rng.uniform(-1.0, 1.0), phase0 = rng.uniform(-0.5, 0.5);

  ComplexImage x(h, w);
  double peak = 0.0;
  for (int y = 0; y < h; ++y) {
    const double v = 2.0 * (y + 0.5) / h - 1.0;
    for (int xi = 0; xi < w; ++xi) {
      const double u = 2.0 * (xi + 0.5) / w - 1.0;
      double mag = 0.0;
      for (const auto& e : shapes) {
        const double dy = v - e.cy, dx = u - e.cx;
        const double ca = std::cos(e.angle), sa = std::sin(e.angle);
        const double ry = (dy * ca - dx * sa) / e.ry, rx = (dy * sa + dx * ca) / e.rx;
        if (ry * ry + rx * rx <= 1.0) mag += e.value;
      }
      // gentle smooth modulation makes the phantom piecewise-smooth
      mag *= 1.0 + 0.1 * std::cos(1.3 * u + 0.7 * v);
      x(y, xi) = std::polar(mag, phase0 + ramp_y * v + ramp_x * u);
      peak = std::max(peak, mag);
    }
  }
  for (auto& p : x.data()) p /= peak;
  return x;
}

CoilSensitivityMaps make_coil_maps(int c, int h, int w, std::uint64_t seed) {
  if (c < 1) throw ParameterError("coil count must be >= 1");
  Rng rng(sub_seed(seed, "coil-maps"));
  CoilSensitivityMaps s(c, h, w);
  const double offset = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double width = 0.45 * std::max(h, w);
  for (int coil = 0; coil < c; ++coil) {
    const double a = offset + 2.0 * std::numbers::pi * coil / c;
    const double cy = h / 2.0 + (h / 2.0) * std::sin(a), cx = w / 2.0 + (w / 2.0) * std::cos(a);
    const double phase0 = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const double gy = rng.uniform(-1.0, 1.0) / h, gx = rng.uniform(-1.0, 1.0) / w;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double dy = y - cy, dx = x - cx;
        const double mag = std::exp(-(dy * dy + dx * dx) / (2.0 * width * width));
        s(coil, y, x) = std::polar(mag, phase0 + std::numbers::pi * (gy * dy + gx * dx));
      }
  }
  renormalize(s);
  return s;
}

double normalization_error(const CoilSensitivityMaps& sens) {
  double worst = 0.0;
  const auto plane = sens.plane();
  for (std::size_t p = 0; p < plane; ++p) {
    double total = 0.0;
    for (int c = 0; c < sens.coils(); ++c) total += std::norm(sens.data()[c * plane + p]);
    worst = std::max(worst, std::abs(total - 1.0));
  }
  return worst;
}

void renormalize(CoilSensitivityMaps& sens, double floor) {
  const auto plane = sens.plane();
  auto d = sens.data();
  for (std::size_t p = 0; p < plane; ++p) {
    double total = 0.0;
    for (int c = 0; c < sens.coils(); ++c) total += std::norm(d[c * plane + p]);
    if (total < floor) {
      for (int c = 0; c < sens.coils(); ++c) d[c * plane + p] = cplx{};
      continue;
    }
    const double inv = 1.0 / std::sqrt(total);
    for (int c = 0; c < sens.coils(); ++c) d[c * plane + p] *= inv;
  }
}

}  // namespace moero
