#include "moero/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "moero/rng.hpp"

namespace moero::augment {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

int wrap(int i, int n) { return ((i % n) + n) % n; }

double step_ulps(double v, int n) {
  const double dir = n > 0 ? HUGE_VAL : -HUGE_VAL;
  for (int k = 0; k < std::abs(n); ++k) v = std::nextafter(v, dir);
  return v;
}

// y * psi nudged by a few ulps so that |result| == |y| exactly.
cplx rotate_exact(cplx y, cplx psi) {
  const cplx z = y * psi;
  const double r = std::abs(y);
  double re = z.real(), im = z.imag();
  double& big = std::abs(re) >= std::abs(im) ? re : im;
  for (int i = 0; i < 64; ++i) {
    const double m = std::abs(cplx(re, im));
    if (m == r) return {re, im};
    big = std::nextafter(big, (m < r) == (big >= 0) ? HUGE_VAL : -HUGE_VAL);
  }
  for (int a = -4; a <= 4; ++a)
    for (int b = -4; b <= 4; ++b) {
      const cplx c(step_ulps(z.real(), a), step_ulps(z.imag(), b));
      if (std::abs(c) == r) return c;
    }
  return z;
}

// Exact index permutation: out(y, x) = in(src(y, x)).
template <class Map>
void permute_plane(std::span<const cplx> in, std::span<cplx> out, int h, int w, Map src) {
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const auto [sy, sx] = src(y, x);
      out[static_cast<std::size_t>(y) * w + x] = in[static_cast<std::size_t>(sy) * w + sx];
    }
}

struct Tap {
  std::size_t index;
  double weight;
};

// Bilinear taps for one destination pixel; neighbours outside the FOV contribute zero.
using TapList = std::vector<std::array<Tap, 4>>;

TapList bilinear_taps(int h, int w, const std::vector<double>& src_y, const std::vector<double>& src_x) {
  TapList taps(src_y.size());
  for (std::size_t p = 0; p < src_y.size(); ++p) {
    const double fy = std::floor(src_y[p]), fx = std::floor(src_x[p]);
    const double ty = src_y[p] - fy, tx = src_x[p] - fx;
    const int y0 = static_cast<int>(fy), x0 = static_cast<int>(fx);
    const int ys[2] = {y0, y0 + 1};
    const int xs[2] = {x0, x0 + 1};
    const double wy[2] = {1.0 - ty, ty};
    const double wx[2] = {1.0 - tx, tx};
    int t = 0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b, ++t) {
        const bool inside = ys[a] >= 0 && ys[a] < h && xs[b] >= 0 && xs[b] < w;
        taps[p][t] = inside ? Tap{static_cast<std::size_t>(ys[a]) * w + xs[b], wy[a] * wx[b]} : Tap{0, 0.0};
      }
  }
  return taps;
}

void resample_plane(std::span<const cplx> in, std::span<cplx> out, const TapList& taps) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(taps.size()); ++p) {
    cplx acc{};
    for (const auto& tap : taps[static_cast<std::size_t>(p)])
      if (tap.weight != 0.0) acc += tap.weight * in[tap.index];
    out[static_cast<std::size_t>(p)] = acc;
  }
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) total += k[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (auto& v : k) v /= total;
  return k;
}

// Separable Gaussian smoothing with edge clamping.
std::vector<double> smooth(const std::vector<double>& f, int h, int w, double sigma) {
  const auto k = gaussian_kernel(sigma);
  const int r = static_cast<int>(k.size() / 2);
  std::vector<double> tmp(f.size()), out(f.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[static_cast<std::size_t>(i + r)] * f[static_cast<std::size_t>(y) * w + std::clamp(x + i, 0, w - 1)];
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[static_cast<std::size_t>(i + r)] * tmp[static_cast<std::size_t>(std::clamp(y + i, 0, h - 1)) * w + x];
      out[static_cast<std::size_t>(y) * w + x] = acc;
    }
  return out;
}

// Inverse coordinate map of an interpolating transform, one entry per destination pixel.
void source_coordinates(const GeoTransform& t, int h, int w, std::vector<double>& sy, std::vector<double>& sx) {
  const std::size_t n = static_cast<std::size_t>(h) * w;
  sy.resize(n);
  sx.resize(n);
  const double cy = (h - 1) / 2.0, cx = (w - 1) / 2.0;
  std::visit(overloaded{
                 [&](const RotArbitrary& r) {
                   const double c = std::cos(r.theta), s = std::sin(r.theta);
                   for (int y = 0; y < h; ++y)
                     for (int x = 0; x < w; ++x) {
                       const double v = y - cy, u = x - cx;
                       const auto p = static_cast<std::size_t>(y) * w + x;
                       sy[p] = cy + c * v - s * u;
                       sx[p] = cx + s * v + c * u;
                     }
                 },
                 [&](const Scale& s) {
                   for (int y = 0; y < h; ++y)
                     for (int x = 0; x < w; ++x) {
                       const auto p = static_cast<std::size_t>(y) * w + x;
                       sy[p] = cy + (y - cy) / s.sy;
                       sx[p] = cx + (x - cx) / s.sx;
                     }
                 },
                 [&](const Elastic& e) {
                   Rng rng(sub_seed(e.seed, "elastic"));
                   std::vector<double> dy(n), dx(n);
                   for (std::size_t p = 0; p < n; ++p) {
                     dy[p] = rng.uniform(-1.0, 1.0);
                     dx[p] = rng.uniform(-1.0, 1.0);
                   }
                   dy = smooth(dy, h, w, e.sigma);
                   dx = smooth(dx, h, w, e.sigma);
                   double peak = 0.0;
                   for (std::size_t p = 0; p < n; ++p) peak = std::max(peak, std::hypot(dy[p], dx[p]));
                   const double gain = peak > 0.0 ? e.alpha / peak : 0.0;
                   for (int y = 0; y < h; ++y)
                     for (int x = 0; x < w; ++x) {
                       const auto p = static_cast<std::size_t>(y) * w + x;
                       sy[p] = y + gain * dy[p];
                       sx[p] = x + gain * dx[p];
                     }
                 },
                 [](const auto&) { throw PreconditionError("transform is not interpolating"); },
             },
             t);
}

// Source index for the exact (integer) transforms.
std::pair<int, int> permuted_source(const GeoTransform& t, int h, int w, int y, int x) {
  return std::visit(overloaded{
                        [&](const FlipH&) { return std::pair{y, w - 1 - x}; },
                        [&](const FlipV&) { return std::pair{h - 1 - y, x}; },
                        [&](const ShiftInt& s) { return std::pair{wrap(y - s.dy, h), wrap(x - s.dx, w)}; },
                        [&](const Rot90& r) {
                          // counter-clockwise quarter turns on a square grid
                          int sy = y, sx = x;
                          for (int i = 0; i < r.n; ++i) {
                            const int ny = sx, nx = w - 1 - sy;
                            sy = ny;
                            sx = nx;
                          }
                          return std::pair{sy, sx};
                        },
                        [](const auto&) -> std::pair<int, int> { throw PreconditionError("transform is not a permutation"); },
                    },
                    t);
}

}  // namespace

std::string describe(const GeoTransform& t) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const FlipH&) { os << "flip_h"; },
                 [&](const FlipV&) { os << "flip_v"; },
                 [&](const ShiftInt& s) { os << "shift(" << s.dy << "," << s.dx << ")"; },
                 [&](const Rot90& r) { os << "rot90(" << r.n << ")"; },
                 [&](const RotArbitrary& r) { os << "rot(" << r.theta << ")"; },
                 [&](const Scale& s) { os << "scale(" << s.sy << "," << s.sx << ")"; },
                 [&](const Elastic& e) { os << "elastic(" << e.alpha << "," << e.sigma << "," << e.seed << ")"; },
             },
             t);
  return os.str();
}

bool is_interpolating(const GeoTransform& t) {
  return std::holds_alternative<RotArbitrary>(t) || std::holds_alternative<Scale>(t) || std::holds_alternative<Elastic>(t);
}

void validate(const GeoTransform& t) {
  std::visit(overloaded{
                 [](const Rot90& r) {
                   if (r.n < 1 || r.n > 3) throw ParameterError("rot90 turns must be 1, 2 or 3");
                 },
                 [](const RotArbitrary& r) {
                   if (!std::isfinite(r.theta) || std::abs(r.theta) > std::numbers::pi)
                     throw ParameterError("rotation angle must satisfy |theta| <= pi");
                 },
                 [](const Scale& s) {
                   if (!(s.sy >= 0.7 && s.sy <= 1.4 && s.sx >= 0.7 && s.sx <= 1.4))
                     throw ParameterError("scale factors must lie in [0.7, 1.4]");
                 },
                 [](const Elastic& e) {
                   if (!(e.alpha >= 0.0 && e.alpha <= 10.0)) throw ParameterError("elastic alpha must lie in [0, 10]");
                   if (!(e.sigma >= 2.0)) throw ParameterError("elastic sigma must be >= 2");
                 },
                 [](const auto&) {},
             },
             t);
}

NoiseSpec NoiseSpec::from_level(NoiseLevel level, const KSpace& reference) {
  const double frac = level == NoiseLevel::Light ? kLightNoiseFraction : kHeavyNoiseFraction;
  return NoiseSpec{frac * max_abs(reference.data()), level};
}

std::pair<ComplexImage, CoilSensitivityMaps> apply_geo(const ComplexImage& x, const CoilSensitivityMaps& sens,
                                                       const GeoTransform& t) {
  validate(t);
  if (!sens.matches_image(x)) throw DimensionError("image and coil maps disagree in shape");
  const int h = x.height(), w = x.width();
  ComplexImage xo(h, w);
  CoilSensitivityMaps so(sens.coils(), h, w);

  if (!is_interpolating(t)) {
    if (const auto* r = std::get_if<Rot90>(&t); r && r->n % 2 == 1 && h != w)
      throw DimensionError("odd quarter turns need a square image");
    auto src = [&](int y, int xx) { return permuted_source(t, h, w, y, xx); };
    permute_plane(x.data(), xo.data(), h, w, src);
    for (int c = 0; c < sens.coils(); ++c) permute_plane(sens.coil(c), so.coil(c), h, w, src);
    return {std::move(xo), std::move(so)};
  }

  std::vector<double> sy, sx;
  source_coordinates(t, h, w, sy, sx);
  const auto taps = bilinear_taps(h, w, sy, sx);
  resample_plane(x.data(), xo.data(), taps);
  for (int c = 0; c < sens.coils(); ++c) resample_plane(sens.coil(c), so.coil(c), taps);
  renormalize(so);
  // pixels with no remaining sensitivity carry no signal either
  const auto plane = so.plane();
  for (std::size_t p = 0; p < plane; ++p) {
    bool any = false;
    for (int c = 0; c < so.coils() && !any; ++c) any = so.data()[c * plane + p] != cplx{};
    if (!any) xo.data()[p] = cplx{};
  }
  return {std::move(xo), std::move(so)};
}

KSpace regenerate_kspace(const ComplexImage& x_aug, const CoilSensitivityMaps& sens_aug, const SamplingMask& mask) {
  return forward(x_aug, AcquisitionModel(sens_aug, mask));
}

KSpace add_thermal_noise(const KSpace& y, const NoiseSpec& spec, std::uint64_t seed) {
  if (!(spec.sigma >= 0.0) || !std::isfinite(spec.sigma)) throw ParameterError("noise sigma must be >= 0");
  if (spec.sigma == 0.0) return y;
  KSpace out = y;
  Rng rng(sub_seed(seed, "thermal-noise"));
  const double component = spec.sigma / std::numbers::sqrt2;
  for (auto& v : out.data()) {
    const double re = rng.normal(), im = rng.normal();
    v += cplx{component * re, component * im};
  }
  const double before = max_abs(y.data());
  if (before > 0.0) {
    const double scale = 1.0 / std::max(1.0, max_abs(out.data()) / before);
    if (scale != 1.0)
      for (auto& v : out.data()) v *= scale;
  }
  return out;
}

KSpace apply_motion(const KSpace& y, const MotionSpec& spec) {
  if (!std::isfinite(spec.phi_odd) || !std::isfinite(spec.phi_even)) throw ParameterError("motion phases must be finite");
  KSpace out = y;
  const cplx odd = std::polar(1.0, spec.phi_odd), even = std::polar(1.0, spec.phi_even);
  const int h = y.height(), w = y.width();
#pragma omp parallel for collapse(2) schedule(static)
  for (int c = 0; c < y.coils(); ++c)
    for (int k = 0; k < h; ++k) {
      const cplx psi = (k % 2 == 1) ? odd : even;
      for (int x = 0; x < w; ++x) out(c, k, x) = rotate_exact(out(c, k, x), psi);
    }
  return out;
}

void AugPolicy::validate() const {
  for (double p : {flip_h, flip_v, shift_p, rot90, rot_p, scale_p, elastic_p, noise_p, motion_p})
    if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("augmentation probabilities must lie in [0, 1]");
  if (shift_max < 0) throw ParameterError("shift max must be >= 0");
  if (!(rot_max_deg >= 0.0 && rot_max_deg <= 180.0)) throw ParameterError("rotation max must lie in [0, 180] degrees");
  if (!(scale_min >= 0.7 && scale_max <= 1.4 && scale_min <= scale_max))
    throw ParameterError("scale range must lie within [0.7, 1.4]");
  if (!(elastic_alpha >= 0.0 && elastic_alpha <= 10.0) || !(elastic_sigma >= 2.0))
    throw ParameterError("elastic parameters out of range");
}

AugPolicy AugPolicy::uniform(double p) {
  AugPolicy a;
  a.flip_h = a.flip_v = a.shift_p = a.rot90 = a.rot_p = a.scale_p = a.elastic_p = a.noise_p = a.motion_p = p;
  return a;
}

std::vector<Augmentation> sample_augmentation(const AugPolicy& policy, std::uint64_t seed) {
  policy.validate();
  Rng rng(sub_seed(seed, "augmentation"));
  std::vector<Augmentation> out;
  if (rng.bernoulli(policy.flip_h)) out.emplace_back(GeoTransform{FlipH{}});
  if (rng.bernoulli(policy.flip_v)) out.emplace_back(GeoTransform{FlipV{}});
  if (rng.bernoulli(policy.shift_p)) {
    const int dy = static_cast<int>(rng.uniform_int(-policy.shift_max, policy.shift_max));
    const int dx = static_cast<int>(rng.uniform_int(-policy.shift_max, policy.shift_max));
    out.emplace_back(GeoTransform{ShiftInt{dy, dx}});
  }
  if (rng.bernoulli(policy.rot90)) out.emplace_back(GeoTransform{Rot90{static_cast<int>(rng.uniform_int(1, 3))}});
  if (rng.bernoulli(policy.rot_p)) {
    const double deg = rng.uniform(-policy.rot_max_deg, policy.rot_max_deg);
    out.emplace_back(GeoTransform{RotArbitrary{deg * std::numbers::pi / 180.0}});
  }
  if (rng.bernoulli(policy.scale_p)) {
    const double sy = rng.uniform(policy.scale_min, policy.scale_max);
    const double sx = rng.uniform(policy.scale_min, policy.scale_max);
    out.emplace_back(GeoTransform{Scale{sy, sx}});
  }
  if (rng.bernoulli(policy.elastic_p))
    out.emplace_back(GeoTransform{Elastic{policy.elastic_alpha, policy.elastic_sigma, rng.next()}});
  if (rng.bernoulli(policy.noise_p)) out.emplace_back(NoiseStep{policy.noise_level, rng.next()});
  if (rng.bernoulli(policy.motion_p)) {
    const double po = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const double pe = rng.uniform(-std::numbers::pi, std::numbers::pi);
    out.emplace_back(MotionSpec{po, pe});
  }
  return out;
}

AugmentedSample apply_augmentations(const ComplexImage& x, const CoilSensitivityMaps& sens,
                                    const std::vector<Augmentation>& steps) {
  ComplexImage xi = x;
  CoilSensitivityMaps si = sens;
  for (const auto& step : steps)
    if (const auto* g = std::get_if<GeoTransform>(&step)) std::tie(xi, si) = apply_geo(xi, si, *g);

  KSpace y = regenerate_kspace(xi, si, SamplingMask::full(xi.height()));
  for (const auto& step : steps) {
    if (const auto* n = std::get_if<NoiseStep>(&step)) y = add_thermal_noise(y, NoiseSpec::from_level(n->level, y), n->seed);
    if (const auto* m = std::get_if<MotionSpec>(&step)) y = apply_motion(y, *m);
  }
  return {std::move(xi), std::move(si), std::move(y)};
}

}  // namespace moero::augment
