#include "moero/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace moero::metrics {
namespace {

void check_shapes(const ComplexImage& a, const ComplexImage& b) {
  if (!a.same_shape(b)) throw DimensionError("metric inputs differ in shape");
}

double mse(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

}  // namespace

std::vector<double> magnitude(const ComplexImage& x) {
  std::vector<double> m(x.size());
  const auto d = x.data();
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::abs(d[i]);
  return m;
}

double nmse(const ComplexImage& xhat, const ComplexImage& x) {
  check_shapes(xhat, x);
  const auto a = magnitude(xhat), b = magnitude(x);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  if (den == 0.0) throw DegenerateReference("nmse undefined for an all-zero reference");
  return num / den;
}

double psnr(const ComplexImage& xhat, const ComplexImage& x) {
  check_shapes(xhat, x);
  const auto a = magnitude(xhat), b = magnitude(x);
  const double err = mse(a, b);
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  const double peak = *std::max_element(b.begin(), b.end());
  return 10.0 * std::log10(peak * peak / err);
}

double ssim_real(std::span<const double> test, std::span<const double> ref, int h, int w, double data_range) {
  constexpr int win = kSsimWindow;
  if (test.size() != ref.size() || ref.size() != static_cast<std::size_t>(h) * w) throw DimensionError("ssim inputs differ in shape");
  if (h < win || w < win) throw DimensionError("ssim needs images at least 7x7");
  if (!(data_range > 0.0)) throw DegenerateReference("ssim undefined for zero dynamic range");
  const double c1 = (kSsimK1 * data_range) * (kSsimK1 * data_range);
  const double c2 = (kSsimK2 * data_range) * (kSsimK2 * data_range);
  constexpr double n = win * win;
  constexpr double cov_norm = n / (n - 1.0);

  double total = 0.0;
  for (int y = 0; y + win <= h; ++y)
    for (int x = 0; x + win <= w; ++x) {
      double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
      for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
          const auto p = static_cast<std::size_t>(y + i) * w + (x + j);
          const double a = test[p], b = ref[p];
          sa += a;
          sb += b;
          saa += a * a;
          sbb += b * b;
          sab += a * b;
        }
      const double ma = sa / n, mb = sb / n;
      const double va = cov_norm * (saa / n - ma * ma);
      const double vb = cov_norm * (sbb / n - mb * mb);
      const double vab = cov_norm * (sab / n - ma * mb);
      total += ((2 * ma * mb + c1) * (2 * vab + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
  return total / static_cast<double>((h - win + 1) * (w - win + 1));
}

double ssim(const ComplexImage& xhat, const ComplexImage& x) {
  check_shapes(xhat, x);
  const auto a = magnitude(xhat), b = magnitude(x);
  const auto [lo, hi] = std::minmax_element(b.begin(), b.end());
  return ssim_real(a, b, x.height(), x.width(), *hi - *lo);
}

MetricReport evaluate(const ComplexImage& xhat, const ComplexImage& x) {
  return MetricReport{ssim(xhat, x), psnr(xhat, x), nmse(xhat, x)};
}

}  // namespace moero::metrics
