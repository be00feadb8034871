#include "reference.hpp"

#include <cmath>
#include <numbers>

namespace moero::reference {
namespace {

// One centered unitary DFT along a strided 1-D line.
void dft_line(const cplx* in, cplx* out, int n, std::ptrdiff_t stride, double sign) {
  const int c = n / 2;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int j = 0; j < n; ++j) {
    cplx acc{};
    for (int i = 0; i < n; ++i) {
      const double phase = sign * 2.0 * std::numbers::pi * static_cast<double>((j - c) * (i - c)) / n;
      acc += in[i * stride] * cplx(std::cos(phase), std::sin(phase));
    }
    out[j * stride] = acc * scale;
  }
}

}  // namespace

std::vector<cplx> dft2c(const std::vector<cplx>& in, int h, int w, bool inverse) {
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<cplx> rows(in.size()), out(in.size());
  for (int y = 0; y < h; ++y) dft_line(in.data() + static_cast<std::ptrdiff_t>(y) * w, rows.data() + static_cast<std::ptrdiff_t>(y) * w, w, 1, sign);
  for (int x = 0; x < w; ++x) dft_line(rows.data() + x, out.data() + x, h, w, sign);
  return out;
}

std::vector<cplx> dft2c_full(const std::vector<cplx>& in, int h, int w) {
  std::vector<cplx> out(in.size());
  const int ch = h / 2, cw = w / 2;
  const double scale = 1.0 / std::sqrt(static_cast<double>(h) * w);
  for (int ky = 0; ky < h; ++ky)
    for (int kx = 0; kx < w; ++kx) {
      cplx acc{};
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const double phase = -2.0 * std::numbers::pi *
                               (static_cast<double>((ky - ch) * (y - ch)) / h + static_cast<double>((kx - cw) * (x - cw)) / w);
          acc += in[static_cast<std::size_t>(y) * w + x] * cplx(std::cos(phase), std::sin(phase));
        }
      out[static_cast<std::size_t>(ky) * w + kx] = acc * scale;
    }
  return out;
}

KSpace forward(const ComplexImage& x, const CoilSensitivityMaps& sens, const SamplingMask& mask) {
  const int h = x.height(), w = x.width();
  KSpace y(sens.coils(), h, w);
  for (int c = 0; c < sens.coils(); ++c) {
    std::vector<cplx> img(x.size());
    for (int yy = 0; yy < h; ++yy)
      for (int xx = 0; xx < w; ++xx) img[static_cast<std::size_t>(yy) * w + xx] = sens(c, yy, xx) * x(yy, xx);
    const auto k = dft2c(img, h, w);
    for (int ky = 0; ky < h; ++ky)
      for (int kx = 0; kx < w; ++kx) y(c, ky, kx) = mask.sampled(ky) ? k[static_cast<std::size_t>(ky) * w + kx] : cplx{};
  }
  return y;
}

ComplexImage adjoint(const KSpace& y, const CoilSensitivityMaps& sens, const SamplingMask& mask) {
  const int h = y.height(), w = y.width();
  ComplexImage x(h, w);
  for (int c = 0; c < y.coils(); ++c) {
    std::vector<cplx> k(y.plane());
    for (int ky = 0; ky < h; ++ky)
      for (int kx = 0; kx < w; ++kx) k[static_cast<std::size_t>(ky) * w + kx] = mask.sampled(ky) ? y(c, ky, kx) : cplx{};
    const auto img = dft2c(k, h, w, true);
    for (int yy = 0; yy < h; ++yy)
      for (int xx = 0; xx < w; ++xx) x(yy, xx) += std::conj(sens(c, yy, xx)) * img[static_cast<std::size_t>(yy) * w + xx];
  }
  return x;
}

std::vector<int> nearest_codewords(const RealMatrix& features, const RealMatrix& codewords) {
  std::vector<int> out(features.rows);
  for (std::size_t i = 0; i < features.rows; ++i) {
    std::vector<double> dist(codewords.rows);
    for (std::size_t k = 0; k < codewords.rows; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < features.cols; ++j) {
        const double d = features(i, j) - codewords(k, j);
        s += d * d;
      }
      dist[k] = s;
    }
    std::size_t best = 0;
    for (std::size_t k = 0; k < dist.size(); ++k)
      if (dist[k] < dist[best]) best = k;
    out[i] = static_cast<int>(best);
  }
  return out;
}

ComplexImage convolve_periodic(const ComplexImage& x, const std::vector<double>& kernel1d) {
  const int h = x.height(), w = x.width(), r = static_cast<int>(kernel1d.size() / 2);
  ComplexImage out(h, w);
  for (int y = 0; y < h; ++y)
    for (int xx = 0; xx < w; ++xx) {
      cplx acc{};
      for (int i = -r; i <= r; ++i)
        for (int j = -r; j <= r; ++j)
          acc += kernel1d[static_cast<std::size_t>(i + r)] * kernel1d[static_cast<std::size_t>(j + r)] *
                 x(((y + i) % h + h) % h, ((xx + j) % w + w) % w);
      out(y, xx) = acc;
    }
  return out;
}

}  // namespace moero::reference
