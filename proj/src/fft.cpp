#include "moero/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace moero::fft {
namespace {

// FFTW planning is not thread-safe; execution of an existing plan on new
// arrays is. Plans are created once per (h, w, direction) and kept for the
// lifetime of the process.
class PlanCache {
 public:
  fftw_plan get(int h, int w, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_tuple(h, w, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<cplx> a(static_cast<std::size_t>(h) * w), b(a.size());
    fftw_plan p = fftw_plan_dft_2d(h, w, reinterpret_cast<fftw_complex*>(a.data()),
                                   reinterpret_cast<fftw_complex*>(b.data()), sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, p);
    return p;
  }
  ~PlanCache() {
    for (auto& [k, p] : plans_) fftw_destroy_plan(p);
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

void transform(std::span<const cplx> in, std::span<cplx> out, int h, int w, int sign) {
  const std::size_t n = static_cast<std::size_t>(h) * w;
  if (in.size() != n || out.size() != n) throw DimensionError("fft buffer does not match [H, W]");
  const int ch = h / 2, cw = w / 2;
  std::vector<cplx> shifted(n), spectrum(n);
  // ifftshift: element at the array center moves to index 0
  for (int y = 0; y < h; ++y) {
    const int sy = (y + ch) % h;
    for (int x = 0; x < w; ++x) shifted[static_cast<std::size_t>(y) * w + x] = in[static_cast<std::size_t>(sy) * w + (x + cw) % w];
  }
  fftw_execute_dft(cache().get(h, w, sign), reinterpret_cast<fftw_complex*>(shifted.data()),
                   reinterpret_cast<fftw_complex*>(spectrum.data()));
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  // fftshift: index 0 moves back to the center
  for (int y = 0; y < h; ++y) {
    const int sy = (y + h - ch) % h;
    for (int x = 0; x < w; ++x)
      out[static_cast<std::size_t>(y) * w + x] = spectrum[static_cast<std::size_t>(sy) * w + (x + w - cw) % w] * scale;
  }
}

}  // namespace

void fft2c(std::span<const cplx> in, std::span<cplx> out, int h, int w) { transform(in, out, h, w, FFTW_FORWARD); }

void ifft2c(std::span<const cplx> in, std::span<cplx> out, int h, int w) { transform(in, out, h, w, FFTW_BACKWARD); }

}  // namespace moero::fft
