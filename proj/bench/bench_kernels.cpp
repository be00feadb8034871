// Timings of the OpenMP kernels against the serial reference implementations.
// Usage: bench_kernels [size] [coils] [repeats]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include "moero/mri_core.hpp"
#include "moero/recon.hpp"
#include "moero/vq.hpp"
#include "reference.hpp"

using namespace moero;

namespace {

double seconds(const std::function<void()>& f, int repeats) {
  f();  // warm up plans and caches
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < repeats; ++i) f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / repeats;
}

void row(const char* name, double parallel, double serial) {
  std::printf("%-22s %10.3f ms %10.3f ms %8.1fx\n", name, parallel * 1e3, serial * 1e3, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 128;
  const int coils = argc > 2 ? std::atoi(argv[2]) : 8;
  const int repeats = argc > 3 ? std::atoi(argv[3]) : 5;
  std::printf("image %dx%d, %d coils, %d threads\n", n, n, coils, omp_get_max_threads());
  std::printf("%-22s %13s %13s %9s\n", "kernel", "parallel", "reference", "speedup");

  const auto x = make_phantom(n, n, 0);
  const auto s = make_coil_maps(coils, n, n, 0);
  const auto m = make_mask(MaskFamily::Uniform, n, 4, 20, 0);
  const AcquisitionModel model(s, m);
  const auto y = forward(x, model);

  row("forward", seconds([&] { (void)forward(x, model); }, repeats),
      seconds([&] { (void)reference::forward(x, s, m); }, 1));
  row("adjoint", seconds([&] { (void)adjoint(y, model); }, repeats),
      seconds([&] { (void)reference::adjoint(y, s, m); }, 1));

  const auto k = recon::binomial_kernel(2);
  row("smoothing r=2", seconds([&] { (void)recon::apply_expert(x, recon::GaussianSmooth{1.0, 2}); }, repeats),
      seconds([&] { (void)reference::convolve_periodic(x, k); }, repeats));

  const auto f = vq::extract_features(x, 2);
  const auto cb = vq::train(f, 256, 0.99, 2, 1);
  row("quantize K=256", seconds([&] { (void)vq::quantize(f, cb); }, repeats),
      seconds([&] { (void)reference::nearest_codewords(f, cb.codewords()); }, 1));

  row("dc_step", seconds([&] { (void)recon::dc_step(x, y, model, 0.5); }, repeats), seconds([&] {
        const auto r = reference::forward(x, s, m);
        (void)reference::adjoint(r, s, m);
      }, 1));
  return 0;
}
