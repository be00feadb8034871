#pragma once

#include <span>
#include <vector>

#include "moero/types.hpp"

namespace moero::metrics {

inline constexpr int kSsimWindow = 7;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;

struct MetricReport {
  double ssim = 0.0;
  double psnr = 0.0;  ///< +inf when the images are identical
  double nmse = 0.0;
};

std::vector<double> magnitude(const ComplexImage& x);

/// || |xhat| - |x| ||^2 / || |x| ||^2.
double nmse(const ComplexImage& xhat, const ComplexImage& x);

/// 10 log10(max|x|^2 / MSE) on magnitudes; +inf for MSE == 0.
double psnr(const ComplexImage& xhat, const ComplexImage& x);

/// Mean SSIM over all valid 7x7 uniform windows of the magnitude images,
/// dynamic range max|x| - min|x| taken from the reference.
double ssim(const ComplexImage& xhat, const ComplexImage& x);

/// SSIM kernel on real images (sample covariance, valid windows only).
double ssim_real(std::span<const double> test, std::span<const double> ref, int h, int w, double data_range);

MetricReport evaluate(const ComplexImage& xhat, const ComplexImage& x);

}  // namespace moero::metrics
