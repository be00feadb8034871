#pragma once

// Serial reference implementations. They share no code with the parallel
// kernels and exist for tests and the benchmark.

#include <vector>

#include "moero/mask.hpp"
#include "moero/types.hpp"

namespace moero::reference {

/// Centered orthonormal DFT along both axes by direct summation
/// (separable, O(HW(H+W))).
std::vector<cplx> dft2c(const std::vector<cplx>& in, int h, int w, bool inverse = false);

/// Full O((HW)^2) 2-D DFT; only for tiny arrays.
std::vector<cplx> dft2c_full(const std::vector<cplx>& in, int h, int w);

KSpace forward(const ComplexImage& x, const CoilSensitivityMaps& sens, const SamplingMask& mask);
ComplexImage adjoint(const KSpace& y, const CoilSensitivityMaps& sens, const SamplingMask& mask);

/// Brute-force nearest codeword scan, first minimum wins.
std::vector<int> nearest_codewords(const RealMatrix& features, const RealMatrix& codewords);

/// Direct 2-D periodic convolution with the outer product of a 1-D kernel.
ComplexImage convolve_periodic(const ComplexImage& x, const std::vector<double>& kernel1d);

}  // namespace moero::reference
