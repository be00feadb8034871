#pragma once

#include <span>

#include "moero/types.hpp"

namespace moero::fft {

/// Centered orthonormal 2-D DFT: out = fftshift(FFT2(ifftshift(in))) / sqrt(H*W).
/// `in` and `out` may alias. Thread-safe.
void fft2c(std::span<const cplx> in, std::span<cplx> out, int h, int w);

/// Inverse of fft2c (also unitary).
void ifft2c(std::span<const cplx> in, std::span<cplx> out, int h, int w);

}  // namespace moero::fft
