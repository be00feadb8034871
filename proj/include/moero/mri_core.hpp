#pragma once

#include <cstdint>

#include "moero/mask.hpp"
#include "moero/types.hpp"

namespace moero {

/// Partial-Fourier multi-coil acquisition: sensitivities plus line mask.
struct AcquisitionModel {
  CoilSensitivityMaps sens;
  SamplingMask mask;

  AcquisitionModel(CoilSensitivityMaps s, SamplingMask m);

  int coils() const { return sens.coils(); }
  int height() const { return sens.height(); }
  int width() const { return sens.width(); }
};

/// y_c = M . F(S_c . x) with the centered unitary FFT; unsampled lines are exactly zero.
KSpace forward(const ComplexImage& x, const AcquisitionModel& model);

/// x = sum_c conj(S_c) . F^-1(M . y_c); exact adjoint of forward().
ComplexImage adjoint(const KSpace& y, const AcquisitionModel& model);

/// Coil combination sum_c conj(S_c) . F^-1(y_c), i.e. adjoint() with an all-ones mask.
ComplexImage sense_combine(const KSpace& y, const CoilSensitivityMaps& sens);

/// Piecewise-smooth ellipse phantom with a smooth phase ramp, max |x| = 1.
ComplexImage make_phantom(int h, int w, std::uint64_t seed);

/// Gaussian-profile coil maps centered on the border, normalized per pixel.
CoilSensitivityMaps make_coil_maps(int c, int h, int w, std::uint64_t seed);

/// Largest deviation of sum_c |S_c|^2 from 1 over all pixels.
double normalization_error(const CoilSensitivityMaps& sens);

/// Pixelwise renormalization to sum_c |S_c|^2 = 1. Pixels whose total
/// sensitivity is below `floor` are set to zero in every coil.
void renormalize(CoilSensitivityMaps& sens, double floor = 1e-12);

}  // namespace moero
