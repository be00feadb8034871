#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "moero/mri_core.hpp"

namespace moero::augment {

// Image-domain transforms. Flips and integer shifts/rotations are exact index
// permutations; the rest resample bilinearly with zero fill outside the FOV.
struct FlipH {};  ///< mirror along the frequency-encode (W) axis
struct FlipV {};  ///< mirror along the phase-encode (H) axis
struct ShiftInt {
  int dy = 0;
  int dx = 0;
};
struct Rot90 {
  int n = 1;  ///< counter-clockwise quarter turns, 1..3
};
struct RotArbitrary {
  double theta = 0.0;  ///< radians, |theta| <= pi
};
struct Scale {
  double sy = 1.0;
  double sx = 1.0;
};
struct Elastic {
  double alpha = 4.0;  ///< peak displacement in pixels
  double sigma = 4.0;  ///< Gaussian smoothing width of the displacement field
  std::uint64_t seed = 0;
};

using GeoTransform = std::variant<FlipH, FlipV, ShiftInt, Rot90, RotArbitrary, Scale, Elastic>;

std::string describe(const GeoTransform& t);
bool is_interpolating(const GeoTransform& t);
void validate(const GeoTransform& t);

enum class NoiseLevel { Light, Heavy };

/// Relative noise levels, as a fraction of the k-space infinity norm.
inline constexpr double kLightNoiseFraction = 0.02;
inline constexpr double kHeavyNoiseFraction = 0.08;

struct NoiseSpec {
  double sigma = 0.0;  ///< complex std: each of re/im gets sigma^2 / 2
  std::optional<NoiseLevel> level;

  static NoiseSpec from_level(NoiseLevel level, const KSpace& reference);
};

struct MotionSpec {
  double phi_odd = 0.0;
  double phi_even = 0.0;
};

/// Transform image and every coil map identically. Interpolated maps are
/// renormalized per pixel; pixels that leave the FOV in every coil become zero.
std::pair<ComplexImage, CoilSensitivityMaps> apply_geo(const ComplexImage& x, const CoilSensitivityMaps& sens,
                                                       const GeoTransform& t);

/// Forward model applied to the augmented pair.
KSpace regenerate_kspace(const ComplexImage& x_aug, const CoilSensitivityMaps& sens_aug, const SamplingMask& mask);

/// y + E with E ~ CN(0, sigma^2 I) on every entry, then scaled down by
/// max(1, |y_noise|_inf / |y|_inf). A zero input is left unscaled.
KSpace add_thermal_noise(const KSpace& y, const NoiseSpec& spec, std::uint64_t seed);

/// Line k of every coil multiplied by exp(j phi_odd) (k odd) or exp(j phi_even) (k even).
KSpace apply_motion(const KSpace& y, const MotionSpec& spec);

// Augmentation policy and sampling.

struct AugPolicy {
  double flip_h = 0.0;
  double flip_v = 0.0;
  double shift_p = 0.0;
  int shift_max = 4;
  double rot90 = 0.0;
  double rot_p = 0.0;
  double rot_max_deg = 15.0;
  double scale_p = 0.0;
  double scale_min = 0.9;
  double scale_max = 1.1;
  double elastic_p = 0.0;
  double elastic_alpha = 4.0;
  double elastic_sigma = 4.0;
  double noise_p = 0.0;
  NoiseLevel noise_level = NoiseLevel::Light;
  double motion_p = 0.0;

  void validate() const;
  /// Every augmentation with the given probability.
  static AugPolicy uniform(double p);
};

struct NoiseStep {
  NoiseLevel level;
  std::uint64_t seed;
};

using Augmentation = std::variant<GeoTransform, NoiseStep, MotionSpec>;

/// Image-domain entries precede k-space entries (noise, then motion).
std::vector<Augmentation> sample_augmentation(const AugPolicy& policy, std::uint64_t seed);

struct AugmentedSample {
  ComplexImage image;
  CoilSensitivityMaps sens;
  KSpace kspace;  ///< fully sampled
};

/// Run a sampled augmentation list on a fully sampled acquisition.
AugmentedSample apply_augmentations(const ComplexImage& x, const CoilSensitivityMaps& sens,
                                    const std::vector<Augmentation>& steps);

}  // namespace moero::augment
