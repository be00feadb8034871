#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace moero {

enum class MaskFamily { Uniform, KtGaussian, KtRadial };

/// Acceleration factors used when generating masks for training iterations.
inline constexpr std::array<int, 7> kTrainingAccelerations{4, 8, 10, 12, 16, 20, 24};
inline constexpr int kDefaultAcsLines = 20;

std::string_view to_string(MaskFamily f);
MaskFamily parse_mask_family(std::string_view name);

/// Binary phase-encode line mask, replicated across the frequency-encode axis.
struct SamplingMask {
  std::vector<std::uint8_t> lines;
  int acceleration = 1;
  MaskFamily family = MaskFamily::Uniform;
  int acs_count = 0;

  int height() const { return static_cast<int>(lines.size()); }
  int sampled_count() const;
  bool sampled(int k) const { return lines[static_cast<std::size_t>(k)] != 0; }
  /// First index of the centered ACS block.
  int acs_begin() const { return height() / 2 - acs_count / 2; }

  /// All lines sampled; used for fully sampled acquisitions.
  static SamplingMask full(int h);
};

/// Line budget: round(h / acceleration), clamped to [acs, h].
int line_budget(int h, int acceleration, int acs);

/// Generate an undersampling mask. In strict mode the acceleration must be
/// one of kTrainingAccelerations; otherwise any integer >= 2 is accepted.
SamplingMask make_mask(MaskFamily family, int h, int acceleration, int acs, std::uint64_t seed, bool strict = false);

}  // namespace moero
