#include "moero/mask.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "moero/error.hpp"
#include "moero/rng.hpp"

namespace moero {
namespace {

// Non-ACS line indices in ascending order.
std::vector<int> outside_acs(const SamplingMask& m) {
  std::vector<int> out;
  for (int k = 0; k < m.height(); ++k)
    if (!m.sampled(k)) out.push_back(k);
  return out;
}

double center_weight(int k, int h) {
  const double width = h / 6.0;
  const double d = k - h / 2.0;
  return std::exp(-d * d / (2.0 * width * width));
}

// Weighted draw without replacement of `count` lines from the unsampled set
// (Efraimidis-Spirakis keys: equivalent to sequential proportional draws).
void draw_gaussian(SamplingMask& m, int count, Rng& rng) {
  if (count <= 0) return;
  const auto pool = outside_acs(m);
  std::vector<std::pair<double, int>> keyed;
  keyed.reserve(pool.size());
  for (int k : pool) {
    double u;
    do {
      u = rng.uniform();
    } while (u <= 0.0);
    keyed.emplace_back(std::log(u) / center_weight(k, m.height()), k);
  }
  std::partial_sort(keyed.begin(), keyed.begin() + count, keyed.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
  for (int i = 0; i < count; ++i) m.lines[static_cast<std::size_t>(keyed[static_cast<std::size_t>(i)].second)] = 1;
}

void draw_uniform(SamplingMask& m, int count, Rng& rng) {
  if (count <= 0) return;
  const auto pool = outside_acs(m);
  const double step = static_cast<double>(pool.size()) / count;
  const double offset = rng.uniform() * step;
  for (int i = 0; i < count; ++i) {
    auto idx = static_cast<std::size_t>(std::floor(offset + i * step));
    idx = std::min(idx, pool.size() - 1);
    m.lines[static_cast<std::size_t>(pool[idx])] = 1;
  }
}

void draw_radial(SamplingMask& m, int count, int spokes, Rng& rng) {
  const int h = m.height();
  const double golden = std::numbers::pi * (std::numbers::phi - 1.0);
  double theta = rng.uniform(0.0, std::numbers::pi);
  int placed = 0;
  for (int s = 0; s < spokes && placed < count; ++s, theta += golden) {
    // phase-encode coordinate of the spoke's end point
    long k = std::lround(h / 2.0 + (h / 2.0) * std::cos(theta));
    k = std::clamp(k, 0L, static_cast<long>(h - 1));
    auto& line = m.lines[static_cast<std::size_t>(k)];
    if (!line) {
      line = 1;
      ++placed;
    }
  }
  draw_gaussian(m, count - placed, rng);
}

}  // namespace

std::string_view to_string(MaskFamily f) {
  switch (f) {
    case MaskFamily::Uniform: return "uniform";
    case MaskFamily::KtGaussian: return "kt-gaussian";
    case MaskFamily::KtRadial: return "kt-radial";
  }
  return "unknown";
}

MaskFamily parse_mask_family(std::string_view name) {
  if (name == "uniform" || name == "Uniform") return MaskFamily::Uniform;
  if (name == "kt-gaussian" || name == "KtGaussian" || name == "gaussian") return MaskFamily::KtGaussian;
  if (name == "kt-radial" || name == "KtRadial" || name == "radial") return MaskFamily::KtRadial;
  throw ParameterError("unknown mask family '" + std::string(name) + "'");
}

int SamplingMask::sampled_count() const { return static_cast<int>(std::count(lines.begin(), lines.end(), std::uint8_t{1})); }

SamplingMask SamplingMask::full(int h) {
  SamplingMask m;
  m.lines.assign(static_cast<std::size_t>(h), 1);
  m.acceleration = 1;
  m.acs_count = h;
  return m;
}

int line_budget(int h, int acceleration, int acs) {
  const long nominal = std::lround(static_cast<double>(h) / acceleration);
  return static_cast<int>(std::clamp<long>(nominal, acs, h));
}

SamplingMask make_mask(MaskFamily family, int h, int acceleration, int acs, std::uint64_t seed, bool strict) {
  if (acceleration <= 1) throw ParameterError("acceleration must be >= 2");
  if (strict && std::find(kTrainingAccelerations.begin(), kTrainingAccelerations.end(), acceleration) ==
                    kTrainingAccelerations.end())
    throw ParameterError("acceleration " + std::to_string(acceleration) + " is not a training acceleration");
  if (acs < 1) throw ParameterError("acs must be >= 1");
  if (acs >= h) throw ParameterError("acs must be smaller than the mask height");

  SamplingMask m;
  m.lines.assign(static_cast<std::size_t>(h), 0);
  m.acceleration = acceleration;
  m.family = family;
  m.acs_count = acs;
  for (int k = m.acs_begin(); k < m.acs_begin() + acs; ++k) m.lines[static_cast<std::size_t>(k)] = 1;

  const int extra = line_budget(h, acceleration, acs) - acs;
  Rng rng(sub_seed(seed, to_string(family)));
  switch (family) {
    case MaskFamily::Uniform: draw_uniform(m, extra, rng); break;
    case MaskFamily::KtGaussian: draw_gaussian(m, extra, rng); break;
    case MaskFamily::KtRadial:
      draw_radial(m, extra, static_cast<int>(std::lround(static_cast<double>(h) / acceleration)), rng);
      break;
  }
  return m;
}

}  // namespace moero
