#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace moero::sampler {

inline constexpr double kDamping = 0.8;
inline constexpr double kMinMultiplier = 0.05;

struct SampleRecord {
  std::string id;
  std::map<std::string, std::string> attributes;  ///< category -> group label
};

/// id -> weight, all weights > 0.
using WeightTable = std::map<std::string, double>;

/// Multiplier for a sample whose group under one category has `group_size`
/// members: 1 + ((N / n_groups) / group_size - 1) * 0.8, clamped to >= 0.05.
double multiplier(std::size_t total, std::size_t n_groups, std::size_t group_size);

struct UpdateStats {
  std::size_t clamped = 0;  ///< multipliers raised to kMinMultiplier
};

/// One multiplicative update per category, in declared order, starting from
/// `prior` (or 1.0 for every sample when prior is empty).
WeightTable update_weights(const std::vector<SampleRecord>& records, const std::vector<std::string>& categories,
                           const WeightTable& prior = {}, UpdateStats* stats = nullptr);

/// floor(w) + Bernoulli(frac(w)) per sample, iterating ids in sorted order.
std::map<std::string, std::uint64_t> draws_from_weights(const WeightTable& table, std::uint64_t seed);

/// Sum of weights per group label under one category.
std::map<std::string, double> group_mass(const std::vector<SampleRecord>& records, const WeightTable& table,
                                         const std::string& category);

}  // namespace moero::sampler
