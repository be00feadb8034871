#include "moero/sampler.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <set>

#include "moero/error.hpp"
#include "moero/rng.hpp"

namespace moero::sampler {

double multiplier(std::size_t total, std::size_t n_groups, std::size_t group_size) {
  if (n_groups == 0) throw ParameterError("category has no groups");
  if (group_size == 0) throw ParameterError("group size must be >= 1");
  const double avg = static_cast<double>(total) / static_cast<double>(n_groups);
  return 1.0 + (avg / static_cast<double>(group_size) - 1.0) * kDamping;
}

WeightTable update_weights(const std::vector<SampleRecord>& records, const std::vector<std::string>& categories,
                           const WeightTable& prior, UpdateStats* stats) {
  WeightTable w;
  for (const auto& r : records) {
    if (!w.emplace(r.id, 1.0).second) throw ParameterError("duplicate sample id '" + r.id + "'");
    if (!prior.empty()) {
      auto it = prior.find(r.id);
      if (it == prior.end()) throw ParameterError("prior weights missing sample '" + r.id + "'");
      if (!(it->second > 0.0)) throw ParameterError("prior weights must be > 0");
      w[r.id] = it->second;
    }
  }

  std::size_t clamped = 0;
  for (const auto& cat : categories) {
    std::map<std::string, std::size_t> sizes;
    for (const auto& r : records) {
      auto it = r.attributes.find(cat);
      if (it == r.attributes.end()) throw ParameterError("sample '" + r.id + "' lacks category '" + cat + "'");
      ++sizes[it->second];
    }
    if (sizes.empty()) throw ParameterError("category '" + cat + "' has no groups");
    for (const auto& r : records) {
      double m = multiplier(records.size(), sizes.size(), sizes.at(r.attributes.at(cat)));
      if (m < kMinMultiplier) {
        spdlog::warn("sampler: multiplier {:.4f} for '{}' under '{}' clamped to {}", m, r.id, cat, kMinMultiplier);
        m = kMinMultiplier;
        ++clamped;
      }
      w[r.id] *= m;
    }
  }
  if (stats) stats->clamped = clamped;
  return w;
}

std::map<std::string, std::uint64_t> draws_from_weights(const WeightTable& table, std::uint64_t seed) {
  Rng rng(sub_seed(seed, "sampler"));
  std::map<std::string, std::uint64_t> out;
  for (const auto& [id, weight] : table) {
    if (!(weight > 0.0)) throw ParameterError("weights must be > 0");
    const double base = std::floor(weight);
    const double frac = weight - base;
    auto n = static_cast<std::uint64_t>(base);
    // no draw consumed for integral weights
    if (frac > 0.0 && rng.bernoulli(frac)) ++n;
    out[id] = n;
  }
  return out;
}

std::map<std::string, double> group_mass(const std::vector<SampleRecord>& records, const WeightTable& table,
                                         const std::string& category) {
  std::map<std::string, double> mass;
  for (const auto& r : records) mass[r.attributes.at(category)] += table.at(r.id);
  return mass;
}

}  // namespace moero::sampler
