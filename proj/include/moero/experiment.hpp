#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "moero/augment.hpp"
#include "moero/mask.hpp"

namespace moero::experiment {

struct CodebookTraining {
  std::size_t k = 16;
  double decay = 0.99;
  int iterations = 10;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  int height = 64;
  int width = 64;
  int coils = 8;
  std::vector<std::string> samples;
  int epochs = 1;
  std::vector<MaskFamily> families{MaskFamily::Uniform};
  std::vector<int> accelerations{4};
  int acs = kDefaultAcsLines;
  std::optional<augment::AugPolicy> policy;
  nlohmann::json grid;  ///< grid description; codebooks trained when it lists none
  CodebookTraining codebook;
  bool independent_routing = false;
  std::filesystem::path base_dir;  ///< resolves relative paths in the grid

  void validate() const;
};

/// Parse a config file. "policy" and "grid" may be inline objects or paths
/// relative to the config file.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

struct SampleFailure {
  std::string sample_id;
  std::string message;
};

struct ExperimentResult {
  std::string csv;      ///< final-epoch rows: sample_id,family,accel,branch_path,nmse,psnr,ssim
  nlohmann::json report;  ///< config echo, every epoch's rows and traces, router utilization
  std::vector<SampleFailure> failures;
};

inline constexpr const char* kCsvHeader = "sample_id,family,accel,branch_path,nmse,psnr,ssim";

/// Deterministic end-to-end run: every stochastic choice is drawn from
/// sub_seed(config.seed, component, sample/epoch id).
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Locale-independent shortest round-trip formatting ("inf"/"nan" for non-finite).
std::string format_number(double v);

}  // namespace moero::experiment
