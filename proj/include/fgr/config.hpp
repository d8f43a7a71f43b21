#pragma once

#include "fgr/harness.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace fgr {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Everything one experiment needs. Parsed strictly: unknown keys are rejected,
/// `seed` and stream.{episodes, train_per_episode, test_per_episode} are required.
struct ExperimentConfig {
  StreamConfig stream;
  Strategy strategy;
  GeneratorConfig generator;  // vocab_size and slide_dim follow the stream
  FootprintConfig footprint;
  int epochs = 10;
  double lr = 0.05;
  Seeds seeds;
  std::string output_dir = "out";
  std::optional<std::string> data_dir;

  HarnessConfig harness() const;
  void validate() const;
};

/// Defaults for every optional key, with the given seed.
ExperimentConfig default_config(std::uint64_t seed);

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON for the effective configuration (all keys, fixed order).
std::string config_json(const ExperimentConfig& config);

}  // namespace fgr
