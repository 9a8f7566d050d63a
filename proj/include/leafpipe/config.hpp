#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "leafpipe/augment.hpp"
#include "leafpipe/nn/trainer.hpp"
#include "leafpipe/preprocess.hpp"

namespace leafpipe {

/// Everything a pipeline run needs, read from a `key = value` text file.
/// Blank lines and `#` comments are ignored; unknown keys are rejected.
struct PipelineConfig {
  std::filesystem::path data_root;
  std::uint64_t seed = 42;  ///< split, initialization, batching and augmentation
  std::size_t threads = 1;

  PreprocessConfig preprocess;
  bool augment_enabled = true;
  AugmentConfig augment;

  double split_ratio = 0.8;
  bool stratified = true;
  bool strict_files = false;

  nn::TrainConfig train;
  /// Layer list in Architecture::parse_layers syntax; empty means the default stack.
  std::string architecture;

  /// Re-synchronizes the per-module seeds/threads with the top-level values.
  void propagate();
  /// Throws std::invalid_argument on any out-of-range or conflicting value.
  void validate() const;
};

/// Throws std::invalid_argument naming the line for unknown keys or bad values.
PipelineConfig parse_config(std::string_view text, PipelineConfig base = {});
/// Throws DataError when the file cannot be read.
PipelineConfig load_config(const std::filesystem::path& path);
/// Canonical `key = value` dump; parse_config(format_config(c)) reproduces c.
std::string format_config(const PipelineConfig& cfg);

/// Environment variable naming the default config file for the CLI.
inline constexpr const char* kConfigEnvVar = "LEAFPIPE_CONFIG";

}  // namespace leafpipe
