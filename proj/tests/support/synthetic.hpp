#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "leafpipe/image.hpp"

namespace leafpipe::synth {

/// Generated stand-in for a class-per-folder leaf dataset: an elliptical leaf on a
/// pale background, each class with its own colour and surface pattern, plus
/// per-image jitter (pose, tint, pattern phase) and Gaussian pixel noise.
struct SyntheticSpec {
  std::size_t classes = 4;
  std::size_t per_class = 100;
  std::size_t size = 64;
  std::uint64_t seed = 7;
  double noise_std = 0.05;
};

std::vector<std::string> class_names(std::size_t classes);

/// Deterministic in (cls, index, spec.seed).
ImageBuffer leaf_image(std::size_t cls, std::size_t index, const SyntheticSpec& spec);

/// Writes `<root>/<class>/img_NNN.ppm`. Existing files are overwritten.
void write_dataset(const std::filesystem::path& root, const SyntheticSpec& spec);

}  // namespace leafpipe::synth
