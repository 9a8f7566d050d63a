#pragma once

#include <cstddef>
#include <vector>

#include "leafpipe/edge.hpp"
#include "leafpipe/filter.hpp"
#include "leafpipe/image.hpp"

namespace leafpipe {

enum class ChannelMode { rgb, gray };

/// Per-image preparation ahead of the network:
/// resize -> Gaussian blur -> grayscale (when requested or required) ->
/// optional Otsu binarization or Canny edge map.
struct PreprocessConfig {
  std::size_t image_size = 256;
  ChannelMode channels = ChannelMode::rgb;
  double blur_sigma = 1.0;     ///< 0 disables the blur
  std::size_t blur_size = 0;   ///< 0 = default_kernel_size(blur_sigma)
  Border border = Border::reflect;
  NormalizeMode normalization = NormalizeMode::zero_mean_unit_var;
  bool otsu_stage = false;
  bool canny_stage = false;
  CannyParams canny{};

  /// Throws std::invalid_argument on conflicting or out-of-range settings.
  void validate() const;
  /// Channel count of the tensors this configuration produces.
  std::size_t output_channels() const;
};

/// Storage-form output of the preparation chain (values in [0, 1]).
ImageBuffer prepare_image(const ImageBuffer& raw, const PreprocessConfig& cfg);

/// Normalized image as planar [C, H, W] values.
std::vector<double> to_chw(const NormalizedImage& img);

}  // namespace leafpipe
