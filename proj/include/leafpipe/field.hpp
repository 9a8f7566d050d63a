#pragma once

#include <cstddef>
#include <vector>

#include "leafpipe/image.hpp"

namespace leafpipe {

/// Single-channel real field with image geometry; values are unbounded.
struct Field {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;

  Field() = default;
  Field(std::size_t w, std::size_t h, double fill = 0.0) : width(w), height(h), values(w * h, fill) {}

  double& at(std::size_t x, std::size_t y) { return values[y * width + x]; }
  double at(std::size_t x, std::size_t y) const { return values[y * width + x]; }

  /// Gray image -> field. Throws std::invalid_argument for multi-channel input.
  static Field from_gray(const ImageBuffer& img);
  /// Field -> gray image, values clamped into [0, 1].
  ImageBuffer to_image() const;

  friend bool operator==(const Field&, const Field&) = default;
};

}  // namespace leafpipe
