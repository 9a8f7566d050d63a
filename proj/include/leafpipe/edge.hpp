#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "leafpipe/field.hpp"
#include "leafpipe/filter.hpp"
#include "leafpipe/image.hpp"

namespace leafpipe {

/// x runs along columns (rightwards), y along rows (downwards).
struct GradientField {
  Field gx;
  Field gy;
  Field magnitude;
  Field direction;  ///< atan2(gy, gx) in (-pi, pi]
};

/// Binary edge mask; 1 = on.
struct EdgeMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> bits;

  std::uint8_t at(std::size_t x, std::size_t y) const { return bits[y * width + x]; }
  std::size_t count_on() const;
  /// P5-ready image with on = 1.0, off = 0.0.
  ImageBuffer to_image() const;
};

struct CannyParams {
  double sigma = 1.4;
  double low = 0.1;   ///< fraction of the peak suppressed magnitude
  double high = 0.2;  ///< fraction of the peak suppressed magnitude
  Border border = Border::reflect;
};

/// Derivative-of-Gaussian taps d[a] = (a / sigma^2) g[a] for the normalized Gaussian g.
/// Correlating with d computes the derivative of the Gaussian-smoothed signal.
std::vector<double> gaussian_derivative_1d(std::size_t size, double sigma);

/// Gradients by correlation with the x/y derivatives of the 2-D Gaussian
/// (kernel size default_kernel_size(sigma)), applied separably.
GradientField gradient(const ImageBuffer& gray, double sigma, Border border = Border::reflect);

/// Keeps pixels whose magnitude is >= both neighbours along the gradient direction,
/// quantized to 0/45/90/135 degrees. The one-pixel border is zeroed.
Field nonmax_suppress(const GradientField& g);

/// Strong seeds are >= high; pixels >= low join when 8-connected to a seed.
/// Throws std::invalid_argument unless 0 <= low <= high.
EdgeMap hysteresis(const Field& nms, double low, double high);

/// gradient -> nonmax_suppress -> hysteresis; thresholds relative to the peak
/// suppressed magnitude. Multi-channel input is converted to gray first.
EdgeMap canny(const ImageBuffer& img, const CannyParams& params = {});

}  // namespace leafpipe
