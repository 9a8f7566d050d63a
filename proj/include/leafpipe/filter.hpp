#pragma once

#include <cstddef>
#include <vector>

#include "leafpipe/field.hpp"
#include "leafpipe/image.hpp"

namespace leafpipe {

enum class Border { reflect, clamp, zero };

/// Truncated, unit-sum sampling of the 2-D Gaussian
///   G(a, b, sigma) = exp(-(a^2 + b^2) / (2 sigma^2)) / (2 pi sigma^2)
/// on the integer grid a, b in [-(size-1)/2, (size-1)/2]. weights is row-major with
/// row index b (vertical offset) and column index a (horizontal offset).
struct GaussianKernel {
  std::size_t size = 0;
  double sigma = 0.0;
  std::vector<double> weights;

  int radius() const { return static_cast<int>(size / 2); }
  /// Weight at offset (a, b) relative to the centre.
  double at(int a, int b) const {
    return weights[static_cast<std::size_t>(b + radius()) * size + static_cast<std::size_t>(a + radius())];
  }
};

/// Arbitrary odd-sized correlation kernel, row-major (rows = vertical extent).
struct Kernel2D {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> weights;

  Kernel2D() = default;
  /// Throws std::invalid_argument unless rows/cols are odd and weights finite and sized rows*cols.
  Kernel2D(std::size_t rows, std::size_t cols, std::vector<double> weights);
  explicit Kernel2D(const GaussianKernel& g);

  double at(std::size_t r, std::size_t c) const { return weights[r * cols + c]; }
};

/// Pointwise value of the 2-D Gaussian density at integer offset (a, b).
double gaussian_2d(double a, double b, double sigma);

/// 2 * ceil(3 sigma) + 1.
std::size_t default_kernel_size(double sigma);

GaussianKernel gaussian_kernel(std::size_t size, double sigma);

/// Normalized 1-D Gaussian taps; the outer product of this with itself is gaussian_kernel().
std::vector<double> gaussian_kernel_1d(std::size_t size, double sigma);

/// Maps an out-of-range coordinate back into [0, n) under the border rule.
/// Returns -1 for Border::zero when the coordinate falls outside.
long border_index(long i, long n, Border border);

/// 2-D correlation (kernel not flipped), output same size as input.
/// Precondition: each kernel extent < 2 * matching image extent.
Field convolve2d(const Field& img, const Kernel2D& k, Border border = Border::reflect);
Field convolve2d(const ImageBuffer& gray, const Kernel2D& k, Border border = Border::reflect);

/// Row pass with kx then column pass with ky, both odd-length correlations.
Field separable_correlate(const Field& img, const std::vector<double>& kx,
                          const std::vector<double>& ky, Border border = Border::reflect);

/// Separable Gaussian blur applied per channel; result clamped to [0, 1].
ImageBuffer gaussian_blur(const ImageBuffer& img, std::size_t size, double sigma,
                          Border border = Border::reflect);

}  // namespace leafpipe
