#include "leafpipe/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "leafpipe/simd/kernels.hpp"

namespace leafpipe {

namespace {

void check_gaussian_args(std::size_t size, double sigma) {
  if (size == 0 || size % 2 == 0)
    throw std::invalid_argument("gaussian kernel size must be odd and >= 1, got " +
                                std::to_string(size));
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument("gaussian sigma must be positive");
}

void check_extent(std::size_t kernel, std::size_t image, const char* axis) {
  if (kernel % 2 == 0) throw std::invalid_argument("kernel extents must be odd");
  if (kernel >= 2 * image)
    throw std::invalid_argument(std::string("kernel too large for image along ") + axis);
}

// Image padded by (rx, ry) on each side according to the border rule.
std::vector<double> pad(const Field& img, std::size_t rx, std::size_t ry, Border border) {
  const std::size_t pw = img.width + 2 * rx;
  const std::size_t ph = img.height + 2 * ry;
  std::vector<double> out(pw * ph, 0.0);
  const auto w = static_cast<long>(img.width);
  const auto h = static_cast<long>(img.height);
  for (std::size_t py = 0; py < ph; ++py) {
    const long sy = border_index(static_cast<long>(py) - static_cast<long>(ry), h, border);
    if (sy < 0) continue;
    for (std::size_t px = 0; px < pw; ++px) {
      const long sx = border_index(static_cast<long>(px) - static_cast<long>(rx), w, border);
      if (sx < 0) continue;
      out[py * pw + px] = img.values[static_cast<std::size_t>(sy) * img.width + static_cast<std::size_t>(sx)];
    }
  }
  return out;
}

}  // namespace

Field Field::from_gray(const ImageBuffer& img) {
  if (img.channels() != 1) throw std::invalid_argument("expected a single-channel image");
  Field f;
  f.width = img.width();
  f.height = img.height();
  f.values = img.data();
  return f;
}

ImageBuffer Field::to_image() const {
  std::vector<double> px(values);
  for (double& v : px) v = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
  return ImageBuffer(width, height, 1, std::move(px));
}

Kernel2D::Kernel2D(std::size_t r, std::size_t c, std::vector<double> w)
    : rows(r), cols(c), weights(std::move(w)) {
  if (rows == 0 || cols == 0 || rows % 2 == 0 || cols % 2 == 0)
    throw std::invalid_argument("kernel rows and cols must be odd");
  if (weights.size() != rows * cols) throw std::invalid_argument("kernel weight count mismatch");
  for (double v : weights)
    if (!std::isfinite(v)) throw std::invalid_argument("kernel weights must be finite");
}

Kernel2D::Kernel2D(const GaussianKernel& g) : Kernel2D(g.size, g.size, g.weights) {}

double gaussian_2d(double a, double b, double sigma) {
  const double s2 = sigma * sigma;
  return std::exp(-(a * a + b * b) / (2.0 * s2)) / (2.0 * std::numbers::pi * s2);
}

std::size_t default_kernel_size(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian sigma must be positive");
  return 2 * static_cast<std::size_t>(std::ceil(3.0 * sigma)) + 1;
}

GaussianKernel gaussian_kernel(std::size_t size, double sigma) {
  check_gaussian_args(size, sigma);
  GaussianKernel k{size, sigma, std::vector<double>(size * size)};
  const int r = k.radius();
  for (int b = -r; b <= r; ++b)
    for (int a = -r; a <= r; ++a)
      k.weights[static_cast<std::size_t>(b + r) * size + static_cast<std::size_t>(a + r)] =
          gaussian_2d(a, b, sigma);
  const double total = std::accumulate(k.weights.begin(), k.weights.end(), 0.0);
  for (double& w : k.weights) w /= total;
  return k;
}

std::vector<double> gaussian_kernel_1d(std::size_t size, double sigma) {
  check_gaussian_args(size, sigma);
  const int r = static_cast<int>(size / 2);
  std::vector<double> taps(size);
  for (int a = -r; a <= r; ++a)
    taps[static_cast<std::size_t>(a + r)] = std::exp(-(a * a) / (2.0 * sigma * sigma));
  const double total = std::accumulate(taps.begin(), taps.end(), 0.0);
  for (double& t : taps) t /= total;
  return taps;
}

long border_index(long i, long n, Border border) {
  if (i >= 0 && i < n) return i;
  switch (border) {
    case Border::zero:
      return -1;
    case Border::clamp:
      return std::clamp(i, 0L, n - 1);
    case Border::reflect: {
      // Edge-inclusive mirror: -1 -> 0, n -> n-1.
      const long period = 2 * n;
      long m = i % period;
      if (m < 0) m += period;
      return m < n ? m : period - 1 - m;
    }
  }
  return -1;
}

Field convolve2d(const Field& img, const Kernel2D& k, Border border) {
  check_extent(k.cols, img.width, "x");
  check_extent(k.rows, img.height, "y");
  const std::size_t rx = k.cols / 2;
  const std::size_t ry = k.rows / 2;
  const std::size_t pw = img.width + 2 * rx;
  const std::vector<double> padded = pad(img, rx, ry, border);

  Field out(img.width, img.height);
  for (std::size_t y = 0; y < img.height; ++y) {
    double* row = out.values.data() + y * img.width;
    for (std::size_t i = 0; i < k.rows; ++i) {
      const double* src = padded.data() + (y + i) * pw;
      for (std::size_t j = 0; j < k.cols; ++j) {
        const double w = k.at(i, j);
        if (w != 0.0) simd::axpy(w, src + j, row, img.width);
      }
    }
  }
  return out;
}

Field convolve2d(const ImageBuffer& gray, const Kernel2D& k, Border border) {
  return convolve2d(Field::from_gray(gray), k, border);
}

Field separable_correlate(const Field& img, const std::vector<double>& kx,
                          const std::vector<double>& ky, Border border) {
  check_extent(kx.size(), img.width, "x");
  check_extent(ky.size(), img.height, "y");
  const std::size_t rx = kx.size() / 2;
  const std::size_t ry = ky.size() / 2;

  // Horizontal pass on rows padded in x only.
  const std::size_t pw = img.width + 2 * rx;
  const std::vector<double> padded_x = pad(img, rx, 0, border);
  Field horiz(img.width, img.height);
  for (std::size_t y = 0; y < img.height; ++y) {
    double* row = horiz.values.data() + y * img.width;
    const double* src = padded_x.data() + y * pw;
    for (std::size_t j = 0; j < kx.size(); ++j) simd::axpy(kx[j], src + j, row, img.width);
  }

  // Vertical pass: whole rows are the vector lanes.
  const std::vector<double> padded_y = pad(horiz, 0, ry, border);
  Field out(img.width, img.height);
  for (std::size_t y = 0; y < img.height; ++y) {
    double* row = out.values.data() + y * img.width;
    for (std::size_t i = 0; i < ky.size(); ++i)
      simd::axpy(ky[i], padded_y.data() + (y + i) * img.width, row, img.width);
  }
  return out;
}

ImageBuffer gaussian_blur(const ImageBuffer& img, std::size_t size, double sigma, Border border) {
  const std::vector<double> taps = gaussian_kernel_1d(size, sigma);
  ImageBuffer out(img.width(), img.height(), img.channels());
  const std::size_t ch = img.channels();
  Field plane(img.width(), img.height());
  for (std::size_t c = 0; c < ch; ++c) {
    for (std::size_t i = 0; i < plane.values.size(); ++i) plane.values[i] = img.data()[i * ch + c];
    const Field blurred = separable_correlate(plane, taps, taps, border);
    for (std::size_t i = 0; i < plane.values.size(); ++i)
      out.data()[i * ch + c] = std::clamp(blurred.values[i], 0.0, 1.0);
  }
  return out;
}

}  // namespace leafpipe
