#include "leafpipe/edge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "leafpipe/simd/kernels.hpp"

namespace leafpipe {

std::size_t EdgeMap::count_on() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

ImageBuffer EdgeMap::to_image() const {
  ImageBuffer img(width, height, 1);
  for (std::size_t i = 0; i < bits.size(); ++i) img.data()[i] = bits[i] ? 1.0 : 0.0;
  return img;
}

std::vector<double> gaussian_derivative_1d(std::size_t size, double sigma) {
  std::vector<double> taps = gaussian_kernel_1d(size, sigma);
  const int r = static_cast<int>(size / 2);
  for (int a = -r; a <= r; ++a) taps[static_cast<std::size_t>(a + r)] *= a / (sigma * sigma);
  return taps;
}

namespace {

// Correlation with an odd kernel d (d[-a] == -d[a]) along one axis, evaluated as
// sum_a d[a] * (f(x + a) - f(x - a)) so that flat regions give exactly zero.
Field odd_pass(const Field& f, const std::vector<double>& d, bool along_x, Border border) {
  const long r = static_cast<long>(d.size() / 2);
  const long w = static_cast<long>(f.width);
  const long h = static_cast<long>(f.height);
  if (static_cast<long>(d.size()) >= 2 * (along_x ? w : h))
    throw std::invalid_argument("derivative kernel too large for image");
  auto sample = [&](long x, long y) {
    const long sx = border_index(x, w, border);
    const long sy = border_index(y, h, border);
    return sx < 0 || sy < 0 ? 0.0 : f.values[static_cast<std::size_t>(sy * w + sx)];
  };
  Field out(f.width, f.height);
  std::vector<double> diff(f.width);
  for (long y = 0; y < h; ++y) {
    double* row = out.values.data() + y * w;
    for (long a = 1; a <= r; ++a) {
      for (long x = 0; x < w; ++x)
        diff[static_cast<std::size_t>(x)] =
            along_x ? sample(x + a, y) - sample(x - a, y) : sample(x, y + a) - sample(x, y - a);
      simd::axpy(d[static_cast<std::size_t>(r + a)], diff.data(), row, f.width);
    }
  }
  return out;
}

}  // namespace

GradientField gradient(const ImageBuffer& gray, double sigma, Border border) {
  const std::size_t size = default_kernel_size(sigma);
  const std::vector<double> smooth = gaussian_kernel_1d(size, sigma);
  const std::vector<double> deriv = gaussian_derivative_1d(size, sigma);
  const Field src = Field::from_gray(gray);
  const std::vector<double> unit{1.0};

  GradientField g;
  g.gx = odd_pass(separable_correlate(src, unit, smooth, border), deriv, true, border);
  g.gy = odd_pass(separable_correlate(src, smooth, unit, border), deriv, false, border);
  g.magnitude = Field(src.width, src.height);
  g.direction = Field(src.width, src.height);
  for (std::size_t i = 0; i < src.values.size(); ++i) {
    const double x = g.gx.values[i];
    const double y = g.gy.values[i];
    g.magnitude.values[i] = std::sqrt(x * x + y * y);
    double d = std::atan2(y, x);
    if (d <= -std::numbers::pi) d = std::numbers::pi;
    g.direction.values[i] = d;
  }
  return g;
}

Field nonmax_suppress(const GradientField& g) {
  const std::size_t w = g.magnitude.width;
  const std::size_t h = g.magnitude.height;
  Field out(w, h);
  if (w < 3 || h < 3) return out;

  for (std::size_t y = 1; y + 1 < h; ++y) {
    for (std::size_t x = 1; x + 1 < w; ++x) {
      const double m = g.magnitude.at(x, y);
      if (m == 0.0) continue;
      // Fold the direction into [0, 180) and snap to the nearest of four sectors.
      double deg = g.direction.at(x, y) * 180.0 / std::numbers::pi;
      if (deg < 0.0) deg += 180.0;
      int dx = 0, dy = 0;
      if (deg < 22.5 || deg >= 157.5) {
        dx = 1;
      } else if (deg < 67.5) {
        dx = 1;
        dy = 1;
      } else if (deg < 112.5) {
        dy = 1;
      } else {
        dx = -1;
        dy = 1;
      }
      const double a = g.magnitude.at(x + dx, y + dy);
      const double b = g.magnitude.at(x - dx, y - dy);
      if (m >= a && m >= b) out.at(x, y) = m;
    }
  }
  return out;
}

EdgeMap hysteresis(const Field& nms, double low, double high) {
  if (!(low >= 0.0) || !(low <= high))
    throw std::invalid_argument("hysteresis thresholds require 0 <= low <= high");
  const std::size_t w = nms.width;
  const std::size_t h = nms.height;
  EdgeMap edges{w, h, std::vector<std::uint8_t>(w * h, 0)};

  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < nms.values.size(); ++i) {
    if (nms.values[i] >= high && !edges.bits[i]) {
      edges.bits[i] = 1;
      stack.push_back(i);
    }
  }
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    const long x = static_cast<long>(i % w);
    const long y = static_cast<long>(i / w);
    for (long dy = -1; dy <= 1; ++dy) {
      for (long dx = -1; dx <= 1; ++dx) {
        const long nx = x + dx;
        const long ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= static_cast<long>(w) || ny >= static_cast<long>(h)) continue;
        const std::size_t j = static_cast<std::size_t>(ny) * w + static_cast<std::size_t>(nx);
        if (!edges.bits[j] && nms.values[j] >= low) {
          edges.bits[j] = 1;
          stack.push_back(j);
        }
      }
    }
  }
  return edges;
}

EdgeMap canny(const ImageBuffer& img, const CannyParams& p) {
  if (!(p.low >= 0.0) || !(p.low <= p.high) || p.high > 1.0)
    throw std::invalid_argument("canny thresholds require 0 <= low <= high <= 1");
  const ImageBuffer gray = to_grayscale(img);
  const GradientField g = gradient(gray, p.sigma, p.border);
  const Field nms = nonmax_suppress(g);
  const double peak = *std::max_element(nms.values.begin(), nms.values.end());
  if (peak <= 0.0) return EdgeMap{gray.width(), gray.height(),
                                  std::vector<std::uint8_t>(gray.size(), 0)};
  // Suppressed pixels are exactly zero; a zero low threshold must not revive them.
  const double low = std::max(p.low * peak, std::numeric_limits<double>::denorm_min());
  return hysteresis(nms, low, std::max(p.high * peak, low));
}

}  // namespace leafpipe
