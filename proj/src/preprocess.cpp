#include "leafpipe/preprocess.hpp"

#include <cmath>
#include <stdexcept>

#include "leafpipe/segment.hpp"

namespace leafpipe {

void PreprocessConfig::validate() const {
  if (image_size == 0) throw std::invalid_argument("image_size must be >= 1");
  if (!(blur_sigma >= 0.0) || !std::isfinite(blur_sigma))
    throw std::invalid_argument("blur_sigma must be >= 0");
  if (blur_size != 0 && blur_size % 2 == 0) throw std::invalid_argument("blur_size must be odd");
  if (otsu_stage && canny_stage)
    throw std::invalid_argument("otsu_stage and canny_stage are mutually exclusive");
  if (canny_stage) {
    if (!(canny.sigma > 0.0)) throw std::invalid_argument("canny sigma must be > 0");
    if (!(canny.low >= 0.0 && canny.low <= canny.high && canny.high <= 1.0))
      throw std::invalid_argument("canny thresholds require 0 <= low <= high <= 1");
  }
}

std::size_t PreprocessConfig::output_channels() const {
  return (channels == ChannelMode::gray || otsu_stage || canny_stage) ? 1 : 3;
}

ImageBuffer prepare_image(const ImageBuffer& raw, const PreprocessConfig& cfg) {
  ImageBuffer img = resize(raw, cfg.image_size, cfg.image_size);
  if (cfg.blur_sigma > 0.0) {
    const std::size_t size = cfg.blur_size ? cfg.blur_size : default_kernel_size(cfg.blur_sigma);
    // Small images cannot host the full kernel; shrink it to the largest legal odd size.
    const std::size_t limit = 2 * cfg.image_size - 1;
    img = gaussian_blur(img, std::min(size, limit), cfg.blur_sigma, cfg.border);
  }
  if (cfg.output_channels() == 1) img = to_grayscale(img);
  if (cfg.otsu_stage) {
    const Histogram256 h = histogram(img);
    // A flat tile has no split; it binarizes to black.
    if (h.nonempty_bins() < 2) return binarize(img, 255);
    return binarize(img, otsu_threshold(h).t);
  }
  if (cfg.canny_stage) {
    CannyParams p = cfg.canny;
    p.border = cfg.border;
    return canny(img, p).to_image();
  }
  return img;
}

std::vector<double> to_chw(const NormalizedImage& img) {
  const std::size_t plane = img.width * img.height;
  std::vector<double> out(img.values.size());
  for (std::size_t i = 0; i < plane; ++i)
    for (std::size_t c = 0; c < img.channels; ++c) out[c * plane + i] = img.values[i * img.channels + c];
  return out;
}

}  // namespace leafpipe
