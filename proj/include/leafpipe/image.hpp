#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace leafpipe {

/// W x H x C raster, row-major, channels interleaved. Storage values live in [0, 1];
/// 8-bit quantization happens only at file boundaries.
class ImageBuffer {
public:
  ImageBuffer() = default;
  /// Zero-filled image. Throws std::invalid_argument on a zero dimension or channels not 1/3.
  ImageBuffer(std::size_t width, std::size_t height, std::size_t channels, double fill = 0.0);
  ImageBuffer(std::size_t width, std::size_t height, std::size_t channels,
              std::vector<double> pixels);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t channels() const { return channels_; }
  std::size_t size() const { return pixels_.size(); }
  bool empty() const { return pixels_.empty(); }

  double& at(std::size_t x, std::size_t y, std::size_t c = 0) {
    return pixels_[(y * width_ + x) * channels_ + c];
  }
  double at(std::size_t x, std::size_t y, std::size_t c = 0) const {
    return pixels_[(y * width_ + x) * channels_ + c];
  }

  std::span<double> pixels() { return pixels_; }
  std::span<const double> pixels() const { return pixels_; }
  std::vector<double>& data() { return pixels_; }
  const std::vector<double>& data() const { return pixels_; }

  bool same_shape(const ImageBuffer& o) const {
    return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
  }

  /// Clamp every value into [0, 1] (NaN becomes 0).
  void clamp_unit();

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> pixels_;
};

/// Normalized pixel field; values unbounded. x * stddev + mean recovers storage form.
struct NormalizedImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 0;
  std::vector<double> values;
  double mean = 0.0;
  double stddev = 1.0;
};

enum class NormalizeMode { unit_range, zero_mean_unit_var };

inline constexpr double kNormalizeStdFloor = 1e-8;

/// Reads binary PGM (P5) or PPM (P6); ASCII P2/P3 are accepted as well.
/// Throws DataError on missing file, malformed header or unsupported maxval.
ImageBuffer load_image(const std::filesystem::path& path);

/// Writes P5 for gray and P6 for RGB, header "P5\n<w> <h>\n255\n".
void save_image(const ImageBuffer& img, const std::filesystem::path& path);

/// Bilinear resample with pixel-centre alignment; same-size resize is the identity.
ImageBuffer resize(const ImageBuffer& img, std::size_t out_w, std::size_t out_h);

/// BT.601 luma: 0.299 R + 0.587 G + 0.114 B. Gray input passes through.
ImageBuffer to_grayscale(const ImageBuffer& img);

NormalizedImage normalize(const ImageBuffer& img, NormalizeMode mode);

}  // namespace leafpipe
