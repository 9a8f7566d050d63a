#include "leafpipe/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>

#include "leafpipe/error.hpp"

namespace leafpipe {

namespace {

void check_shape(std::size_t w, std::size_t h, std::size_t c) {
  if (w == 0 || h == 0) throw std::invalid_argument("image dimensions must be >= 1");
  if (c != 1 && c != 3) throw std::invalid_argument("image channels must be 1 or 3");
}

// Netpbm header tokenizer; '#' comments run to end of line.
class HeaderReader {
public:
  HeaderReader(const std::vector<unsigned char>& bytes, const std::string& name)
      : bytes_(bytes), name_(name) {}

  std::size_t next_uint() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_]))
      throw DataError("malformed header in " + name_);
    std::size_t value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_++] - '0');
      if (value > (1u << 30)) throw DataError("malformed header in " + name_);
    }
    return value;
  }

  // The raster starts after exactly one whitespace byte following maxval.
  void consume_single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
      throw DataError("malformed header in " + name_);
    ++pos_;
  }

  std::size_t pos() const { return pos_; }
  void set_pos(std::size_t p) { pos_ = p; }

private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<unsigned char>& bytes_;
  const std::string& name_;
  std::size_t pos_ = 0;
};

}  // namespace

ImageBuffer::ImageBuffer(std::size_t width, std::size_t height, std::size_t channels, double fill)
    : width_(width), height_(height), channels_(channels) {
  check_shape(width, height, channels);
  pixels_.assign(width * height * channels, fill);
}

ImageBuffer::ImageBuffer(std::size_t width, std::size_t height, std::size_t channels,
                         std::vector<double> pixels)
    : width_(width), height_(height), channels_(channels), pixels_(std::move(pixels)) {
  check_shape(width, height, channels);
  if (pixels_.size() != width * height * channels)
    throw std::invalid_argument("pixel count does not match width * height * channels");
}

void ImageBuffer::clamp_unit() {
  for (double& p : pixels_) p = std::isnan(p) ? 0.0 : std::clamp(p, 0.0, 1.0);
}

ImageBuffer load_image(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec))
    throw DataError("file not found: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  const std::string name = path.string();
  if (bytes.size() < 2 || bytes[0] != 'P')
    throw DataError("unsupported image format (expected PGM/PPM): " + name);

  std::size_t channels = 0;
  bool binary = true;
  switch (bytes[1]) {
    case '5': channels = 1; break;
    case '6': channels = 3; break;
    case '2': channels = 1; binary = false; break;
    case '3': channels = 3; binary = false; break;
    default:
      throw DataError("unsupported channel count / netpbm variant in " + name);
  }

  HeaderReader header(bytes, name);
  header.set_pos(2);
  const std::size_t width = header.next_uint();
  const std::size_t height = header.next_uint();
  const std::size_t maxval = header.next_uint();
  if (width == 0 || height == 0) throw DataError("malformed header in " + name);
  if (maxval == 0 || maxval > 255)
    throw DataError("unsupported maxval " + std::to_string(maxval) + " in " + name);

  const std::size_t count = width * height * channels;
  std::vector<double> pixels(count);
  const double scale = 1.0 / static_cast<double>(maxval);
  if (binary) {
    header.consume_single_space();
    const std::size_t start = header.pos();
    if (bytes.size() - start < count) throw DataError("truncated raster in " + name);
    for (std::size_t i = 0; i < count; ++i) {
      const unsigned v = bytes[start + i];
      if (v > maxval) throw DataError("sample exceeds maxval in " + name);
      pixels[i] = v * scale;
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t v = header.next_uint();
      if (v > maxval) throw DataError("sample exceeds maxval in " + name);
      pixels[i] = static_cast<double>(v) * scale;
    }
  }
  return ImageBuffer(width, height, channels, std::move(pixels));
}

void save_image(const ImageBuffer& img, const std::filesystem::path& path) {
  if (img.empty()) throw std::invalid_argument("cannot save an empty image");
  if (img.channels() != 1 && img.channels() != 3)
    throw DataError("unsupported channel count for netpbm output");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << (img.channels() == 1 ? "P5" : "P6") << '\n'
      << img.width() << ' ' << img.height() << '\n'
      << "255\n";
  std::vector<char> raster(img.size());
  const auto px = img.pixels();
  for (std::size_t i = 0; i < raster.size(); ++i) {
    const double v = std::isnan(px[i]) ? 0.0 : std::clamp(px[i], 0.0, 1.0);
    raster[i] = static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0)));
  }
  out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

ImageBuffer resize(const ImageBuffer& img, std::size_t out_w, std::size_t out_h) {
  if (out_w == 0 || out_h == 0) throw std::invalid_argument("resize target must be >= 1");
  if (img.width() == out_w && img.height() == out_h) return img;

  const std::size_t ch = img.channels();
  ImageBuffer out(out_w, out_h, ch);
  const double sx = static_cast<double>(img.width()) / static_cast<double>(out_w);
  const double sy = static_cast<double>(img.height()) / static_cast<double>(out_h);
  const double max_x = static_cast<double>(img.width() - 1);
  const double max_y = static_cast<double>(img.height() - 1);

  for (std::size_t y = 0; y < out_h; ++y) {
    const double fy = std::clamp((static_cast<double>(y) + 0.5) * sy - 0.5, 0.0, max_y);
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, img.height() - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t x = 0; x < out_w; ++x) {
      const double fx = std::clamp((static_cast<double>(x) + 0.5) * sx - 0.5, 0.0, max_x);
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, img.width() - 1);
      const double wx = fx - static_cast<double>(x0);
      for (std::size_t c = 0; c < ch; ++c) {
        const double top = img.at(x0, y0, c) * (1.0 - wx) + img.at(x1, y0, c) * wx;
        const double bot = img.at(x0, y1, c) * (1.0 - wx) + img.at(x1, y1, c) * wx;
        out.at(x, y, c) = std::clamp(top * (1.0 - wy) + bot * wy, 0.0, 1.0);
      }
    }
  }
  return out;
}

ImageBuffer to_grayscale(const ImageBuffer& img) {
  if (img.channels() == 1) return img;
  ImageBuffer out(img.width(), img.height(), 1);
  const auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const double g = 0.299 * src[3 * i] + 0.587 * src[3 * i + 1] + 0.114 * src[3 * i + 2];
    dst[i] = std::clamp(g, 0.0, 1.0);
  }
  return out;
}

NormalizedImage normalize(const ImageBuffer& img, NormalizeMode mode) {
  NormalizedImage out{img.width(), img.height(), img.channels(), img.data(), 0.0, 1.0};
  if (mode == NormalizeMode::unit_range || img.empty()) return out;

  const auto px = img.pixels();
  if (std::all_of(px.begin(), px.end(), [&](double v) { return v == px[0]; })) {
    std::fill(out.values.begin(), out.values.end(), 0.0);
    out.mean = px[0];
    out.stddev = kNormalizeStdFloor;
    return out;
  }

  const auto n = static_cast<double>(img.size());
  double sum = 0.0;
  for (double v : img.pixels()) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : img.pixels()) ss += (v - mean) * (v - mean);
  const double sd = std::max(std::sqrt(ss / n), kNormalizeStdFloor);
  for (double& v : out.values) v = (v - mean) / sd;
  out.mean = mean;
  out.stddev = sd;
  return out;
}

}  // namespace leafpipe
