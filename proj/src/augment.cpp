#include "leafpipe/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace leafpipe {

namespace {

// Bilinear sample with coordinates clamped to the image (edge replication).
double sample_clamped(const ImageBuffer& img, double fx, double fy, std::size_t c) {
  const double max_x = static_cast<double>(img.width() - 1);
  const double max_y = static_cast<double>(img.height() - 1);
  fx = std::clamp(fx, 0.0, max_x);
  fy = std::clamp(fy, 0.0, max_y);
  const auto x0 = static_cast<std::size_t>(fx);
  const auto y0 = static_cast<std::size_t>(fy);
  const std::size_t x1 = std::min(x0 + 1, img.width() - 1);
  const std::size_t y1 = std::min(y0 + 1, img.height() - 1);
  const double wx = fx - static_cast<double>(x0);
  const double wy = fy - static_cast<double>(y0);
  const double top = img.at(x0, y0, c) * (1.0 - wx) + img.at(x1, y0, c) * wx;
  const double bot = img.at(x0, y1, c) * (1.0 - wx) + img.at(x1, y1, c) * wx;
  return top * (1.0 - wy) + bot * wy;
}

// out(x, y) = in(A * (x - c) + c) for a 2x2 inverse map A.
ImageBuffer warp(const ImageBuffer& img, double a00, double a01, double a10, double a11) {
  ImageBuffer out(img.width(), img.height(), img.channels());
  const double cx = (static_cast<double>(img.width()) - 1.0) / 2.0;
  const double cy = (static_cast<double>(img.height()) - 1.0) / 2.0;
  for (std::size_t y = 0; y < img.height(); ++y) {
    const double dy = static_cast<double>(y) - cy;
    for (std::size_t x = 0; x < img.width(); ++x) {
      const double dx = static_cast<double>(x) - cx;
      const double sx = a00 * dx + a01 * dy + cx;
      const double sy = a10 * dx + a11 * dy + cy;
      for (std::size_t c = 0; c < img.channels(); ++c)
        out.at(x, y, c) = std::clamp(sample_clamped(img, sx, sy, c), 0.0, 1.0);
    }
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void check_range(const std::array<double, 2>& r, const char* what) {
  if (!std::isfinite(r[0]) || !std::isfinite(r[1]) || r[0] > r[1])
    throw std::invalid_argument(std::string(what) + " range must be finite with min <= max");
}

}  // namespace

void AugmentConfig::validate() const {
  check_range(scale_range, "scale");
  if (scale_range[0] <= 0.0) throw std::invalid_argument("scale factors must be positive");
  if (!std::isfinite(rotation_deg) || rotation_deg < 0.0)
    throw std::invalid_argument("rotation range must be finite and >= 0");
  if (!std::isfinite(noise_factor) || noise_factor < 0.0)
    throw std::invalid_argument("noise factor must be >= 0");
  check_range(gamma_range, "gamma");
  if (gamma_range[0] <= 0.0) throw std::invalid_argument("gamma min must be > 0");
  if (!std::isfinite(pca_alpha_std) || pca_alpha_std < 0.0)
    throw std::invalid_argument("pca alpha std must be >= 0");
  for (double p : {p_scale, p_rotate, p_flip, p_gamma, p_pca, p_noise})
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("probabilities must lie in [0, 1]");
}

AugmentConfig AugmentConfig::none() {
  AugmentConfig cfg;
  cfg.p_scale = cfg.p_rotate = cfg.p_flip = cfg.p_gamma = cfg.p_pca = cfg.p_noise = 0.0;
  return cfg;
}

ImageBuffer scale_image(const ImageBuffer& img, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor))
    throw std::invalid_argument("scale factor must be positive");
  if (factor == 1.0) return img;
  const double inv = 1.0 / factor;
  return warp(img, inv, 0.0, 0.0, inv);
}

ImageBuffer rotate_image(const ImageBuffer& img, double degrees) {
  if (degrees == 0.0) return img;
  // Inverse map rotates output coordinates back by -theta.
  const double th = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(th);
  const double s = std::sin(th);
  return warp(img, c, s, -s, c);
}

ImageBuffer add_gaussian_noise(const ImageBuffer& img, Rng& rng, double stddev) {
  if (!(stddev >= 0.0)) throw std::invalid_argument("noise std must be >= 0");
  if (stddev == 0.0) return img;
  ImageBuffer out = img;
  for (double& p : out.data()) p = std::clamp(p + stddev * rng.normal(), 0.0, 1.0);
  return out;
}

ImageBuffer flip_vertical(const ImageBuffer& img) {
  ImageBuffer out = img;
  const std::size_t row = img.width() * img.channels();
  for (std::size_t y = 0; y < img.height(); ++y) {
    const auto src = img.data().begin() + static_cast<std::ptrdiff_t>((img.height() - 1 - y) * row);
    std::copy(src, src + static_cast<std::ptrdiff_t>(row),
              out.data().begin() + static_cast<std::ptrdiff_t>(y * row));
  }
  return out;
}

ImageBuffer gamma_correct(const ImageBuffer& img, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be > 0");
  if (gamma == 1.0) return img;
  ImageBuffer out = img;
  for (double& p : out.data()) p = std::clamp(std::pow(std::clamp(p, 0.0, 1.0), gamma), 0.0, 1.0);
  return out;
}

ImageBuffer apply_color_shift(const ImageBuffer& img, const ColorPCA& pca, const Vec3& alpha) {
  if (img.channels() != 3) throw std::invalid_argument("PCA colour augmentation needs RGB");
  Vec3 shift{};
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < 3; ++c) shift[c] += alpha[i] * pca.eigenvalues[i] * pca.eigenvectors[i][c];
  if (shift == Vec3{}) return img;
  ImageBuffer out = img;
  auto px = out.pixels();
  for (std::size_t i = 0; i < px.size(); i += 3)
    for (int c = 0; c < 3; ++c) px[i + c] = std::clamp(px[i + c] + shift[c], 0.0, 1.0);
  return out;
}

ImageBuffer random_scale(const ImageBuffer& img, Rng& rng, std::array<double, 2> scale_range) {
  check_range(scale_range, "scale");
  return scale_image(img, rng.uniform(scale_range[0], scale_range[1]));
}

ImageBuffer random_rotate(const ImageBuffer& img, Rng& rng, double rotation_deg) {
  return rotate_image(img, rng.uniform(-rotation_deg, rotation_deg));
}

ImageBuffer inject_noise(const ImageBuffer& img, Rng& rng, double factor) {
  if (!(factor >= 0.0)) throw std::invalid_argument("noise factor must be >= 0");
  return add_gaussian_noise(img, rng, factor * kNoiseBaseStd);
}

ImageBuffer pca_color_augment(const ImageBuffer& img, const ColorPCA& pca, Rng& rng,
                              double alpha_std) {
  if (img.channels() != 3) throw std::invalid_argument("PCA colour augmentation needs RGB");
  Vec3 alpha{};
  for (double& a : alpha) a = alpha_std * rng.normal();
  return apply_color_shift(img, pca, alpha);
}

ImageBuffer augment(const ImageBuffer& img, const AugmentConfig& cfg, Rng& rng,
                    const ColorPCA* pca, AugmentTrace* trace) {
  cfg.validate();
  const bool pca_ok = pca != nullptr && img.channels() == 3;
  enum Op { kScale, kRotate, kFlip, kGamma, kPca, kNoise, kCount };
  std::array<double, kCount> prob{cfg.p_scale, cfg.p_rotate, cfg.flip ? cfg.p_flip : 0.0,
                                  cfg.p_gamma, pca_ok ? cfg.p_pca : 0.0, cfg.p_noise};

  // Gates are drawn up front in fixed order so the stream layout does not
  // depend on which parameters get drawn afterwards.
  std::array<bool, kCount> on{};
  if (cfg.one_per_copy) {
    std::vector<int> enabled;
    for (int op = 0; op < kCount; ++op)
      if (prob[op] > 0.0) enabled.push_back(op);
    if (!enabled.empty()) on[enabled[rng.below(enabled.size())]] = true;
  } else {
    for (int op = 0; op < kCount; ++op) on[op] = prob[op] > 0.0 && rng.bernoulli(prob[op]);
  }

  auto note = [&](const char* op, const std::string& params) {
    if (trace) trace->push_back({op, params});
  };

  ImageBuffer out = img;
  if (on[kScale]) {
    const double f = rng.uniform(cfg.scale_range[0], cfg.scale_range[1]);
    out = scale_image(out, f);
    note("scale", "factor=" + fmt(f));
  }
  if (on[kRotate]) {
    const double th = rng.uniform(-cfg.rotation_deg, cfg.rotation_deg);
    out = rotate_image(out, th);
    note("rotate", "degrees=" + fmt(th));
  }
  if (on[kFlip]) {
    out = flip_vertical(out);
    note("flip", "vertical");
  }
  if (on[kGamma]) {
    const double g = rng.uniform(cfg.gamma_range[0], cfg.gamma_range[1]);
    out = gamma_correct(out, g);
    note("gamma", "gamma=" + fmt(g));
  }
  if (on[kPca]) {
    Vec3 alpha{};
    for (double& a : alpha) a = cfg.pca_alpha_std * rng.normal();
    out = apply_color_shift(out, *pca, alpha);
    note("pca", "alpha=" + fmt(alpha[0]) + ";" + fmt(alpha[1]) + ";" + fmt(alpha[2]));
  }
  if (on[kNoise]) {
    out = inject_noise(out, rng, cfg.noise_factor);
    note("noise", "std=" + fmt(cfg.noise_factor * kNoiseBaseStd));
  }
  return out;
}

}  // namespace leafpipe
