#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "leafpipe/color_pca.hpp"
#include "leafpipe/image.hpp"
#include "leafpipe/rng.hpp"

namespace leafpipe {

/// Stochastic augmentation settings. Operators run in the order
/// scale, rotate, flip, gamma, PCA colour, noise; each one is gated by its own
/// probability (1.0 = always on, 0.0 = never).
struct AugmentConfig {
  std::array<double, 2> scale_range{0.8, 1.25};
  double rotation_deg = 30.0;  ///< angles drawn from [-rotation_deg, +rotation_deg]
  double noise_factor = 1.0;   ///< multiplier on kNoiseBaseStd
  bool flip = true;            ///< vertical flips enabled
  std::array<double, 2> gamma_range{0.5, 1.5};
  double pca_alpha_std = 0.1;
  std::uint64_t seed = 0;

  double p_scale = 0.5;
  double p_rotate = 0.5;
  double p_flip = 0.5;
  double p_gamma = 0.5;
  double p_pca = 0.5;
  double p_noise = 0.5;

  /// Apply exactly one gated-in operator per call instead of the joint chain.
  bool one_per_copy = false;

  /// Throws std::invalid_argument on empty/non-finite ranges, negative noise,
  /// non-positive gamma bounds, or probabilities outside [0, 1].
  void validate() const;
  /// Every probability set to zero.
  static AugmentConfig none();
};

inline constexpr double kNoiseBaseStd = 0.05;

/// One applied operator and the parameter drawn for it.
struct AugmentStep {
  std::string op;
  std::string params;
};
using AugmentTrace = std::vector<AugmentStep>;

ImageBuffer scale_image(const ImageBuffer& img, double factor);
ImageBuffer rotate_image(const ImageBuffer& img, double degrees);
ImageBuffer add_gaussian_noise(const ImageBuffer& img, Rng& rng, double stddev);
ImageBuffer flip_vertical(const ImageBuffer& img);
/// out = in^gamma. Throws std::invalid_argument unless gamma > 0.
ImageBuffer gamma_correct(const ImageBuffer& img, double gamma);
/// Adds sum_i alpha_i * lambda_i * v_i to every RGB pixel, then clamps.
ImageBuffer apply_color_shift(const ImageBuffer& img, const ColorPCA& pca, const Vec3& alpha);

/// Zoom about the centre by f ~ U(scale_range); edge-replicated fill.
ImageBuffer random_scale(const ImageBuffer& img, Rng& rng, std::array<double, 2> scale_range);
/// Rotate about the centre by theta ~ U(-range, +range) degrees; edge-replicated fill.
ImageBuffer random_rotate(const ImageBuffer& img, Rng& rng, double rotation_deg);
/// i.i.d. N(0, (factor * kNoiseBaseStd)^2) per sample, clamped to [0, 1].
ImageBuffer inject_noise(const ImageBuffer& img, Rng& rng, double factor);
/// alpha_i ~ N(0, alpha_std^2), drawn once per image. RGB only.
ImageBuffer pca_color_augment(const ImageBuffer& img, const ColorPCA& pca, Rng& rng,
                              double alpha_std);

/// Full gated chain. PCA colour is skipped when pca is null or the image is gray.
ImageBuffer augment(const ImageBuffer& img, const AugmentConfig& cfg, Rng& rng,
                    const ColorPCA* pca = nullptr, AugmentTrace* trace = nullptr);

}  // namespace leafpipe
