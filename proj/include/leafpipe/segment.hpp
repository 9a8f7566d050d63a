#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "leafpipe/image.hpp"

namespace leafpipe {

struct Histogram256 {
  std::array<std::uint64_t, 256> counts{};
  std::uint64_t total = 0;

  /// Builds a histogram from raw counts; total is recomputed.
  static Histogram256 from_counts(const std::array<std::uint64_t, 256>& counts);
  std::size_t nonempty_bins() const;
};

/// Minimizer of the within-class variance
///   sigma_w^2(t) = omega1(t) var1(t) + omega2(t) var2(t)
/// over t in [0, 254], bins <= t forming the background class.
struct OtsuResult {
  int t = 0;
  double omega1 = 0.0;
  double omega2 = 0.0;
  double var1 = 0.0;
  double var2 = 0.0;
  double within_class_variance = 0.0;
};

/// Pixel p lands in bin floor(p * 255 + 0.5). Gray input only.
Histogram256 histogram(const ImageBuffer& gray);

/// Exhaustive scan; ties resolve to the lowest t. Throws DataError on a
/// histogram with fewer than two non-empty bins ("degenerate histogram").
OtsuResult otsu_threshold(const Histogram256& h);

/// Within-class variance terms at a fixed split t (empty class contributes 0).
OtsuResult otsu_terms(const Histogram256& h, int t);

/// 1.0 where pixel > t / 255, else 0.0.
ImageBuffer binarize(const ImageBuffer& gray, int t);

/// Multi-line "key: value" report of an OtsuResult.
std::string format_otsu_report(const OtsuResult& r);

}  // namespace leafpipe
