#pragma once

#include <array>
#include <functional>
#include <span>

#include "leafpipe/image.hpp"

namespace leafpipe {

using Mat3 = std::array<std::array<double, 3>, 3>;
using Vec3 = std::array<double, 3>;

/// Eigen-decomposition of a symmetric 3x3 matrix: eigenvalues descending,
/// eigenvectors[i] is the unit vector for eigenvalues[i].
struct SymmetricEigen3 {
  Vec3 eigenvalues{};
  std::array<Vec3, 3> eigenvectors{};
};

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below tol
/// (relative to the matrix norm, absolute for a zero matrix).
SymmetricEigen3 jacobi_eigen(const Mat3& m, double tol = 1e-12, int max_sweeps = 64);

struct ColorPCA {
  Mat3 covariance{};
  Vec3 eigenvalues{};
  std::array<Vec3, 3> eigenvectors{};
};

/// Pooled RGB covariance (population, denominator N) over every pixel of the set.
/// Throws std::invalid_argument on gray input, an empty set, or fewer than 2 pixels.
ColorPCA fit_color_pca(std::span<const ImageBuffer> images);
/// Same statistics over images produced on demand by load(0..count-1); each image
/// is requested twice (mean pass, covariance pass), so large sets never sit in memory.
ColorPCA fit_color_pca(std::size_t count, const std::function<ImageBuffer(std::size_t)>& load);

}  // namespace leafpipe
