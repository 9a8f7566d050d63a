#include "leafpipe/color_pca.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace leafpipe {

namespace {

double off_diagonal_norm(const Mat3& a) {
  return std::sqrt(2.0 * (a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2]));
}

double frobenius(const Mat3& a) {
  double s = 0.0;
  for (const auto& row : a)
    for (double v : row) s += v * v;
  return std::sqrt(s);
}

}  // namespace

SymmetricEigen3 jacobi_eigen(const Mat3& m, double tol, int max_sweeps) {
  Mat3 a = m;
  Mat3 v{};
  for (int i = 0; i < 3; ++i) v[i][i] = 1.0;

  const double scale = frobenius(a);
  const double threshold = scale > 0.0 ? tol * scale : tol;
  for (int sweep = 0; sweep < max_sweeps && off_diagonal_norm(a) > threshold; ++sweep) {
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (a[p][q] == 0.0) continue;
        // Rotation angle zeroing a[p][q] (stable tangent form).
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < 3; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < 3; ++k) {
          const double vkp = v[k][p];
          const double vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return a[x][x] > a[y][y]; });
  SymmetricEigen3 out;
  for (int i = 0; i < 3; ++i) {
    const int col = order[i];
    out.eigenvalues[i] = a[col][col];
    for (int k = 0; k < 3; ++k) out.eigenvectors[i][k] = v[k][col];
  }
  return out;
}

ColorPCA fit_color_pca(std::size_t count, const std::function<ImageBuffer(std::size_t)>& load) {
  if (count == 0) throw std::invalid_argument("color PCA needs at least one image");
  std::size_t n = 0;
  Vec3 sum{};
  for (std::size_t k = 0; k < count; ++k) {
    const ImageBuffer img = load(k);
    if (img.channels() != 3) throw std::invalid_argument("color PCA needs RGB images");
    const auto px = img.pixels();
    for (std::size_t i = 0; i < px.size(); i += 3)
      for (int c = 0; c < 3; ++c) sum[c] += px[i + c];
    n += px.size() / 3;
  }
  if (n < 2) throw std::invalid_argument("color PCA needs at least two pixels");

  Vec3 mean{};
  for (int c = 0; c < 3; ++c) mean[c] = sum[c] / static_cast<double>(n);
  Mat3 cov{};
  for (std::size_t k = 0; k < count; ++k) {
    const ImageBuffer img = load(k);
    const auto px = img.pixels();
    for (std::size_t i = 0; i < px.size(); i += 3) {
      const Vec3 d{px[i] - mean[0], px[i + 1] - mean[1], px[i + 2] - mean[2]};
      for (int r = 0; r < 3; ++r)
        for (int c = r; c < 3; ++c) cov[r][c] += d[r] * d[c];
    }
  }
  for (int r = 0; r < 3; ++r) {
    for (int c = r; c < 3; ++c) {
      cov[r][c] /= static_cast<double>(n);
      cov[c][r] = cov[r][c];
    }
  }

  const SymmetricEigen3 eig = jacobi_eigen(cov);
  ColorPCA pca{cov, eig.eigenvalues, eig.eigenvectors};
  // Covariance is PSD; tiny negative eigenvalues are rounding.
  for (double& l : pca.eigenvalues) l = std::max(l, 0.0);
  return pca;
}

ColorPCA fit_color_pca(std::span<const ImageBuffer> images) {
  return fit_color_pca(images.size(), [&](std::size_t k) { return images[k]; });
}

}  // namespace leafpipe
