#include "oracles.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <deque>
#include <stdexcept>

namespace leafpipe::oracle {

namespace mp = boost::multiprecision;

namespace {

double sample(const Field& img, long x, long y, Border border) {
  const long w = static_cast<long>(img.width);
  const long h = static_cast<long>(img.height);
  auto fold = [border](long i, long n) -> long {
    if (i >= 0 && i < n) return i;
    switch (border) {
      case Border::zero: return -1;
      case Border::clamp: return i < 0 ? 0 : n - 1;
      case Border::reflect: return i < 0 ? -i - 1 : 2 * n - 1 - i;
    }
    return -1;
  };
  const long sx = fold(x, w);
  const long sy = fold(y, h);
  if (sx < 0 || sy < 0) return 0.0;
  return img.values[static_cast<std::size_t>(sy * w + sx)];
}

// Rational value num/den of the within-class variance times N.
struct Rational {
  mp::cpp_int num;
  mp::cpp_int den;
};

bool less(const Rational& a, const Rational& b) { return a.num * b.den < b.num * a.den; }

}  // namespace

Field correlate(const Field& img, const Kernel2D& k, Border border) {
  Field out(img.width, img.height);
  const long rr = static_cast<long>(k.rows / 2);
  const long rc = static_cast<long>(k.cols / 2);
  for (long y = 0; y < static_cast<long>(img.height); ++y)
    for (long x = 0; x < static_cast<long>(img.width); ++x) {
      double acc = 0.0;
      for (long dy = -rr; dy <= rr; ++dy)
        for (long dx = -rc; dx <= rc; ++dx)
          acc += k.at(static_cast<std::size_t>(dy + rr), static_cast<std::size_t>(dx + rc)) *
                 sample(img, x + dx, y + dy, border);
      out.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = acc;
    }
  return out;
}

std::vector<double> gaussian_weights(std::size_t size, double sigma) {
  using Big = mp::cpp_bin_float_50;
  const long r = static_cast<long>(size / 2);
  const Big s(sigma);
  const Big two_pi = 2 * boost::math::constants::pi<Big>();
  std::vector<Big> raw;
  Big total = 0;
  for (long b = -r; b <= r; ++b)
    for (long a = -r; a <= r; ++a) {
      const Big v = mp::exp(-Big(a * a + b * b) / (2 * s * s)) / (two_pi * s * s);
      raw.push_back(v);
      total += v;
    }
  std::vector<double> out;
  for (const auto& v : raw) out.push_back(static_cast<double>(v / total));
  return out;
}

namespace {

Kernel2D derivative_kernel(std::size_t size, double sigma, bool along_x) {
  const long r = static_cast<long>(size / 2);
  double total = 0.0;
  for (long b = -r; b <= r; ++b)
    for (long a = -r; a <= r; ++a) total += std::exp(-(a * a + b * b) / (2.0 * sigma * sigma));
  std::vector<double> w;
  for (long b = -r; b <= r; ++b)
    for (long a = -r; a <= r; ++a) {
      const double g = std::exp(-(a * a + b * b) / (2.0 * sigma * sigma)) / total;
      // Correlating with -dG/du(-u) = (u / sigma^2) G(u) differentiates the smoothed image.
      const double u = along_x ? a : b;
      w.push_back(u / (sigma * sigma) * g);
    }
  return Kernel2D(size, size, w);
}

}  // namespace

Kernel2D gaussian_dx_kernel(std::size_t size, double sigma) { return derivative_kernel(size, sigma, true); }
Kernel2D gaussian_dy_kernel(std::size_t size, double sigma) { return derivative_kernel(size, sigma, false); }

int otsu_argmin(const std::array<std::uint64_t, 256>& counts) {
  int best = -1;
  Rational best_val;
  for (int t = 0; t <= 254; ++t) {
    mp::cpp_int n1 = 0, s1 = 0, q1 = 0, n2 = 0, s2 = 0, q2 = 0;
    for (int i = 0; i < 256; ++i) {
      const mp::cpp_int c = counts[static_cast<std::size_t>(i)];
      if (i <= t) {
        n1 += c;
        s1 += c * i;
        q1 += c * i * i;
      } else {
        n2 += c;
        s2 += c * i;
        q2 += c * i * i;
      }
    }
    // N * sigma_w^2 = (q1 - s1^2/n1) + (q2 - s2^2/n2), empty classes contribute 0.
    Rational v;
    if (n1 == 0) {
      v = {q2 * n2 - s2 * s2, n2};
    } else if (n2 == 0) {
      v = {q1 * n1 - s1 * s1, n1};
    } else {
      v = {(q1 * n1 - s1 * s1) * n2 + (q2 * n2 - s2 * s2) * n1, n1 * n2};
    }
    if (best < 0 || less(v, best_val)) {
      best = t;
      best_val = v;
    }
  }
  return best;
}

int otsu_between_argmax(const std::array<std::uint64_t, 256>& counts) {
  // N^2 sigma_b^2 = n1 n2 (mu1 - mu2)^2 = (s1 n2 - s2 n1)^2 / (n1 n2).
  int best = -1;
  Rational best_val{0, 1};
  for (int t = 0; t <= 254; ++t) {
    mp::cpp_int n1 = 0, s1 = 0, n2 = 0, s2 = 0;
    for (int i = 0; i < 256; ++i) {
      const mp::cpp_int c = counts[static_cast<std::size_t>(i)];
      (i <= t ? n1 : n2) += c;
      (i <= t ? s1 : s2) += c * i;
    }
    Rational v{0, 1};
    if (n1 != 0 && n2 != 0) {
      const mp::cpp_int d = s1 * n2 - s2 * n1;
      v = {d * d, n1 * n2};
    }
    if (best < 0 || less(best_val, v)) {
      best = t;
      best_val = v;
    }
  }
  return best;
}

std::array<std::uint64_t, 256> random_histogram(Rng& rng) {
  for (;;) {
    std::array<std::uint64_t, 256> h{};
    const int bumps = 1 + static_cast<int>(rng.below(4));
    for (int k = 0; k < bumps; ++k) {
      const double mu = rng.uniform(0.0, 255.0);
      const double sd = rng.uniform(1.0, 40.0);
      const std::uint64_t n = 100 + rng.below(20000);
      for (std::uint64_t i = 0; i < n; ++i) {
        const double v = std::round(mu + sd * rng.normal());
        if (v >= 0.0 && v <= 255.0) ++h[static_cast<std::size_t>(v)];
      }
    }
    const std::uint64_t floor_n = rng.below(3000);
    for (std::uint64_t i = 0; i < floor_n; ++i) ++h[rng.below(256)];
    int nonempty = 0;
    for (auto c : h) nonempty += c > 0;
    if (nonempty >= 2) return h;
  }
}

std::vector<std::uint8_t> hysteresis(const Field& f, double low, double high) {
  const long w = static_cast<long>(f.width);
  const long h = static_cast<long>(f.height);
  std::vector<std::uint8_t> on(f.values.size(), 0);
  for (long s = 0; s < w * h; ++s) {
    if (!(f.values[static_cast<std::size_t>(s)] >= high)) continue;
    std::vector<std::uint8_t> seen(f.values.size(), 0);
    std::deque<long> queue{s};
    seen[static_cast<std::size_t>(s)] = 1;
    while (!queue.empty()) {
      const long i = queue.front();
      queue.pop_front();
      on[static_cast<std::size_t>(i)] = 1;
      for (long dy = -1; dy <= 1; ++dy)
        for (long dx = -1; dx <= 1; ++dx) {
          const long x = i % w + dx, y = i / w + dy;
          if (x < 0 || y < 0 || x >= w || y >= h) continue;
          const long j = y * w + x;
          if (!seen[static_cast<std::size_t>(j)] && f.values[static_cast<std::size_t>(j)] >= low) {
            seen[static_cast<std::size_t>(j)] = 1;
            queue.push_back(j);
          }
        }
    }
  }
  return on;
}

template <typename T>
std::vector<double> network_logits(const nn::Network<T>& net, const std::vector<double>& sample) {
  const auto& arch = net.architecture();
  std::size_t c = arch.input[0], h = arch.input[1], w = arch.input[2];
  std::vector<double> x = sample;
  for (std::size_t li = 0; li < net.layer_count(); ++li) {
    const auto& layer = net.layer(li);
    const nn::LayerSpec s = layer.spec();
    const auto params = layer.parameters();
    switch (s.kind) {
      case nn::LayerKind::conv: {
        const auto& wt = params[0]->value;
        const auto& bs = params[1]->value;
        const std::size_t k = s.kernel, st = s.stride, pad = s.pad, oc = s.out;
        const std::size_t oh = (h + 2 * pad - k) / st + 1, ow = (w + 2 * pad - k) / st + 1;
        std::vector<double> y(oc * oh * ow);
        for (std::size_t o = 0; o < oc; ++o)
          for (std::size_t oy = 0; oy < oh; ++oy)
            for (std::size_t ox = 0; ox < ow; ++ox) {
              double acc = static_cast<double>(bs[o]);
              for (std::size_t ci = 0; ci < c; ++ci)
                for (std::size_t ky = 0; ky < k; ++ky)
                  for (std::size_t kx = 0; kx < k; ++kx) {
                    const long iy = static_cast<long>(oy * st + ky) - static_cast<long>(pad);
                    const long ix = static_cast<long>(ox * st + kx) - static_cast<long>(pad);
                    if (iy < 0 || ix < 0 || iy >= static_cast<long>(h) || ix >= static_cast<long>(w)) continue;
                    acc += static_cast<double>(wt[((o * c + ci) * k + ky) * k + kx]) *
                           x[(ci * h + static_cast<std::size_t>(iy)) * w + static_cast<std::size_t>(ix)];
                  }
              y[(o * oh + oy) * ow + ox] = acc;
            }
        x = std::move(y);
        c = oc;
        h = oh;
        w = ow;
        break;
      }
      case nn::LayerKind::maxpool: {
        const std::size_t k = s.kernel, st = s.stride;
        const std::size_t oh = (h - k) / st + 1, ow = (w - k) / st + 1;
        std::vector<double> y(c * oh * ow);
        for (std::size_t ci = 0; ci < c; ++ci)
          for (std::size_t oy = 0; oy < oh; ++oy)
            for (std::size_t ox = 0; ox < ow; ++ox) {
              double m = -INFINITY;
              for (std::size_t ky = 0; ky < k; ++ky)
                for (std::size_t kx = 0; kx < k; ++kx)
                  m = std::max(m, x[(ci * h + oy * st + ky) * w + ox * st + kx]);
              y[(ci * oh + oy) * ow + ox] = m;
            }
        x = std::move(y);
        h = oh;
        w = ow;
        break;
      }
      case nn::LayerKind::dense: {
        const auto& wt = params[0]->value;
        const auto& bs = params[1]->value;
        std::vector<double> y(s.out);
        for (std::size_t o = 0; o < s.out; ++o) {
          double acc = static_cast<double>(bs[o]);
          for (std::size_t i = 0; i < x.size(); ++i) acc += static_cast<double>(wt[o * x.size() + i]) * x[i];
          y[o] = acc;
        }
        x = std::move(y);
        c = x.size();
        h = w = 1;
        break;
      }
      case nn::LayerKind::relu:
        for (double& v : x) v = v > 0.0 ? v : 0.0;
        break;
      case nn::LayerKind::flatten:
        c = x.size();
        h = w = 1;
        break;
    }
  }
  return x;
}

template std::vector<double> network_logits<float>(const nn::Network<float>&, const std::vector<double>&);
template std::vector<double> network_logits<double>(const nn::Network<double>&, const std::vector<double>&);

RingReport check_ring(const EdgeMap& map, double cx, double cy, double r, double tol) {
  RingReport rep;
  const long w = static_cast<long>(map.width), h = static_cast<long>(map.height);
  std::vector<long> on;
  for (long i = 0; i < w * h; ++i)
    if (map.bits[static_cast<std::size_t>(i)]) on.push_back(i);
  rep.nonempty = !on.empty();
  if (!rep.nonempty) return rep;

  rep.within_tolerance = true;
  for (long i : on) {
    const double dx = (i % w) + 0.5 - cx, dy = (i / w) + 0.5 - cy;
    const double dev = std::abs(std::sqrt(dx * dx + dy * dy) - r);
    rep.max_deviation = std::max(rep.max_deviation, dev);
    if (dev > tol) rep.within_tolerance = false;
  }

  // One 8-connected component.
  std::vector<std::uint8_t> seen(map.bits.size(), 0);
  std::deque<long> queue{on.front()};
  seen[static_cast<std::size_t>(on.front())] = 1;
  std::size_t reached = 0;
  while (!queue.empty()) {
    const long i = queue.front();
    queue.pop_front();
    ++reached;
    for (long dy = -1; dy <= 1; ++dy)
      for (long dx = -1; dx <= 1; ++dx) {
        const long x = i % w + dx, y = i / w + dy;
        if (x < 0 || y < 0 || x >= w || y >= h) continue;
        const long j = y * w + x;
        if (map.bits[static_cast<std::size_t>(j)] && !seen[static_cast<std::size_t>(j)]) {
          seen[static_cast<std::size_t>(j)] = 1;
          queue.push_back(j);
        }
      }
  }
  rep.single_component = reached == on.size();

  // Closed: a 4-connected walk over off-pixels from the centre never reaches the border.
  const long c0 = static_cast<long>(cy) * w + static_cast<long>(cx);
  if (map.bits[static_cast<std::size_t>(c0)]) return rep;
  std::fill(seen.begin(), seen.end(), 0);
  queue = {c0};
  seen[static_cast<std::size_t>(c0)] = 1;
  rep.closed = true;
  const long steps[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  while (!queue.empty()) {
    const long i = queue.front();
    queue.pop_front();
    const long x0 = i % w, y0 = i / w;
    if (x0 == 0 || y0 == 0 || x0 == w - 1 || y0 == h - 1) {
      rep.closed = false;
      break;
    }
    for (const auto& s : steps) {
      const long j = (y0 + s[1]) * w + x0 + s[0];
      if (!map.bits[static_cast<std::size_t>(j)] && !seen[static_cast<std::size_t>(j)]) {
        seen[static_cast<std::size_t>(j)] = 1;
        queue.push_back(j);
      }
    }
  }
  return rep;
}

}  // namespace leafpipe::oracle
