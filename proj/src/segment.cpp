#include "leafpipe/segment.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "leafpipe/error.hpp"

namespace leafpipe {

namespace {

using u128 = unsigned __int128;

// Above this pixel count the exact cross-multiplied comparison could overflow
// 128 bits; the scan falls back to long double there.
constexpr std::uint64_t kExactLimit = 5'000'000;

// s^2 / n as an unreduced fraction; an empty class contributes 0/1.
struct Frac {
  u128 num;
  u128 den;
};

Frac class_term(std::uint64_t s1, std::uint64_t n) {
  if (n == 0) return {0, 1};
  return {static_cast<u128>(s1) * s1, n};
}

// a/b + c/d
Frac add(Frac x, Frac y) { return {x.num * y.den + y.num * x.den, x.den * y.den}; }

bool greater(Frac x, Frac y) { return x.num * y.den > y.num * x.den; }

}  // namespace

Histogram256 Histogram256::from_counts(const std::array<std::uint64_t, 256>& counts) {
  Histogram256 h;
  h.counts = counts;
  for (auto c : counts) h.total += c;
  return h;
}

std::size_t Histogram256::nonempty_bins() const {
  std::size_t n = 0;
  for (auto c : counts) n += c != 0;
  return n;
}

Histogram256 histogram(const ImageBuffer& gray) {
  if (gray.channels() != 1) throw std::invalid_argument("histogram expects a gray image");
  Histogram256 h;
  for (double p : gray.pixels()) {
    const double v = std::isnan(p) ? 0.0 : std::clamp(p, 0.0, 1.0);
    ++h.counts[static_cast<std::size_t>(std::floor(v * 255.0 + 0.5))];
  }
  h.total = gray.size();
  return h;
}

OtsuResult otsu_terms(const Histogram256& h, int t) {
  if (t < 0 || t > 255) throw std::invalid_argument("threshold bin out of range");
  if (h.total == 0) throw DataError("degenerate histogram");
  long double n1 = 0, s1 = 0, q1 = 0, n2 = 0, s2 = 0, q2 = 0;
  for (int i = 0; i < 256; ++i) {
    const long double c = static_cast<long double>(h.counts[i]);
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
  const long double total = static_cast<long double>(h.total);
  OtsuResult r;
  r.t = t;
  r.omega1 = static_cast<double>(n1 / total);
  r.omega2 = 1.0 - r.omega1;
  const long double var1 = n1 > 0 ? q1 / n1 - (s1 / n1) * (s1 / n1) : 0.0L;
  const long double var2 = n2 > 0 ? q2 / n2 - (s2 / n2) * (s2 / n2) : 0.0L;
  r.var1 = static_cast<double>(std::max(var1, 0.0L));
  r.var2 = static_cast<double>(std::max(var2, 0.0L));
  r.within_class_variance = r.omega1 * r.var1 + r.omega2 * r.var2;
  return r;
}

OtsuResult otsu_threshold(const Histogram256& h) {
  if (h.nonempty_bins() < 2) throw DataError("degenerate histogram");

  // N * sigma_w^2(t) = sum i^2 c_i - (S1a^2 / n1 + S1b^2 / n2), so the minimizer
  // of the within-class variance is the maximizer of the bracketed score.
  std::uint64_t total_n = 0, total_s = 0;
  for (int i = 0; i < 256; ++i) {
    total_n += h.counts[i];
    total_s += h.counts[i] * static_cast<std::uint64_t>(i);
  }

  int best_t = 0;
  std::uint64_t n1 = 0, s1 = 0;
  if (total_n <= kExactLimit) {
    Frac best{0, 0};
    for (int t = 0; t < 255; ++t) {
      n1 += h.counts[t];
      s1 += h.counts[t] * static_cast<std::uint64_t>(t);
      const Frac score = add(class_term(s1, n1), class_term(total_s - s1, total_n - n1));
      if (t == 0 || greater(score, best)) {
        best = score;
        best_t = t;
      }
    }
  } else {
    long double best = -1.0L;
    for (int t = 0; t < 255; ++t) {
      n1 += h.counts[t];
      s1 += h.counts[t] * static_cast<std::uint64_t>(t);
      const std::uint64_t n2 = total_n - n1;
      const long double a = n1 ? static_cast<long double>(s1) * s1 / n1 : 0.0L;
      const long double sb = static_cast<long double>(total_s - s1);
      const long double score = a + (n2 ? sb * sb / n2 : 0.0L);
      if (score > best) {
        best = score;
        best_t = t;
      }
    }
  }
  return otsu_terms(h, best_t);
}

ImageBuffer binarize(const ImageBuffer& gray, int t) {
  if (gray.channels() != 1) throw std::invalid_argument("binarize expects a gray image");
  if (t < 0 || t > 255) throw std::invalid_argument("threshold bin must lie in [0, 255]");
  const double cut = static_cast<double>(t) / 255.0;
  ImageBuffer out(gray.width(), gray.height(), 1);
  for (std::size_t i = 0; i < gray.size(); ++i) out.data()[i] = gray.data()[i] > cut ? 1.0 : 0.0;
  return out;
}

std::string format_otsu_report(const OtsuResult& r) {
  std::ostringstream os;
  os.precision(10);
  os << "threshold: " << r.t << '\n'
     << "omega1: " << r.omega1 << '\n'
     << "omega2: " << r.omega2 << '\n'
     << "var1: " << r.var1 << '\n'
     << "var2: " << r.var2 << '\n'
     << "within_class_variance: " << r.within_class_variance << '\n';
  return os.str();
}

}  // namespace leafpipe
