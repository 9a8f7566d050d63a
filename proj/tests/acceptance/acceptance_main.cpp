// Acceptance runner: one PASS/FAIL line per criterion, with timings and the
// figures each verdict rests on.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "leafpipe/augment.hpp"
#include "leafpipe/cli.hpp"
#include "leafpipe/color_pca.hpp"
#include "leafpipe/dataset.hpp"
#include "leafpipe/edge.hpp"
#include "leafpipe/error.hpp"
#include "leafpipe/filter.hpp"
#include "leafpipe/metrics.hpp"
#include "leafpipe/nn/checkpoint.hpp"
#include "leafpipe/segment.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

namespace fs = std::filesystem;
using namespace leafpipe;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
  double limit_seconds = 0.0;  ///< 0 = no runtime bound

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& text) { detail += (detail.empty() ? "" : "; ") + text; }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

ImageBuffer random_gray(Rng& rng, std::size_t w, std::size_t h) {
  ImageBuffer img(w, h, 1);
  for (double& v : img.data()) v = rng.uniform();
  return img;
}

ImageBuffer random_rgb(Rng& rng, std::size_t w, std::size_t h) {
  ImageBuffer img(w, h, 3);
  for (double& v : img.data()) v = rng.uniform();
  return img;
}

Field random_field(Rng& rng, std::size_t w, std::size_t h) {
  Field f(w, h);
  for (double& v : f.values) v = rng.uniform();
  return f;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// ------------------------------------------------------------------ 1

Verdict otsu_equivalence() {
  Verdict v;
  v.limit_seconds = 5.0;
  Rng rng(1001);
  std::size_t mismatches = 0;
  const int cases = 1000;
  for (int i = 0; i < cases; ++i) {
    const auto counts = oracle::random_histogram(rng);
    const int got = otsu_threshold(Histogram256::from_counts(counts)).t;
    if (got != oracle::otsu_argmin(counts)) ++mismatches;
  }
  // Plateau cases where only the tie rule decides.
  std::array<std::uint64_t, 256> plateau{};
  plateau[10] = plateau[200] = 500;
  const int plateau_t = otsu_threshold(Histogram256::from_counts(plateau)).t;
  v.require(plateau_t == oracle::otsu_argmin(plateau), "tie case differs");
  v.require(mismatches == 0, std::to_string(mismatches) + " mismatches");
  v.note(std::to_string(cases) + " histograms, " + std::to_string(mismatches) + " mismatches, tie case t=" +
         std::to_string(plateau_t));
  return v;
}

// ------------------------------------------------------------------ 2

Verdict convolution_equivalence() {
  Verdict v;
  Rng rng(2002);
  const Border borders[] = {Border::reflect, Border::clamp, Border::zero};
  double worst = 0.0;
  int cases = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t w = 1 + rng.below(16), h = 1 + rng.below(16);
    std::size_t kr = 1 + 2 * rng.below(3), kc = 1 + 2 * rng.below(3);
    while (kr >= 2 * h) kr -= 2;
    while (kc >= 2 * w) kc -= 2;
    std::vector<double> weights(kr * kc);
    for (double& x : weights) x = rng.uniform(-1.0, 1.0);
    const Kernel2D k(kr, kc, weights);
    const Field f = random_field(rng, w, h);
    for (Border b : borders) {
      worst = std::max(worst, max_abs_diff(convolve2d(f, k, b).values, oracle::correlate(f, k, b).values));
      ++cases;
    }
  }
  v.require(worst <= 1e-12, "oracle difference " + fmt("%.3g", worst));

  double sep_worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const std::size_t size = 3 + 2 * rng.below(3);
    const double sigma = rng.uniform(0.5, 2.0);
    const Field f = random_field(rng, 8 + rng.below(9), 8 + rng.below(9));
    const Border b = borders[i % 3];
    const auto taps = gaussian_kernel_1d(size, sigma);
    const Field sep = separable_correlate(f, taps, taps, b);
    const Field full = convolve2d(f, Kernel2D(gaussian_kernel(size, sigma)), b);
    sep_worst = std::max(sep_worst, max_abs_diff(sep.values, full.values));
  }
  v.require(sep_worst <= 1e-6, "separable difference " + fmt("%.3g", sep_worst));
  v.note(std::to_string(cases) + " oracle cases max diff " + fmt("%.2e", worst) + ", 20 separable max diff " +
         fmt("%.2e", sep_worst));
  return v;
}

// ------------------------------------------------------------------ 3

Verdict gaussian_kernels() {
  Verdict v;
  double worst = 0.0, worst_sum = 0.0;
  bool symmetric = true;
  for (std::size_t size : {3u, 5u, 7u})
    for (double sigma : {0.5, 1.0, 2.0}) {
      const GaussianKernel g = gaussian_kernel(size, sigma);
      worst = std::max(worst, max_abs_diff(g.weights, oracle::gaussian_weights(size, sigma)));
      worst_sum = std::max(worst_sum, std::abs(std::accumulate(g.weights.begin(), g.weights.end(), 0.0) - 1.0));
      const int r = g.radius();
      for (int b = -r; b <= r; ++b)
        for (int a = -r; a <= r; ++a)
          symmetric = symmetric && g.at(a, b) == g.at(-a, b) && g.at(a, b) == g.at(a, -b) &&
                      g.at(a, b) == g.at(b, a);
    }
  v.require(worst <= 1e-12, "kernel difference " + fmt("%.3g", worst));
  v.require(worst_sum <= 1e-12, "sum off by " + fmt("%.3g", worst_sum));
  v.require(symmetric, "symmetry broken");
  v.note("9 kernels, max diff vs 50-digit " + fmt("%.2e", worst) + ", max |sum-1| " + fmt("%.2e", worst_sum));
  return v;
}

// ------------------------------------------------------------------ 4

Verdict canny_suite() {
  Verdict v;
  v.require(canny(ImageBuffer(48, 48, 1, 0.37)).count_on() == 0, "constant image produced edges");

  ImageBuffer disk(64, 64, 1);
  for (std::size_t y = 0; y < 64; ++y)
    for (std::size_t x = 0; x < 64; ++x) {
      const double dx = x + 0.5 - 32.0, dy = y + 0.5 - 32.0;
      disk.at(x, y) = dx * dx + dy * dy <= 18.0 * 18.0 ? 1.0 : 0.0;
    }
  const auto ring = oracle::check_ring(canny(disk), 32.0, 32.0, 18.0, 2.0);
  v.require(ring.ok(), "disk ring check failed (max deviation " + fmt("%.2f", ring.max_deviation) + ")");

  const double lows[] = {0.05, 0.1, 0.15, 0.2, 0.3};
  const double highs[] = {0.3, 0.4, 0.5, 0.6, 0.7};
  Rng rng(4004);
  std::size_t violations = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const ImageBuffer img = trial == 0 ? disk : random_gray(rng, 32, 32);
    std::size_t grid[5][5];
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) grid[i][j] = canny(img, {1.4, lows[i], highs[j], Border::reflect}).count_on();
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        if (i + 1 < 5 && grid[i + 1][j] > grid[i][j]) ++violations;
        if (j + 1 < 5 && grid[i][j + 1] > grid[i][j]) ++violations;
      }
  }
  v.require(violations == 0, std::to_string(violations) + " monotonicity violations");

  std::size_t flood_mismatch = 0;
  for (int i = 0; i < 50; ++i) {
    Field f(4 + rng.below(20), 4 + rng.below(20));
    for (double& x : f.values) x = rng.bernoulli(0.3) ? 0.0 : rng.uniform();
    const double low = rng.uniform(0.0, 0.8), high = rng.uniform(low, 1.0);
    if (hysteresis(f, low, high).bits != oracle::hysteresis(f, low, high)) ++flood_mismatch;
  }
  v.require(flood_mismatch == 0, std::to_string(flood_mismatch) + " hysteresis mismatches");
  v.note("ring max deviation " + fmt("%.2f", ring.max_deviation) + " px, 5x5 grid on 5 images, " +
         std::to_string(violations) + " violations, 50 flood-fill cases, " + std::to_string(flood_mismatch) +
         " mismatches");
  return v;
}

// ------------------------------------------------------------------ 5

Verdict gradient_verification() {
  Verdict v;
  v.limit_seconds = 60.0;
  const std::vector<std::pair<nn::LayerSpec, std::vector<std::size_t>>> layers{
      {nn::LayerSpec::conv(3, 3, 1, 1), {2, 6, 6}},
      {nn::LayerSpec::maxpool(2), {2, 6, 6}},
      {nn::LayerSpec::dense(5), {2, 3, 3}},
      {nn::LayerSpec::relu(), {3, 4, 4}},
      {nn::LayerSpec::flatten(), {2, 3, 3}},
  };
  gradcheck::Report all;
  std::uint64_t seed = 5005;
  for (const auto& [spec, shape] : layers) {
    const auto rep = gradcheck::check_layer(spec, shape, 2, 20, seed++);
    v.require(rep.passes(1e-6), spec.to_string() + " max rel " + fmt("%.2e", rep.max_rel_error) + " at " + rep.worst);
    all.merge(rep);
  }

  nn::Architecture arch;
  arch.input = {3, 16, 16};
  arch.num_classes = 4;
  arch.layers = nn::Architecture::parse_layers(
      "conv:4:3:1:1,relu,maxpool:2,conv:6:3:1:1,relu,maxpool:2,conv:8:3:1:1,relu,maxpool:2,flatten,dense:16,relu,dense:K",
      4);
  nn::Network<double> net(arch, 77);
  Rng rng(5006);
  nn::Tensor<double> x({3, 3, 16, 16});
  for (auto& e : x.storage()) e = rng.normal();
  const auto rep = gradcheck::check_network(net, x, {0, 2, 3}, 20, 5007);
  v.require(rep.passes(1e-6), "network max rel " + fmt("%.2e", rep.max_rel_error) + " at " + rep.worst);
  all.merge(rep);
  v.note(std::to_string(all.probes) + " probes, max relative error " + fmt("%.2e", all.max_rel_error) + ", " +
         std::to_string(all.kinks_skipped) + " probes redrawn off kinks");
  return v;
}

// ------------------------------------------------------------------ 6

struct RunOutcome {
  int train_code = -1;
  double train_acc = 0.0;
  double test_acc = 0.0;
  double seconds = 0.0;
  std::string model;
  std::string log;
};

int call_cli(std::vector<std::string> args, std::string& out_text, std::string& log) {
  args.insert(args.begin(), "leafpipe");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  out_text = out.str();
  log += err.str();
  return code;
}

double read_accuracy(const std::string& eval_out) {
  const auto pos = eval_out.find("accuracy: ");
  if (pos == std::string::npos) return -1.0;
  return std::stod(eval_out.substr(pos + 10));
}

RunOutcome desk_run(const fs::path& data, const fs::path& cfg, const fs::path& out_dir) {
  RunOutcome r;
  fs::create_directories(out_dir);
  r.model = (out_dir / "model.lpnn").string();
  std::string out;
  const auto t0 = std::chrono::steady_clock::now();
  r.train_code = call_cli({"train", "--data", data.string(), "--config", cfg.string(), "--out", r.model}, out, r.log);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (r.train_code != 0) return r;
  for (const char* part : {"train", "test"}) {
    std::string eval_out;
    const int code = call_cli({"eval", "--model", r.model, "--data", data.string(), "--config", cfg.string(),
                               "--split-manifest", r.model + ".split.csv", "--partition", part, "--confusion",
                               (out_dir / (std::string(part) + "_confusion.csv")).string(), "--class-metrics",
                               (out_dir / (std::string(part) + "_class_metrics.csv")).string()},
                              eval_out, r.log);
    const double acc = code == 0 ? read_accuracy(eval_out) : -1.0;
    (std::string(part) == "train" ? r.train_acc : r.test_acc) = acc;
  }
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict desk_training(const fs::path& workdir) {
  Verdict v;
  const fs::path data = workdir / "synthetic";
  fs::remove_all(data);
  synth::SyntheticSpec spec;  // 4 classes x 100 images, 64 x 64
  synth::write_dataset(data, spec);
  const fs::path cfg = workdir / "desk.cfg";
  std::ofstream(cfg) << "# defaults apart from the desk-scale image size\nimage_size = 64\n";

  const RunOutcome a = desk_run(data, cfg, workdir / "run_a");
  if (a.train_code != 0) {
    v.require(false, "train exited " + std::to_string(a.train_code) + ": " + a.log.substr(a.log.size() > 400 ? a.log.size() - 400 : 0));
    return v;
  }
  const RunOutcome b = desk_run(data, cfg, workdir / "run_b");
  v.require(a.train_acc >= 0.95, "train accuracy " + fmt("%.4f", a.train_acc));
  v.require(a.test_acc >= 0.90, "test accuracy " + fmt("%.4f", a.test_acc));
  v.require(a.seconds < 600.0, "training took " + fmt("%.1f", a.seconds) + " s");
  const bool same_model = b.train_code == 0 && slurp(a.model) == slurp(b.model);
  const bool same_history = slurp(a.model + ".history.csv") == slurp(b.model + ".history.csv");
  v.require(same_model && same_history, "second run not bit-identical");
  v.note("30 epochs in " + fmt("%.1f", a.seconds) + " s, train acc " + fmt("%.4f", a.train_acc) + ", test acc " +
         fmt("%.4f", a.test_acc) + ", rerun " + (same_model && same_history ? "bit-identical" : "differs"));
  return v;
}

// ------------------------------------------------------------------ 7

Verdict augmentation_suite() {
  Verdict v;
  Rng rng(7007);
  const ImageBuffer base = random_rgb(rng, 24, 18);
  const ColorPCA pca = fit_color_pca(std::span<const ImageBuffer>(&base, 1));

  // Identities and involutions.
  v.require(scale_image(base, 1.0) == base, "scale(1) not identity");
  v.require(rotate_image(base, 0.0) == base, "rotate(0) not identity");
  v.require(gamma_correct(base, 1.0) == base, "gamma(1) not identity");
  v.require(flip_vertical(flip_vertical(base)) == base, "flip not an involution");
  v.require(inject_noise(base, rng, 0.0) == base, "zero noise not identity");
  v.require(apply_color_shift(base, pca, {0, 0, 0}) == base, "zero colour shift not identity");
  Rng none_rng(1);
  v.require(augment(base, AugmentConfig::none(), none_rng, &pca) == base, "all-off chain not identity");

  // 1000 randomized applications of the full chain, gray and colour.
  const ImageBuffer gray = random_gray(rng, 17, 23);
  std::size_t bad_shape = 0, bad_range = 0;
  AugmentConfig cfg;
  for (int i = 0; i < 1000; ++i) {
    Rng r = Rng::substream(7008, static_cast<std::uint64_t>(i));
    cfg.one_per_copy = i % 2 == 1;
    const ImageBuffer& in = i % 5 == 0 ? gray : base;
    const ImageBuffer out = augment(in, cfg, r, &pca);
    bad_shape += !out.same_shape(in);
    for (double x : out.data())
      if (!(x >= 0.0 && x <= 1.0)) {
        ++bad_range;
        break;
      }
  }
  v.require(bad_shape == 0 && bad_range == 0,
            std::to_string(bad_shape) + " shape and " + std::to_string(bad_range) + " range failures");

  // Noise standard deviation.
  const ImageBuffer mid(128, 128, 1, 0.5);
  const ImageBuffer noisy = inject_noise(mid, rng, 1.0);
  double mean = 0.0;
  for (double x : noisy.data()) mean += x - 0.5;
  mean /= static_cast<double>(noisy.size());
  double var = 0.0;
  for (double x : noisy.data()) var += (x - 0.5 - mean) * (x - 0.5 - mean);
  const double sd = std::sqrt(var / static_cast<double>(noisy.size()));
  v.require(sd >= 0.045 && sd <= 0.055, "noise std " + fmt("%.4f", sd));

  // Known spectrum and covariance reconstruction.
  const double s = 0.001;
  std::vector<ImageBuffer> set;
  for (int k = 0; k < 4; ++k) {
    ImageBuffer img(64, 64, 3);
    for (std::size_t i = 0; i < img.size(); i += 3) {
      img.data()[i] = 0.5 + std::sqrt(4 * s) * rng.normal();
      img.data()[i + 1] = 0.5 + std::sqrt(s) * rng.normal();
      img.data()[i + 2] = 0.5 + std::sqrt(0.25 * s) * rng.normal();
    }
    set.push_back(img);
  }
  const ColorPCA p = fit_color_pca(std::span<const ImageBuffer>(set));
  const double expected[3] = {4 * s, s, 0.25 * s};
  double spectrum_err = 0.0, recon_err = 0.0;
  for (int i = 0; i < 3; ++i) spectrum_err = std::max(spectrum_err, std::abs(p.eigenvalues[i] - expected[i]) / expected[i]);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      double rec = 0.0;
      for (int i = 0; i < 3; ++i) rec += p.eigenvectors[i][r] * p.eigenvalues[i] * p.eigenvectors[i][c];
      recon_err = std::max(recon_err, std::abs(rec - p.covariance[r][c]));
    }
  v.require(spectrum_err <= 0.05, "spectrum relative error " + fmt("%.3f", spectrum_err));
  v.require(recon_err <= 1e-8, "covariance reconstruction error " + fmt("%.2e", recon_err));
  v.note("1000 chains ok, noise std " + fmt("%.4f", sd) + ", spectrum rel err " + fmt("%.3f", spectrum_err) +
         ", reconstruction err " + fmt("%.1e", recon_err));
  return v;
}

// ------------------------------------------------------------------ 8

Verdict split_and_metrics(const fs::path& workdir) {
  Verdict v;
  Rng rng(8008);
  std::size_t split_failures = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 10 + rng.below(500);
    const double ratio = rng.uniform(0.05, 0.95);
    const std::uint64_t seed = rng.next_u64();
    LabeledDataset ds;
    const std::size_t k = 2 + rng.below(6);
    for (std::size_t c = 0; c < k; ++c) ds.classes.push_back("c" + std::to_string(c));
    for (std::size_t i = 0; i < n; ++i) ds.items.push_back({fs::path("f" + std::to_string(i)), i % k});
    const SplitDataset s = split(ds, ratio, seed, trial % 2 == 0);
    std::set<std::string> train, test;
    for (const auto& it : s.train) train.insert(it.path.string());
    for (const auto& it : s.test) test.insert(it.path.string());
    std::vector<std::string> overlap;
    std::set_intersection(train.begin(), train.end(), test.begin(), test.end(), std::back_inserter(overlap));
    const bool ok = overlap.empty() && train.size() == s.train.size() && test.size() == s.test.size() &&
                    train.size() + test.size() == n &&
                    s.train.size() == static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
    split_failures += !ok;
  }
  v.require(split_failures == 0, std::to_string(split_failures) + " split triples failed");

  std::size_t metric_failures = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + rng.below(14), n = 1 + rng.below(300);
    std::vector<std::size_t> truth(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = rng.below(k);
      pred[i] = rng.bernoulli(0.5) ? truth[i] : rng.below(k);
    }
    const auto cm = confusion(truth, pred, k);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) correct += truth[i] == pred[i];
    const auto rec = recall(cm);
    double weighted = 0.0;
    for (std::size_t c = 0; c < k; ++c)
      if (rec[c]) weighted += *rec[c] * static_cast<double>(cm.row_sum(c)) / static_cast<double>(n);
    const double acc = accuracy(cm);
    const bool ok = cm.total() == n && cm.trace() == correct &&
                    acc == static_cast<double>(correct) / static_cast<double>(n) && std::abs(weighted - acc) <= 1e-12;
    metric_failures += !ok;
  }
  v.require(metric_failures == 0, std::to_string(metric_failures) + " label sets broke an identity");

  // Fifteen class folders on disk give a 15 x 15 matrix.
  const fs::path root = workdir / "fifteen";
  fs::remove_all(root);
  for (int c = 0; c < 15; ++c) {
    char name[16];
    std::snprintf(name, sizeof name, "class_%02d", c);
    fs::create_directories(root / name);
    save_image(ImageBuffer(2, 2, 3, 0.5), root / name / "a.ppm");
  }
  const LabeledDataset ds = scan_dataset(root);
  std::vector<std::size_t> labels;
  for (const auto& it : ds.items) labels.push_back(it.label);
  const auto cm = confusion(labels, labels, ds.num_classes());
  const std::string csv = format_confusion_csv(cm, ds.classes);
  const auto lines = std::count(csv.begin(), csv.end(), '\n');
  v.require(cm.num_classes() == 15 && lines == 16, "K=15 matrix has " + std::to_string(cm.num_classes()) + " classes");
  v.note("200 split triples, 200 label sets, K=15 gives " + std::to_string(cm.num_classes()) + "x" +
         std::to_string(cm.num_classes()));
  return v;
}

// ------------------------------------------------------------------ 9

Verdict serialization(const fs::path& workdir) {
  Verdict v;
  Rng rng(9009);
  std::size_t roundtrip_failures = 0;
  for (int i = 0; i < 20; ++i) {
    nn::Architecture arch;
    const std::size_t c = 1 + rng.below(3), hw = 8 + rng.below(9), k = 2 + rng.below(14);
    arch.input = {c, hw, hw};
    arch.num_classes = k;
    const std::size_t convs = rng.below(3);
    for (std::size_t j = 0; j < convs; ++j) {
      arch.layers.push_back(nn::LayerSpec::conv(1 + static_cast<std::uint32_t>(rng.below(6)), 3, 1, 1));
      arch.layers.push_back(nn::LayerSpec::relu());
      if (rng.bernoulli(0.5)) arch.layers.push_back(nn::LayerSpec::maxpool(2));
    }
    arch.layers.push_back(nn::LayerSpec::flatten());
    if (rng.bernoulli(0.5)) {
      arch.layers.push_back(nn::LayerSpec::dense(4 + static_cast<std::uint32_t>(rng.below(12))));
      arch.layers.push_back(nn::LayerSpec::relu());
    }
    arch.layers.push_back(nn::LayerSpec::dense(static_cast<std::uint32_t>(k)));
    const nn::Network<float> net(arch, rng.next_u64());
    std::vector<std::string> names;
    for (std::size_t j = 0; j < k; ++j) names.push_back("cls" + std::to_string(j));
    const fs::path path = workdir / "ckpt.lpnn";
    nn::save_checkpoint(net, path, names);
    const auto back = nn::load_checkpoint<float>(path);
    bool same = back.network.architecture() == arch && back.class_names == names;
    const auto a = net.parameters();
    const auto b = back.network.parameters();
    same = same && a.size() == b.size();
    for (std::size_t j = 0; same && j < a.size(); ++j) same = a[j]->value == b[j]->value;
    same = same && nn::encode_checkpoint(back.network, names) == nn::read_file_bytes(path);
    roundtrip_failures += !same;
  }
  v.require(roundtrip_failures == 0, std::to_string(roundtrip_failures) + " round trips differ");

  nn::Architecture arch;
  arch.input = {1, 4, 4};
  arch.num_classes = 2;
  arch.layers = {nn::LayerSpec::flatten(), nn::LayerSpec::dense(2)};
  const auto good = nn::encode_checkpoint(nn::Network<float>(arch, 1), {});
  const auto expect = [&](std::vector<std::uint8_t> bytes, const std::string& fragment) {
    try {
      nn::decode_checkpoint<float>(bytes);
      v.require(false, "accepted corrupt file (" + fragment + ")");
    } catch (const DataError& e) {
      v.require(std::string(e.what()).find(fragment) != std::string::npos,
                "wrong error '" + std::string(e.what()) + "' for " + fragment);
    } catch (const std::exception& e) {
      v.require(false, "unexpected exception '" + std::string(e.what()) + "' for " + fragment);
    }
  };
  expect(std::vector<std::uint8_t>(good.begin(), good.end() - 5), "truncated parameter block");
  auto magic = good;
  magic[1] = '?';
  expect(magic, "not a checkpoint");
  auto version = good;
  version[4] = 7;
  expect(version, "unsupported checkpoint version");
  auto trailing = good;
  trailing.push_back(1);
  expect(trailing, "trailing data");
  auto count = good;
  count[4 + 2 + 16 + 4 + 2 * 17 + 4] ^= 1;
  expect(count, "parameter count mismatch");

  std::size_t crashes = 0;
  for (int i = 0; i < 500; ++i) {
    auto bytes = good;
    bytes[rng.below(bytes.size())] = static_cast<std::uint8_t>(rng.below(256));
    if (rng.bernoulli(0.3)) bytes.resize(rng.below(bytes.size()));
    try {
      nn::decode_checkpoint<float>(bytes);
    } catch (const DataError&) {
    } catch (...) {
      ++crashes;
    }
  }
  v.require(crashes == 0, std::to_string(crashes) + " corruptions escaped as non-data errors");
  v.note("20 random architectures round-trip bit-identically, 5 declared error cases, 500 random corruptions");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria runner"};
  std::string workdir = "acceptance_work";
  std::vector<int> only;
  app.add_option("--workdir", workdir, "Scratch directory for generated data and models")->capture_default_str();
  app.add_option("--only", only, "Run only these criterion numbers");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(workdir);

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"Otsu oracle equivalence", otsu_equivalence},
      {"Convolution oracle equivalence", convolution_equivalence},
      {"Gaussian kernel correctness", gaussian_kernels},
      {"Canny behaviour suite", canny_suite},
      {"Gradient verification", gradient_verification},
      {"End-to-end desk-scale training", [&] { return desk_training(workdir); }},
      {"Augmentation suite", augmentation_suite},
      {"Split and metrics invariants", [&] { return split_and_metrics(workdir); }},
      {"Serialization", [&] { return serialization(workdir); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (v.limit_seconds > 0 && secs >= v.limit_seconds)
      v.require(false, "runtime " + fmt("%.2f", secs) + " s over " + fmt("%.0f", v.limit_seconds) + " s");
    failures += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " [" << id << "] " << criteria[i].first << " (" << fmt("%.2f", secs) << " s): " << v.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
