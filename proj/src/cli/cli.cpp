#include "leafpipe/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "leafpipe/augment.hpp"
#include "leafpipe/config.hpp"
#include "leafpipe/dataset.hpp"
#include "leafpipe/edge.hpp"
#include "leafpipe/error.hpp"
#include "leafpipe/metrics.hpp"
#include "leafpipe/nn/checkpoint.hpp"
#include "leafpipe/nn/network.hpp"
#include "leafpipe/nn/trainer.hpp"
#include "leafpipe/parallel.hpp"
#include "leafpipe/preprocess.hpp"
#include "leafpipe/segment.hpp"
#include "leafpipe/simd/kernels.hpp"

namespace leafpipe::cli {

namespace fs = std::filesystem;

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void require_file(const std::string& path, const char* what) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw DataError(std::string(what) + " not found: " + path);
}

void require_dir(const std::string& path, const char* what) {
  std::error_code ec;
  if (!fs::is_directory(path, ec)) throw DataError(std::string(what) + " not found: " + path);
}

/// The parent directory of an output file must already exist.
void require_writable_parent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty() && !fs::is_directory(parent, ec))
    throw DataError("output directory does not exist: " + parent.string());
}

/// --config wins, then the environment variable, then built-in defaults.
PipelineConfig resolve_config(const std::string& explicit_path, std::string* source) {
  std::string path = explicit_path;
  if (path.empty()) {
    if (const char* env = std::getenv(kConfigEnvVar); env && *env) path = env;
  }
  if (path.empty()) {
    if (source) *source = "built-in defaults";
    PipelineConfig cfg;
    cfg.propagate();
    return cfg;
  }
  if (source) *source = path;
  return load_config(path);
}

/// Every option of a subcommand with its resolved value, for replayable logs.
void log_invocation(std::ostream& err, const CLI::App& sub) {
  err << "# leafpipe " << sub.get_name() << '\n';
  std::istringstream lines(sub.config_to_str(false, false));
  std::string line;
  while (std::getline(lines, line))
    if (!line.empty() && line.front() != '[') err << "#   " << line << '\n';
}

void log_config(std::ostream& err, const PipelineConfig& cfg, const std::string& source) {
  err << "# config source: " << source << '\n';
  std::istringstream lines(format_config(cfg));
  std::string line;
  while (std::getline(lines, line)) err << "#   " << line << '\n';
  err << "# seed: " << cfg.seed << '\n';
  err << "# simd: " << simd::isa_name(simd::active_isa()) << '\n';
}

template <typename T>
void take(const CLI::Option* opt, const T& value, T& dst) {
  if (opt->count() > 0) dst = value;
}

std::vector<fs::path> list_images(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && is_image_file(e.path())) files.push_back(fs::relative(e.path(), dir));
  std::sort(files.begin(), files.end());
  return files;
}

fs::path with_image_extension(fs::path p, std::size_t channels) {
  p.replace_extension(channels == 1 ? ".pgm" : ".ppm");
  return p;
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

/// Preprocessing flags shared by several subcommands; unset flags keep the config value.
struct PreprocessFlags {
  std::size_t image_size = PreprocessConfig{}.image_size;
  bool gray = false;
  double blur_sigma = PreprocessConfig{}.blur_sigma;
  bool otsu = false;
  bool canny = false;
  CLI::Option* size_opt = nullptr;
  CLI::Option* gray_opt = nullptr;
  CLI::Option* blur_opt = nullptr;
  CLI::Option* otsu_opt = nullptr;
  CLI::Option* canny_opt = nullptr;

  void attach(CLI::App* sub) {
    size_opt = sub->add_option("--size", image_size, "Square output side in pixels");
    gray_opt = sub->add_flag("--gray", gray, "Convert to grayscale");
    blur_opt = sub->add_option("--blur-sigma", blur_sigma, "Gaussian blur sigma (0 disables)");
    otsu_opt = sub->add_flag("--otsu", otsu, "Append the Otsu binarization stage");
    canny_opt = sub->add_flag("--canny", canny, "Append the Canny edge stage");
    otsu_opt->excludes(canny_opt);
    otsu_opt->description("Append the Otsu binarization stage");
    canny_opt->description("Append the Canny edge stage");
  }

  void apply(PreprocessConfig& pre) const {
    take(size_opt, image_size, pre.image_size);
    if (gray_opt->count() > 0) pre.channels = gray ? ChannelMode::gray : ChannelMode::rgb;
    take(blur_opt, blur_sigma, pre.blur_sigma);
    if (otsu_opt->count() > 0) pre.otsu_stage = otsu;
    if (canny_opt->count() > 0) pre.canny_stage = canny;
  }
};

// ---------------------------------------------------------------- preprocess

struct PreprocessArgs {
  std::string input;
  std::string output;
  std::string config;
  std::size_t threads = 1;
  PreprocessFlags flags;
};

int cmd_preprocess(const PreprocessArgs& a, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  std::string source;
  PipelineConfig cfg = resolve_config(a.config, &source);
  a.flags.apply(cfg.preprocess);
  cfg.validate();
  log_invocation(err, sub);
  log_config(err, cfg, source);

  std::error_code ec;
  if (fs::is_directory(a.input, ec)) {
    const auto files = list_images(a.input);
    if (files.empty()) throw DataError("no images under " + a.input);
    // Create the directory tree up front so workers only write files.
    for (const auto& rel : files) fs::create_directories(fs::path(a.output) / rel.parent_path());
    parallel_for(files.size(), a.threads, [&](std::size_t i) {
      const ImageBuffer img = prepare_image(load_image(fs::path(a.input) / files[i]), cfg.preprocess);
      save_image(img, with_image_extension(fs::path(a.output) / files[i], img.channels()));
    });
    out << "preprocessed " << files.size() << " images into " << a.output << '\n';
    return kOk;
  }
  require_file(a.input, "input image");
  require_writable_parent(a.output);
  const ImageBuffer img = prepare_image(load_image(a.input), cfg.preprocess);
  save_image(img, a.output);
  out << "wrote " << a.output << " (" << img.width() << "x" << img.height() << "x" << img.channels()
      << ")\n";
  return kOk;
}

// ------------------------------------------------------------------- segment

struct SegmentArgs {
  std::string input;
  std::string output;
  std::string report;
};

int cmd_segment(const SegmentArgs& a, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  log_invocation(err, sub);
  err << "# seed: none (deterministic stage)\n";
  require_file(a.input, "input image");
  require_writable_parent(a.output);
  if (!a.report.empty()) require_writable_parent(a.report);

  const ImageBuffer gray = to_grayscale(load_image(a.input));
  const OtsuResult r = otsu_threshold(histogram(gray));
  save_image(binarize(gray, r.t), a.output);
  const std::string report = format_otsu_report(r);
  if (a.report.empty()) {
    out << report;
  } else {
    std::ofstream f(a.report, std::ios::binary);
    f << report;
    if (!f) throw DataError("cannot write " + a.report);
    out << "threshold " << r.t << ", report written to " << a.report << '\n';
  }
  return kOk;
}

// --------------------------------------------------------------------- edges

struct EdgesArgs {
  std::string input;
  std::string output;
  CannyParams params;
};

int cmd_edges(const EdgesArgs& a, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  log_invocation(err, sub);
  err << "# seed: none (deterministic stage)\n";
  if (!(a.params.sigma > 0.0)) throw std::invalid_argument("--sigma must be > 0");
  if (!(a.params.low >= 0.0 && a.params.low <= a.params.high))
    throw std::invalid_argument("thresholds must satisfy 0 <= low <= high");
  require_file(a.input, "input image");
  require_writable_parent(a.output);

  const EdgeMap map = canny(load_image(a.input), a.params);
  save_image(map.to_image(), a.output);
  out << "wrote " << a.output << " (" << map.count_on() << " edge pixels)\n";
  return kOk;
}

// ------------------------------------------------------------------- augment

struct AugmentArgs {
  std::string input;
  std::string output;
  std::string config;
  std::size_t count = 1;
  std::uint64_t seed = 42;
  std::string mode = "joint";
  std::size_t threads = 1;
  AugmentConfig aug;
  std::map<std::string, CLI::Option*> opts;
};

int cmd_augment(AugmentArgs a, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  std::string source;
  PipelineConfig cfg = resolve_config(a.config, &source);
  AugmentConfig& aug = cfg.augment;
  take(a.opts.at("seed"), a.seed, cfg.seed);
  take(a.opts.at("scale-min"), a.aug.scale_range[0], aug.scale_range[0]);
  take(a.opts.at("scale-max"), a.aug.scale_range[1], aug.scale_range[1]);
  take(a.opts.at("rotation-deg"), a.aug.rotation_deg, aug.rotation_deg);
  take(a.opts.at("noise-factor"), a.aug.noise_factor, aug.noise_factor);
  take(a.opts.at("gamma-min"), a.aug.gamma_range[0], aug.gamma_range[0]);
  take(a.opts.at("gamma-max"), a.aug.gamma_range[1], aug.gamma_range[1]);
  take(a.opts.at("pca-alpha-std"), a.aug.pca_alpha_std, aug.pca_alpha_std);
  take(a.opts.at("p-scale"), a.aug.p_scale, aug.p_scale);
  take(a.opts.at("p-rotate"), a.aug.p_rotate, aug.p_rotate);
  take(a.opts.at("p-flip"), a.aug.p_flip, aug.p_flip);
  take(a.opts.at("p-gamma"), a.aug.p_gamma, aug.p_gamma);
  take(a.opts.at("p-pca"), a.aug.p_pca, aug.p_pca);
  take(a.opts.at("p-noise"), a.aug.p_noise, aug.p_noise);
  if (a.opts.at("mode")->count() > 0) aug.one_per_copy = a.mode == "one_per_copy";
  cfg.propagate();
  cfg.validate();
  if (a.count < 1) throw std::invalid_argument("--count must be >= 1");
  log_invocation(err, sub);
  log_config(err, cfg, source);

  require_dir(a.input, "input directory");
  const fs::path in_root(a.input);
  const fs::path out_root(a.output);
  const auto files = list_images(in_root);
  if (files.empty()) throw DataError("no images under " + a.input);

  std::vector<ImageBuffer> images(files.size());
  parallel_for(files.size(), a.threads, [&](std::size_t i) { images[i] = load_image(in_root / files[i]); });

  std::vector<ImageBuffer> rgb;
  for (const auto& img : images)
    if (img.channels() == 3) rgb.push_back(img);
  std::optional<ColorPCA> pca;
  if (aug.p_pca > 0.0 && !rgb.empty()) pca = fit_color_pca(rgb);
  rgb.clear();

  for (const auto& rel : files) fs::create_directories(out_root / rel.parent_path());

  const std::size_t jobs = files.size() * a.count;
  std::vector<fs::path> outputs(jobs);
  std::vector<AugmentTrace> traces(jobs);
  parallel_for(jobs, a.threads, [&](std::size_t j) {
    const std::size_t i = j / a.count;
    const std::size_t k = j % a.count;
    Rng rng = Rng::substream(cfg.seed, j);
    const ImageBuffer result = augment(images[i], aug, rng, pca ? &*pca : nullptr, &traces[j]);
    fs::path rel = files[i];
    rel.replace_filename(rel.stem().string() + "_aug" + std::to_string(k));
    outputs[j] = with_image_extension(rel, result.channels());
    save_image(result, out_root / outputs[j]);
  });

  const fs::path manifest = out_root / "manifest.csv";
  std::ofstream m(manifest, std::ios::binary);
  m << "source,output,operators,parameters\n";
  for (std::size_t j = 0; j < jobs; ++j) {
    std::string ops, params;
    for (const auto& step : traces[j]) {
      if (!ops.empty()) {
        ops += '+';
        params += ' ';
      }
      ops += step.op;
      params += step.op + ":" + step.params;
    }
    if (ops.empty()) ops = "none";
    m << csv_cell(files[j / a.count].generic_string()) << ',' << csv_cell(outputs[j].generic_string()) << ','
      << csv_cell(ops) << ',' << csv_cell(params) << '\n';
  }
  if (!m) throw DataError("cannot write " + manifest.string());
  out << "wrote " << jobs << " augmented images and " << manifest.string() << '\n';
  return kOk;
}

// --------------------------------------------------------------------- split

struct SplitArgs {
  std::string data;
  std::string output;
  std::string config;
  double ratio = 0.8;
  std::uint64_t seed = 42;
  bool plain = false;
  CLI::Option* ratio_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* plain_opt = nullptr;
};

int cmd_split(const SplitArgs& a, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  std::string source;
  PipelineConfig cfg = resolve_config(a.config, &source);
  take(a.ratio_opt, a.ratio, cfg.split_ratio);
  take(a.seed_opt, a.seed, cfg.seed);
  if (a.plain_opt->count() > 0) cfg.stratified = !a.plain;
  if (!a.data.empty()) cfg.data_root = a.data;
  cfg.propagate();
  cfg.validate();
  log_invocation(err, sub);
  log_config(err, cfg, source);
  if (cfg.data_root.empty()) throw std::invalid_argument("--data (or data_root in the config) is required");
  require_dir(cfg.data_root.string(), "dataset root");
  require_writable_parent(a.output);

  const LabeledDataset ds = scan_dataset(cfg.data_root);
  const SplitDataset s = split(ds, cfg.split_ratio, cfg.seed, cfg.stratified);
  write_split_manifest(s, ds, a.output);
  out << "train " << s.train.size() << ", test " << s.test.size() << " -> " << a.output << '\n';
  return kOk;
}

// --------------------------------------------------------------------- train

struct TrainArgs {
  std::string data;
  std::string config;
  std::string output = "model.lpnn";
  std::string history;
  std::string manifest;
  std::size_t epochs = nn::TrainConfig{}.epochs;
  std::uint64_t seed = 42;
  std::size_t threads = 1;
  CLI::Option* epochs_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
  PreprocessFlags flags;
};

template <typename T>
void run_training(nn::Network<T>& net, const FileSampleSource& train_src, const FileSampleSource& test_src,
                  const PipelineConfig& cfg, const LabeledDataset& ds, const TrainArgs& a,
                  const std::string& history_path, std::ostream& out) {
  const auto sink = [&](const EpochRecord& r) {
    out << "epoch " << r.epoch << " train_loss " << fixed6(r.train_loss) << " train_acc " << fixed6(r.train_acc)
        << " val_loss " << fixed6(r.val_loss) << " val_acc " << fixed6(r.val_acc) << std::endl;
  };
  const auto history = nn::train(net, train_src, &test_src, cfg.train, sink);
  export_history(history, history_path);
  nn::save_checkpoint(net, a.output, ds.classes);
}

int cmd_train(const TrainArgs& a, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  std::string source;
  PipelineConfig cfg = resolve_config(a.config, &source);
  take(a.epochs_opt, a.epochs, cfg.train.epochs);
  take(a.seed_opt, a.seed, cfg.seed);
  take(a.threads_opt, a.threads, cfg.threads);
  a.flags.apply(cfg.preprocess);
  if (!a.data.empty()) cfg.data_root = a.data;
  cfg.propagate();
  cfg.validate();
  if (cfg.data_root.empty()) throw std::invalid_argument("--data (or data_root in the config) is required");

  const std::string history = a.history.empty() ? a.output + ".history.csv" : a.history;
  const std::string manifest = a.manifest.empty() ? a.output + ".split.csv" : a.manifest;
  require_dir(cfg.data_root.string(), "dataset root");
  require_writable_parent(a.output);
  require_writable_parent(history);
  require_writable_parent(manifest);
  log_invocation(err, sub);
  log_config(err, cfg, source);

  const LabeledDataset ds = scan_dataset(cfg.data_root);
  const SplitDataset s = split(ds, cfg.split_ratio, cfg.seed, cfg.stratified);
  write_split_manifest(s, ds, manifest);
  err << "# classes: " << ds.num_classes() << ", train " << s.train.size() << ", test " << s.test.size() << '\n';

  const PreprocessConfig& pre = cfg.preprocess;
  std::optional<ColorPCA> pca;
  if (cfg.augment_enabled && cfg.augment.p_pca > 0.0 && pre.output_channels() == 3) {
    const FileSampleSource plain(cfg.data_root, s.train, pre);
    pca = fit_color_pca(plain.size(), [&](std::size_t i) { return plain.prepared(i); });
  }
  const FileSampleSource train_src(cfg.data_root, s.train, pre,
                                   cfg.augment_enabled ? std::optional<AugmentConfig>(cfg.augment)
                                                       : std::nullopt,
                                   pca);
  const FileSampleSource test_src(cfg.data_root, s.test, pre);

  nn::Architecture arch = nn::Architecture::default_for(pre.output_channels(), pre.image_size, pre.image_size,
                                                        ds.num_classes());
  if (!cfg.architecture.empty()) arch.layers = nn::Architecture::parse_layers(cfg.architecture, ds.num_classes());
  err << "# architecture: " << nn::Architecture::format_layers(arch.layers) << '\n';

  if (cfg.train.float_width == nn::FloatWidth::f64) {
    nn::Network<double> net(arch, cfg.seed);
    run_training(net, train_src, test_src, cfg, ds, a, history, out);
  } else {
    nn::Network<float> net(arch, cfg.seed);
    run_training(net, train_src, test_src, cfg, ds, a, history, out);
  }
  out << "checkpoint " << a.output << ", history " << history << ", split " << manifest << '\n';
  return kOk;
}

// ---------------------------------------------------------------- eval/predict

/// Preprocessing that matches a trained model: the side length comes from the
/// checkpoint and the channel count must agree with the configuration.
PreprocessConfig model_preprocess(PreprocessConfig pre, const nn::Architecture& arch) {
  if (arch.input[1] != arch.input[2]) throw DataError("checkpoint input is not square");
  pre.image_size = arch.input[1];
  if (pre.output_channels() != arch.input[0])
    throw DataError("model expects " + std::to_string(arch.input[0]) + " input channel(s) but the configuration produces " +
                    std::to_string(pre.output_channels()));
  return pre;
}

struct EvalArgs {
  std::string model;
  std::string data;
  std::string manifest;
  std::string config;
  std::string partition = "test";
  std::string confusion_out = "confusion.csv";
  std::string metrics_out = "class_metrics.csv";
  std::size_t batch_size = 32;
  std::size_t threads = 1;
  bool strict = false;
};

int cmd_eval(const EvalArgs& a, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  std::string source;
  PipelineConfig cfg = resolve_config(a.config, &source);
  if (!a.data.empty()) cfg.data_root = a.data;
  if (cfg.data_root.empty()) throw std::invalid_argument("--data (or data_root in the config) is required");
  if (a.partition != "test" && a.partition != "train")
    throw std::invalid_argument("--partition must be test or train");
  if (a.batch_size < 1) throw std::invalid_argument("--batch-size must be >= 1");
  require_file(a.model, "model");
  require_dir(cfg.data_root.string(), "dataset root");
  // Without a manifest there is no way to know which files the model never saw.
  require_file(a.manifest, "split manifest (refusing to evaluate without one)");
  require_writable_parent(a.confusion_out);
  require_writable_parent(a.metrics_out);
  log_invocation(err, sub);
  log_config(err, cfg, source);

  auto ckpt = nn::load_checkpoint<float>(a.model);
  std::vector<std::string> classes = ckpt.class_names;
  if (classes.empty()) classes = scan_dataset(cfg.data_root).classes;
  if (classes.size() != ckpt.network.num_classes())
    throw DataError("model has " + std::to_string(ckpt.network.num_classes()) + " classes but " +
                    std::to_string(classes.size()) + " class names are known");
  const PreprocessConfig pre = model_preprocess(cfg.preprocess, ckpt.network.architecture());
  const SplitDataset s = read_split_manifest(a.manifest, classes);
  const auto& items = a.partition == "test" ? s.test : s.train;
  if (items.empty()) throw DataError("manifest has no '" + a.partition + "' items");

  const FileSampleSource src(cfg.data_root, items, pre);
  const nn::EvalResult r = nn::evaluate(ckpt.network, src, a.batch_size, a.threads, a.strict);
  for (const auto& msg : r.skipped) err << "# skipped: " << msg << '\n';
  if (r.confusion.total() == 0) throw DataError("no readable images in the '" + a.partition + "' partition");

  const auto p = precision(r.confusion);
  const auto rc = recall(r.confusion);
  const auto mp = macro_average(p);
  const auto mr = macro_average(rc);
  out << "samples: " << r.confusion.total() << '\n';
  out << "loss: " << fixed6(r.loss) << '\n';
  out << "accuracy: " << fixed6(accuracy(r.confusion)) << '\n';
  out << "macro_precision: " << (mp ? fixed6(*mp) : std::string("undefined")) << '\n';
  out << "macro_recall: " << (mr ? fixed6(*mr) : std::string("undefined")) << '\n';
  export_confusion(r.confusion, classes, a.confusion_out);
  export_class_metrics(r.confusion, classes, a.metrics_out);
  out << "confusion: " << a.confusion_out << '\n' << "class_metrics: " << a.metrics_out << '\n';
  return kOk;
}

struct PredictArgs {
  std::string model;
  std::string image;
  std::string config;
};

int cmd_predict(const PredictArgs& a, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  std::string source;
  const PipelineConfig cfg = resolve_config(a.config, &source);
  require_file(a.model, "model");
  require_file(a.image, "input image");
  log_invocation(err, sub);
  log_config(err, cfg, source);

  auto ckpt = nn::load_checkpoint<float>(a.model);
  const PreprocessConfig pre = model_preprocess(cfg.preprocess, ckpt.network.architecture());
  const ImageBuffer img = prepare_image(load_image(a.image), pre);
  const std::vector<double> chw = to_chw(normalize(img, pre.normalization));
  const nn::Tensor<float> x(ckpt.network.input_shape(), std::vector<float>(chw.begin(), chw.end()));
  const auto pred = ckpt.network.predict(x);
  const std::string name =
      pred.label < ckpt.class_names.size() ? ckpt.class_names[pred.label] : "class_" + std::to_string(pred.label);
  out << name << ' ' << fixed6(pred.probabilities[pred.label]) << '\n';
  return kOk;
}

/// Makes help show a default for every option: "none" for unset values and
/// "off" for flags, which CLI11 would otherwise print bare.
void fill_help_defaults(CLI::App& app) {
  for (CLI::App* sub : app.get_subcommands({})) {
    for (CLI::Option* opt : sub->get_options({})) {
      const auto& longs = opt->get_lnames();
      if (std::find(longs.begin(), longs.end(), "help") != longs.end() ||
          std::find(longs.begin(), longs.end(), "help-all") != longs.end())
        continue;
      if (opt->get_items_expected_max() == 0)
        opt->default_str("off");
      else if (opt->get_default_str().empty() && !opt->get_required())
        opt->default_str("none");
    }
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Leaf image pipeline: preprocessing, segmentation, edges, augmentation, CNN training"};
  app.name(args.empty() ? "leafpipe" : fs::path(args[0]).filename().string());
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  PreprocessArgs pa;
  auto* pre = app.add_subcommand("preprocess", "Resize, blur and optionally gray/Otsu/Canny one image or a tree");
  pre->add_option("--input", pa.input, "Input image or directory")->required();
  pre->add_option("--output", pa.output, "Output image or directory")->required();
  pre->add_option("--config", pa.config, "Pipeline config file (default: $LEAFPIPE_CONFIG)");
  pre->add_option("--threads", pa.threads, "Worker threads for directory input")->check(CLI::PositiveNumber);
  pa.flags.attach(pre);

  SegmentArgs sa;
  auto* seg = app.add_subcommand("segment", "Otsu threshold: binary image plus a report");
  seg->add_option("--input", sa.input, "Input image")->required();
  seg->add_option("--output", sa.output, "Binary P5 output")->required();
  seg->add_option("--report", sa.report, "Report file (default: standard output)");

  EdgesArgs ea;
  auto* edg = app.add_subcommand("edges", "Canny edge map as a P5 image");
  edg->add_option("--input", ea.input, "Input image")->required();
  edg->add_option("--output", ea.output, "Edge map P5 output")->required();
  edg->add_option("--sigma", ea.params.sigma, "Gaussian sigma");
  edg->add_option("--low", ea.params.low, "Low threshold, fraction of the peak magnitude");
  edg->add_option("--high", ea.params.high, "High threshold, fraction of the peak magnitude");

  AugmentArgs aa;
  auto* aug = app.add_subcommand("augment", "Write augmented copies of every image in a directory tree");
  aug->add_option("--input", aa.input, "Input directory")->required();
  aug->add_option("--output", aa.output, "Output directory (created)")->required();
  aug->add_option("--config", aa.config, "Pipeline config file (default: $LEAFPIPE_CONFIG)");
  aug->add_option("--count", aa.count, "Augmented copies per image")->check(CLI::PositiveNumber);
  aug->add_option("--threads", aa.threads, "Worker threads")->check(CLI::PositiveNumber);
  aa.opts["seed"] = aug->add_option("--seed", aa.seed, "Random seed");
  aa.opts["mode"] = aug->add_option("--mode", aa.mode, "joint or one_per_copy")
                        ->check(CLI::IsMember({"joint", "one_per_copy"}));
  aa.opts["scale-min"] = aug->add_option("--scale-min", aa.aug.scale_range[0], "Smallest zoom factor");
  aa.opts["scale-max"] = aug->add_option("--scale-max", aa.aug.scale_range[1], "Largest zoom factor");
  aa.opts["rotation-deg"] = aug->add_option("--rotation-deg", aa.aug.rotation_deg, "Max rotation in degrees");
  aa.opts["noise-factor"] = aug->add_option("--noise-factor", aa.aug.noise_factor, "Noise std multiplier on 0.05");
  aa.opts["gamma-min"] = aug->add_option("--gamma-min", aa.aug.gamma_range[0], "Smallest gamma");
  aa.opts["gamma-max"] = aug->add_option("--gamma-max", aa.aug.gamma_range[1], "Largest gamma");
  aa.opts["pca-alpha-std"] = aug->add_option("--pca-alpha-std", aa.aug.pca_alpha_std, "PCA colour alpha std");
  aa.opts["p-scale"] = aug->add_option("--p-scale", aa.aug.p_scale, "Probability of scaling");
  aa.opts["p-rotate"] = aug->add_option("--p-rotate", aa.aug.p_rotate, "Probability of rotation");
  aa.opts["p-flip"] = aug->add_option("--p-flip", aa.aug.p_flip, "Probability of a vertical flip");
  aa.opts["p-gamma"] = aug->add_option("--p-gamma", aa.aug.p_gamma, "Probability of gamma correction");
  aa.opts["p-pca"] = aug->add_option("--p-pca", aa.aug.p_pca, "Probability of PCA colour shift");
  aa.opts["p-noise"] = aug->add_option("--p-noise", aa.aug.p_noise, "Probability of Gaussian noise");

  SplitArgs spa;
  auto* spl = app.add_subcommand("split", "Write a train/test split manifest for a dataset");
  spl->add_option("--data", spa.data, "Dataset root (<root>/<class>/<images>)");
  spl->add_option("--output", spa.output, "Manifest CSV path")->required();
  spl->add_option("--config", spa.config, "Pipeline config file (default: $LEAFPIPE_CONFIG)");
  spa.ratio_opt = spl->add_option("--ratio", spa.ratio, "Training fraction");
  spa.seed_opt = spl->add_option("--seed", spa.seed, "Random seed");
  spa.plain_opt = spl->add_flag("--no-stratify", spa.plain, "Shuffle the whole set instead of per class");

  TrainArgs ta;
  auto* trn = app.add_subcommand("train", "Split, train the CNN, write checkpoint and history");
  trn->add_option("--data", ta.data, "Dataset root (<root>/<class>/<images>)");
  trn->add_option("--config", ta.config, "Pipeline config file (default: $LEAFPIPE_CONFIG)");
  trn->add_option("--out", ta.output, "Checkpoint path");
  trn->add_option("--history", ta.history, "History CSV (default: <out>.history.csv)");
  trn->add_option("--split-manifest", ta.manifest, "Split manifest (default: <out>.split.csv)");
  ta.epochs_opt = trn->add_option("--epochs", ta.epochs, "Epochs")->check(CLI::PositiveNumber);
  ta.seed_opt = trn->add_option("--seed", ta.seed, "Random seed");
  ta.threads_opt = trn->add_option("--threads", ta.threads, "Worker threads for image loading")
                       ->check(CLI::PositiveNumber);
  ta.flags.attach(trn);

  EvalArgs eva;
  auto* evl = app.add_subcommand("eval", "Evaluate a checkpoint on a manifest partition");
  evl->add_option("--model", eva.model, "Checkpoint path")->required();
  evl->add_option("--data", eva.data, "Dataset root");
  evl->add_option("--split-manifest", eva.manifest, "Split manifest written by train/split")->required();
  evl->add_option("--config", eva.config, "Pipeline config file (default: $LEAFPIPE_CONFIG)");
  evl->add_option("--partition", eva.partition, "test or train")->check(CLI::IsMember({"test", "train"}));
  evl->add_option("--confusion", eva.confusion_out, "Confusion matrix CSV");
  evl->add_option("--class-metrics", eva.metrics_out, "Per-class precision/recall CSV");
  evl->add_option("--batch-size", eva.batch_size, "Inference batch size")->check(CLI::PositiveNumber);
  evl->add_option("--threads", eva.threads, "Worker threads for image loading")->check(CLI::PositiveNumber);
  evl->add_flag("--strict", eva.strict, "Abort on unreadable images instead of skipping them");

  PredictArgs pra;
  auto* prd = app.add_subcommand("predict", "Classify one image");
  prd->add_option("--model", pra.model, "Checkpoint path")->required();
  prd->add_option("--image", pra.image, "Input image")->required();
  prd->add_option("--config", pra.config, "Pipeline config file (default: $LEAFPIPE_CONFIG)");

  fill_help_defaults(app);

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  for (const auto& s : args) argv.push_back(s.c_str());
  if (argv.empty()) argv.push_back("leafpipe");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (pre->parsed()) return cmd_preprocess(pa, *pre, out, err);
    if (seg->parsed()) return cmd_segment(sa, *seg, out, err);
    if (edg->parsed()) return cmd_edges(ea, *edg, out, err);
    if (aug->parsed()) return cmd_augment(aa, *aug, out, err);
    if (spl->parsed()) return cmd_split(spa, *spl, out, err);
    if (trn->parsed()) return cmd_train(ta, *trn, out, err);
    if (evl->parsed()) return cmd_eval(eva, *evl, out, err);
    if (prd->parsed()) return cmd_predict(pra, *prd, out, err);
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  }
  err << "no subcommand given\n";
  return kUsage;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace leafpipe::cli
