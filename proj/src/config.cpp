#include "leafpipe/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "leafpipe/error.hpp"
#include "leafpipe/nn/network.hpp"

namespace leafpipe {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& v) {
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw std::invalid_argument("expected a number, got '" + v + "'");
  return d;
}

std::uint64_t to_u64(const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw std::invalid_argument("expected a non-negative integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "off" || v == "no" || v == "0") return false;
  throw std::invalid_argument("expected a boolean, got '" + v + "'");
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string boolstr(bool b) { return b ? "true" : "false"; }

Border to_border(const std::string& v) {
  if (v == "reflect") return Border::reflect;
  if (v == "clamp") return Border::clamp;
  if (v == "zero") return Border::zero;
  throw std::invalid_argument("border must be reflect|clamp|zero");
}

std::string border_name(Border b) {
  switch (b) {
    case Border::reflect: return "reflect";
    case Border::clamp: return "clamp";
    case Border::zero: return "zero";
  }
  return "reflect";
}

using Setter = std::function<void(PipelineConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"data_root", [](PipelineConfig& c, const std::string& v) { c.data_root = v; }},
      {"seed", [](PipelineConfig& c, const std::string& v) { c.seed = to_u64(v); }},
      {"threads", [](PipelineConfig& c, const std::string& v) { c.threads = to_u64(v); }},
      {"image_size", [](PipelineConfig& c, const std::string& v) { c.preprocess.image_size = to_u64(v); }},
      {"channels",
       [](PipelineConfig& c, const std::string& v) {
         if (v == "rgb") c.preprocess.channels = ChannelMode::rgb;
         else if (v == "gray") c.preprocess.channels = ChannelMode::gray;
         else throw std::invalid_argument("channels must be rgb|gray");
       }},
      {"blur_sigma", [](PipelineConfig& c, const std::string& v) { c.preprocess.blur_sigma = to_double(v); }},
      {"blur_size", [](PipelineConfig& c, const std::string& v) { c.preprocess.blur_size = to_u64(v); }},
      {"border", [](PipelineConfig& c, const std::string& v) { c.preprocess.border = to_border(v); }},
      {"normalization",
       [](PipelineConfig& c, const std::string& v) {
         if (v == "zero_mean_unit_var") c.preprocess.normalization = NormalizeMode::zero_mean_unit_var;
         else if (v == "unit_range") c.preprocess.normalization = NormalizeMode::unit_range;
         else throw std::invalid_argument("normalization must be zero_mean_unit_var|unit_range");
       }},
      {"otsu_stage", [](PipelineConfig& c, const std::string& v) { c.preprocess.otsu_stage = to_bool(v); }},
      {"canny_stage", [](PipelineConfig& c, const std::string& v) { c.preprocess.canny_stage = to_bool(v); }},
      {"canny_sigma", [](PipelineConfig& c, const std::string& v) { c.preprocess.canny.sigma = to_double(v); }},
      {"canny_low", [](PipelineConfig& c, const std::string& v) { c.preprocess.canny.low = to_double(v); }},
      {"canny_high", [](PipelineConfig& c, const std::string& v) { c.preprocess.canny.high = to_double(v); }},
      {"split_ratio", [](PipelineConfig& c, const std::string& v) { c.split_ratio = to_double(v); }},
      {"stratified", [](PipelineConfig& c, const std::string& v) { c.stratified = to_bool(v); }},
      {"strict_files", [](PipelineConfig& c, const std::string& v) { c.strict_files = to_bool(v); }},
      {"augment", [](PipelineConfig& c, const std::string& v) { c.augment_enabled = to_bool(v); }},
      {"augment_mode",
       [](PipelineConfig& c, const std::string& v) {
         if (v == "joint") c.augment.one_per_copy = false;
         else if (v == "one_per_copy") c.augment.one_per_copy = true;
         else throw std::invalid_argument("augment_mode must be joint|one_per_copy");
       }},
      {"scale_min", [](PipelineConfig& c, const std::string& v) { c.augment.scale_range[0] = to_double(v); }},
      {"scale_max", [](PipelineConfig& c, const std::string& v) { c.augment.scale_range[1] = to_double(v); }},
      {"rotation_deg", [](PipelineConfig& c, const std::string& v) { c.augment.rotation_deg = to_double(v); }},
      {"noise_factor", [](PipelineConfig& c, const std::string& v) { c.augment.noise_factor = to_double(v); }},
      {"flip", [](PipelineConfig& c, const std::string& v) { c.augment.flip = to_bool(v); }},
      {"gamma_min", [](PipelineConfig& c, const std::string& v) { c.augment.gamma_range[0] = to_double(v); }},
      {"gamma_max", [](PipelineConfig& c, const std::string& v) { c.augment.gamma_range[1] = to_double(v); }},
      {"pca_alpha_std", [](PipelineConfig& c, const std::string& v) { c.augment.pca_alpha_std = to_double(v); }},
      {"p_scale", [](PipelineConfig& c, const std::string& v) { c.augment.p_scale = to_double(v); }},
      {"p_rotate", [](PipelineConfig& c, const std::string& v) { c.augment.p_rotate = to_double(v); }},
      {"p_flip", [](PipelineConfig& c, const std::string& v) { c.augment.p_flip = to_double(v); }},
      {"p_gamma", [](PipelineConfig& c, const std::string& v) { c.augment.p_gamma = to_double(v); }},
      {"p_pca", [](PipelineConfig& c, const std::string& v) { c.augment.p_pca = to_double(v); }},
      {"p_noise", [](PipelineConfig& c, const std::string& v) { c.augment.p_noise = to_double(v); }},
      {"epochs", [](PipelineConfig& c, const std::string& v) { c.train.epochs = to_u64(v); }},
      {"batch_size", [](PipelineConfig& c, const std::string& v) { c.train.batch_size = to_u64(v); }},
      {"learning_rate", [](PipelineConfig& c, const std::string& v) { c.train.learning_rate = to_double(v); }},
      {"momentum", [](PipelineConfig& c, const std::string& v) { c.train.momentum = to_double(v); }},
      {"weight_init", [](PipelineConfig& c, const std::string& v) { c.train.weight_init = v; }},
      {"float_width",
       [](PipelineConfig& c, const std::string& v) {
         if (v == "32") c.train.float_width = nn::FloatWidth::f32;
         else if (v == "64") c.train.float_width = nn::FloatWidth::f64;
         else throw std::invalid_argument("float_width must be 32|64");
       }},
      {"architecture", [](PipelineConfig& c, const std::string& v) { c.architecture = v; }},
  };
  return table;
}

}  // namespace

void PipelineConfig::propagate() {
  augment.seed = seed;
  train.seed = seed;
  train.threads = threads;
  train.strict = strict_files;
  train.augment = augment_enabled;
}

void PipelineConfig::validate() const {
  preprocess.validate();
  augment.validate();
  train.validate();
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw std::invalid_argument("split_ratio must lie in (0, 1)");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  if (!architecture.empty()) nn::Architecture::parse_layers(architecture, 2);
}

PipelineConfig parse_config(std::string_view text, PipelineConfig cfg) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end())
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    try {
      it->second(cfg, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + " (" + key + "): " + e.what());
    }
  }
  cfg.propagate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) throw DataError("config file not found: " + path.string());
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const PipelineConfig& c) {
  std::ostringstream os;
  os << "data_root = " << c.data_root.string() << '\n'
     << "seed = " << c.seed << '\n'
     << "threads = " << c.threads << '\n'
     << "image_size = " << c.preprocess.image_size << '\n'
     << "channels = " << (c.preprocess.channels == ChannelMode::rgb ? "rgb" : "gray") << '\n'
     << "blur_sigma = " << num(c.preprocess.blur_sigma) << '\n'
     << "blur_size = " << c.preprocess.blur_size << '\n'
     << "border = " << border_name(c.preprocess.border) << '\n'
     << "normalization = "
     << (c.preprocess.normalization == NormalizeMode::zero_mean_unit_var ? "zero_mean_unit_var" : "unit_range")
     << '\n'
     << "otsu_stage = " << boolstr(c.preprocess.otsu_stage) << '\n'
     << "canny_stage = " << boolstr(c.preprocess.canny_stage) << '\n'
     << "canny_sigma = " << num(c.preprocess.canny.sigma) << '\n'
     << "canny_low = " << num(c.preprocess.canny.low) << '\n'
     << "canny_high = " << num(c.preprocess.canny.high) << '\n'
     << "split_ratio = " << num(c.split_ratio) << '\n'
     << "stratified = " << boolstr(c.stratified) << '\n'
     << "strict_files = " << boolstr(c.strict_files) << '\n'
     << "augment = " << boolstr(c.augment_enabled) << '\n'
     << "augment_mode = " << (c.augment.one_per_copy ? "one_per_copy" : "joint") << '\n'
     << "scale_min = " << num(c.augment.scale_range[0]) << '\n'
     << "scale_max = " << num(c.augment.scale_range[1]) << '\n'
     << "rotation_deg = " << num(c.augment.rotation_deg) << '\n'
     << "noise_factor = " << num(c.augment.noise_factor) << '\n'
     << "flip = " << boolstr(c.augment.flip) << '\n'
     << "gamma_min = " << num(c.augment.gamma_range[0]) << '\n'
     << "gamma_max = " << num(c.augment.gamma_range[1]) << '\n'
     << "pca_alpha_std = " << num(c.augment.pca_alpha_std) << '\n'
     << "p_scale = " << num(c.augment.p_scale) << '\n'
     << "p_rotate = " << num(c.augment.p_rotate) << '\n'
     << "p_flip = " << num(c.augment.p_flip) << '\n'
     << "p_gamma = " << num(c.augment.p_gamma) << '\n'
     << "p_pca = " << num(c.augment.p_pca) << '\n'
     << "p_noise = " << num(c.augment.p_noise) << '\n'
     << "epochs = " << c.train.epochs << '\n'
     << "batch_size = " << c.train.batch_size << '\n'
     << "learning_rate = " << num(c.train.learning_rate) << '\n'
     << "momentum = " << num(c.train.momentum) << '\n'
     << "weight_init = " << c.train.weight_init << '\n'
     << "float_width = " << (c.train.float_width == nn::FloatWidth::f64 ? "64" : "32") << '\n'
     << "architecture = " << c.architecture << '\n';
  return os.str();
}

}  // namespace leafpipe
