#include "leafpipe/nn/network.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "leafpipe/error.hpp"
#include "leafpipe/rng.hpp"

namespace leafpipe::nn {

Architecture Architecture::default_for(std::size_t channels, std::size_t height, std::size_t width,
                                       std::size_t num_classes) {
  Architecture a;
  a.input = {channels, height, width};
  a.num_classes = num_classes;
  a.layers = {LayerSpec::conv(32, 3, 1, 1),  LayerSpec::relu(), LayerSpec::maxpool(2),
              LayerSpec::conv(64, 3, 1, 1),  LayerSpec::relu(), LayerSpec::maxpool(2),
              LayerSpec::conv(128, 3, 1, 1), LayerSpec::relu(), LayerSpec::maxpool(2),
              LayerSpec::flatten(),          LayerSpec::dense(128), LayerSpec::relu(),
              LayerSpec::dense(static_cast<std::uint32_t>(num_classes))};
  return a;
}

namespace {

std::uint32_t parse_u32(const std::string& s, std::size_t num_classes) {
  if (s == "K") return static_cast<std::uint32_t>(num_classes);
  std::size_t used = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw std::invalid_argument("bad layer parameter '" + s + "'");
  return static_cast<std::uint32_t>(v);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

}  // namespace

std::vector<LayerSpec> Architecture::parse_layers(const std::string& text, std::size_t num_classes) {
  std::vector<LayerSpec> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    std::vector<std::string> parts;
    std::stringstream is(item);
    std::string p;
    while (std::getline(is, p, ':')) parts.push_back(trim(p));
    std::vector<std::uint32_t> args;
    for (std::size_t i = 1; i < parts.size(); ++i) args.push_back(parse_u32(parts[i], num_classes));
    const std::string& kind = parts[0];
    if (kind == "conv") {
      if (args.size() < 2 || args.size() > 4)
        throw std::invalid_argument("conv takes out:k[:stride[:pad]]");
      out.push_back(LayerSpec::conv(args[0], args[1], args.size() > 2 ? args[2] : 1,
                                    args.size() > 3 ? args[3] : 0));
    } else if (kind == "maxpool") {
      if (args.empty() || args.size() > 2) throw std::invalid_argument("maxpool takes window[:stride]");
      out.push_back(LayerSpec::maxpool(args[0], args.size() > 1 ? args[1] : 0));
    } else if (kind == "dense") {
      if (args.size() != 1) throw std::invalid_argument("dense takes out");
      out.push_back(LayerSpec::dense(args[0]));
    } else if (kind == "relu" && args.empty()) {
      out.push_back(LayerSpec::relu());
    } else if (kind == "flatten" && args.empty()) {
      out.push_back(LayerSpec::flatten());
    } else {
      throw std::invalid_argument("unknown layer '" + item + "'");
    }
  }
  return out;
}

std::string Architecture::format_layers(const std::vector<LayerSpec>& layers) {
  std::string s;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (i) s += ",";
    s += layers[i].to_string();
  }
  return s;
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
  if (logits.rank() != 2) throw std::invalid_argument("softmax expects [B, K]");
  const std::size_t batch = logits.dim(0);
  const std::size_t k = logits.dim(1);
  Tensor<T> p(logits.shape());
  for (std::size_t b = 0; b < batch; ++b) {
    const T* row = logits.data() + b * k;
    T* out = p.data() + b * k;
    const T peak = *std::max_element(row, row + k);
    T sum = 0;
    for (std::size_t j = 0; j < k; ++j) {
      out[j] = std::exp(row[j] - peak);
      sum += out[j];
    }
    for (std::size_t j = 0; j < k; ++j) out[j] /= sum;
  }
  return p;
}

template <typename T>
std::size_t argmax(std::span<const T> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

template <typename T>
Network<T>::Network(Architecture arch, std::uint64_t seed) : arch_(std::move(arch)) {
  build();
  Rng rng(seed);
  std::size_t parametric = 0;
  for (const auto& l : layers_) parametric += !l->parameters().empty();
  std::size_t seen = 0;
  for (auto& l : layers_) {
    auto params = l->parameters();
    if (params.empty()) continue;
    ++seen;
    Parameter<T>& w = *params[0];
    const std::size_t fan_in = w.value.size() / w.value.dim(0);
    const bool output_layer = seen == parametric;
    const double stddev = output_layer ? 0.1 * std::sqrt(1.0 / static_cast<double>(fan_in))
                                       : std::sqrt(2.0 / static_cast<double>(fan_in));
    for (T& v : w.value.values()) v = static_cast<T>(stddev * rng.normal());
    params[1]->value.fill(T{0});
  }
}

template <typename T>
void Network<T>::build() {
  if (arch_.num_classes < 1) throw std::invalid_argument("network needs at least one class");
  if (arch_.layers.empty()) throw std::invalid_argument("network needs at least one layer");
  if (arch_.layers.back().kind != LayerKind::dense || arch_.layers.back().out != arch_.num_classes)
    throw std::invalid_argument("last layer must be dense with num_classes outputs");
  layers_.clear();
  std::vector<std::size_t> shape{arch_.input[0], arch_.input[1], arch_.input[2]};
  for (const auto& spec : arch_.layers) {
    layers_.push_back(make_layer<T>(spec, shape));
    shape = layers_.back()->output_shape();
  }
  layers_.front()->set_needs_input_grad(false);
}

template <typename T>
Network<T>::Network(const Network& other) : arch_(other.arch_) {
  build();
  auto dst = parameters();
  auto src = other.parameters();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i]->value = src[i]->value;
}

template <typename T>
Network<T>& Network<T>::operator=(const Network& other) {
  if (this != &other) {
    Network copy(other);
    *this = std::move(copy);
  }
  return *this;
}

template <typename T>
Tensor<T> Network<T>::logits(const Tensor<T>& x) {
  Tensor<T> h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i]->forward(h);
    if (!h.all_finite())
      throw NumericError("non-finite activation in layer " + std::to_string(i) + " (" +
                         layers_[i]->spec().to_string() + ")");
  }
  has_forward_ = true;
  return h;
}

template <typename T>
Tensor<T> Network<T>::forward(const Tensor<T>& x) {
  return softmax(logits(x));
}

template <typename T>
void Network<T>::backward(const Tensor<T>& dlogits) {
  if (!has_forward_) throw std::logic_error("backward called before forward");
  Tensor<T> g = dlogits;
  for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(g);
}

template <typename T>
std::vector<Parameter<T>*> Network<T>::parameters() {
  std::vector<Parameter<T>*> out;
  for (auto& l : layers_)
    for (auto* p : l->parameters()) out.push_back(p);
  return out;
}

template <typename T>
std::vector<const Parameter<T>*> Network<T>::parameters() const {
  std::vector<const Parameter<T>*> out;
  for (const auto& l : layers_)
    for (const auto* p : static_cast<const Layer<T>&>(*l).parameters()) out.push_back(p);
  return out;
}

template <typename T>
std::size_t Network<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += p->value.size();
  return n;
}

template <typename T>
Prediction<T> Network<T>::predict(const Tensor<T>& sample) {
  if (sample.shape() != input_shape())
    throw std::invalid_argument("predict: sample shape " + shape_string(sample.shape()) +
                                " does not match network input " + shape_string(input_shape()));
  Tensor<T> batch = sample;
  std::vector<std::size_t> shape{1};
  shape.insert(shape.end(), sample.shape().begin(), sample.shape().end());
  batch.reshape(shape);
  const Tensor<T> p = forward(batch);
  Prediction<T> out;
  out.probabilities.assign(p.values().begin(), p.values().end());
  out.label = argmax<T>(out.probabilities);
  return out;
}

template Tensor<float> softmax<float>(const Tensor<float>&);
template Tensor<double> softmax<double>(const Tensor<double>&);
template std::size_t argmax<float>(std::span<const float>);
template std::size_t argmax<double>(std::span<const double>);
template class Network<float>;
template class Network<double>;

}  // namespace leafpipe::nn
