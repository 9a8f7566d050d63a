#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "leafpipe/nn/layers.hpp"
#include "leafpipe/nn/tensor.hpp"

namespace leafpipe::nn {

/// Input geometry, class count and layer stack. The last layer must be a
/// dense layer with out == num_classes.
struct Architecture {
  std::array<std::size_t, 3> input{3, 256, 256};  ///< [C, H, W]
  std::size_t num_classes = 2;
  std::vector<LayerSpec> layers;

  /// conv(32)+relu+pool, conv(64)+relu+pool, conv(128)+relu+pool (3x3, pad 1,
  /// 2x2 pools), flatten, dense(128)+relu, dense(K).
  static Architecture default_for(std::size_t channels, std::size_t height, std::size_t width,
                                  std::size_t num_classes);

  /// Comma-separated layer list, e.g. "conv:32:3:1:1,relu,maxpool:2,flatten,dense:K".
  /// "K" stands for num_classes. Throws std::invalid_argument on syntax errors.
  static std::vector<LayerSpec> parse_layers(const std::string& text, std::size_t num_classes);
  static std::string format_layers(const std::vector<LayerSpec>& layers);

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

template <typename T>
struct Prediction {
  std::size_t label = 0;
  std::vector<T> probabilities;
};

/// Row-wise softmax of [B, K] logits with max subtraction.
template <typename T>
Tensor<T> softmax(const Tensor<T>& logits);

/// Lowest index among the maxima.
template <typename T>
std::size_t argmax(std::span<const T> v);

template <typename T>
class Network {
public:
  /// Builds the stack and draws He-scaled normal weights (std sqrt(2 / fan_in))
  /// from the seeded generator; the output layer uses a 0.1 x Xavier scale so
  /// initial predictions sit near uniform. Biases start at zero.
  Network(Architecture arch, std::uint64_t seed);

  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  const Architecture& architecture() const { return arch_; }
  std::size_t num_classes() const { return arch_.num_classes; }
  std::vector<std::size_t> input_shape() const {
    return {arch_.input[0], arch_.input[1], arch_.input[2]};
  }
  std::size_t layer_count() const { return layers_.size(); }
  Layer<T>& layer(std::size_t i) { return *layers_[i]; }
  const Layer<T>& layer(std::size_t i) const { return *layers_[i]; }

  /// [B, C, H, W] -> [B, K] raw scores. Throws NumericError naming the layer
  /// that produced a non-finite value.
  Tensor<T> logits(const Tensor<T>& x);
  /// Class probabilities, each row summing to 1.
  Tensor<T> forward(const Tensor<T>& x);
  /// Backpropagates dL/dlogits; fills every parameter's grad.
  void backward(const Tensor<T>& dlogits);

  std::vector<Parameter<T>*> parameters();
  std::vector<const Parameter<T>*> parameters() const;
  std::size_t parameter_count() const;

  /// Single [C, H, W] sample.
  Prediction<T> predict(const Tensor<T>& sample);

private:
  void build();

  Architecture arch_;
  std::vector<std::unique_ptr<Layer<T>>> layers_;
  bool has_forward_ = false;
};

}  // namespace leafpipe::nn
