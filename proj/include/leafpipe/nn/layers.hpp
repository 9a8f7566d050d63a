#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "leafpipe/nn/tensor.hpp"
#include "leafpipe/rng.hpp"

namespace leafpipe::nn {

enum class LayerKind : std::uint8_t { conv = 1, maxpool = 2, dense = 3, relu = 4, flatten = 5 };

std::string kind_name(LayerKind kind);

/// Declarative layer description; the same record is used by the config
/// parser and the checkpoint layer table.
struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  std::uint32_t out = 0;     ///< conv: output channels; dense: output units
  std::uint32_t kernel = 0;  ///< conv: k (square); maxpool: window
  std::uint32_t stride = 0;  ///< conv / maxpool
  std::uint32_t pad = 0;     ///< conv: zero padding on each side

  static LayerSpec conv(std::uint32_t out, std::uint32_t k, std::uint32_t stride = 1,
                        std::uint32_t pad = 0) {
    return {LayerKind::conv, out, k, stride, pad};
  }
  static LayerSpec maxpool(std::uint32_t window, std::uint32_t stride = 0) {
    return {LayerKind::maxpool, 0, window, stride ? stride : window, 0};
  }
  static LayerSpec dense(std::uint32_t out) { return {LayerKind::dense, out, 0, 0, 0}; }
  static LayerSpec relu() { return {LayerKind::relu, 0, 0, 0, 0}; }
  static LayerSpec flatten() { return {LayerKind::flatten, 0, 0, 0, 0}; }

  std::string to_string() const;
  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Trainable tensor with its gradient.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
};

/// Batched layer. Shapes carry the batch as the leading dimension; per-sample
/// shapes exclude it. forward() caches what backward() needs; backward()
/// overwrites parameter gradients with the batch sum and returns dL/dx.
template <typename T>
class Layer {
public:
  virtual ~Layer() = default;
  virtual LayerSpec spec() const = 0;
  virtual std::vector<std::size_t> output_shape() const = 0;
  virtual Tensor<T> forward(const Tensor<T>& x) = 0;
  virtual Tensor<T> backward(const Tensor<T>& dy) = 0;
  virtual std::vector<Parameter<T>*> parameters() { return {}; }
  virtual std::vector<const Parameter<T>*> parameters() const { return {}; }

  const std::vector<std::size_t>& input_shape() const { return input_shape_; }
  /// The first layer of a network never needs dL/dx.
  void set_needs_input_grad(bool v) { needs_input_grad_ = v; }

protected:
  explicit Layer(std::vector<std::size_t> input_shape) : input_shape_(std::move(input_shape)) {}
  void check_input(const Tensor<T>& x) const;

  std::vector<std::size_t> input_shape_;
  bool needs_input_grad_ = true;
  bool has_forward_ = false;
};

/// k x k convolution (correlation) over [C, H, W] with zero padding.
/// Output spatial size floor((H + 2p - k) / s) + 1.
template <typename T>
class Conv2D final : public Layer<T> {
public:
  Conv2D(std::vector<std::size_t> input_shape, const LayerSpec& spec);
  LayerSpec spec() const override { return spec_; }
  std::vector<std::size_t> output_shape() const override;
  Tensor<T> forward(const Tensor<T>& x) override;
  Tensor<T> backward(const Tensor<T>& dy) override;
  std::vector<Parameter<T>*> parameters() override { return {&weight_, &bias_}; }
  std::vector<const Parameter<T>*> parameters() const override { return {&weight_, &bias_}; }

private:
  void im2col(const T* x, T* col) const;
  void col2im(const T* col, T* dx) const;

  LayerSpec spec_;
  std::size_t in_c_, in_h_, in_w_, out_h_, out_w_;
  Parameter<T> weight_;  // [out, in, k, k]
  Parameter<T> bias_;    // [out]
  std::vector<T> cols_;  // cached im2col per sample
  std::size_t batch_ = 0;
};

template <typename T>
class MaxPool2D final : public Layer<T> {
public:
  MaxPool2D(std::vector<std::size_t> input_shape, const LayerSpec& spec);
  LayerSpec spec() const override { return spec_; }
  std::vector<std::size_t> output_shape() const override;
  Tensor<T> forward(const Tensor<T>& x) override;
  Tensor<T> backward(const Tensor<T>& dy) override;

private:
  LayerSpec spec_;
  std::size_t c_, h_, w_, out_h_, out_w_;
  std::vector<std::size_t> argmax_;
  std::size_t batch_ = 0;
};

/// y = W x + b with W stored [out, in]. Accepts any input rank; each sample is
/// read as a flat vector.
template <typename T>
class Dense final : public Layer<T> {
public:
  Dense(std::vector<std::size_t> input_shape, const LayerSpec& spec);
  LayerSpec spec() const override { return spec_; }
  std::vector<std::size_t> output_shape() const override { return {spec_.out}; }
  Tensor<T> forward(const Tensor<T>& x) override;
  Tensor<T> backward(const Tensor<T>& dy) override;
  std::vector<Parameter<T>*> parameters() override { return {&weight_, &bias_}; }
  std::vector<const Parameter<T>*> parameters() const override { return {&weight_, &bias_}; }

private:
  LayerSpec spec_;
  std::size_t in_;
  Parameter<T> weight_;
  Parameter<T> bias_;
  Tensor<T> x_;
};

template <typename T>
class ReLU final : public Layer<T> {
public:
  explicit ReLU(std::vector<std::size_t> input_shape) : Layer<T>(std::move(input_shape)) {}
  LayerSpec spec() const override { return LayerSpec::relu(); }
  std::vector<std::size_t> output_shape() const override { return this->input_shape_; }
  Tensor<T> forward(const Tensor<T>& x) override;
  Tensor<T> backward(const Tensor<T>& dy) override;

private:
  Tensor<T> x_;
};

template <typename T>
class Flatten final : public Layer<T> {
public:
  explicit Flatten(std::vector<std::size_t> input_shape) : Layer<T>(std::move(input_shape)) {}
  LayerSpec spec() const override { return LayerSpec::flatten(); }
  std::vector<std::size_t> output_shape() const override {
    return {shape_product(this->input_shape_)};
  }
  Tensor<T> forward(const Tensor<T>& x) override;
  Tensor<T> backward(const Tensor<T>& dy) override;

private:
  std::size_t batch_ = 0;
};

/// Builds a layer for the given per-sample input shape; throws
/// std::invalid_argument when the spec does not fit the shape.
template <typename T>
std::unique_ptr<Layer<T>> make_layer(const LayerSpec& spec, const std::vector<std::size_t>& input_shape);

}  // namespace leafpipe::nn
