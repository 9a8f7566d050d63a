#pragma once

#include <vector>

#include "leafpipe/nn/layers.hpp"

namespace leafpipe::nn {

/// Momentum SGD: v <- momentum * v - lr * g; w <- w + v.
template <typename T>
class Sgd {
public:
  /// Throws std::invalid_argument unless lr >= 0 and 0 <= momentum < 1.
  Sgd(double learning_rate, double momentum);

  /// Velocity buffers are created on the first call and must keep matching shapes.
  void step(const std::vector<Parameter<T>*>& params);

  double learning_rate() const { return lr_; }
  double momentum() const { return momentum_; }
  const std::vector<Tensor<T>>& velocity() const { return velocity_; }

private:
  double lr_;
  double momentum_;
  std::vector<Tensor<T>> velocity_;
};

}  // namespace leafpipe::nn
