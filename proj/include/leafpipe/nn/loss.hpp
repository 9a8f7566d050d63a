#pragma once

#include <cstddef>
#include <span>

#include "leafpipe/nn/tensor.hpp"

namespace leafpipe::nn {

template <typename T>
struct LossResult {
  double loss = 0.0;         ///< mean over the batch of -log p[label]
  Tensor<T> dlogits;         ///< (p - onehot) / B
  Tensor<T> probabilities;   ///< softmax rows
};

/// Softmax cross-entropy on [B, K] logits, computed through log-sum-exp.
/// Throws std::invalid_argument on a label outside [0, K) or a length mismatch.
template <typename T>
LossResult<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const std::size_t> labels);

}  // namespace leafpipe::nn
