#include "leafpipe/nn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace leafpipe::nn {

template <typename T>
LossResult<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const std::size_t> labels) {
  if (logits.rank() != 2) throw std::invalid_argument("loss expects [B, K] logits");
  const std::size_t batch = logits.dim(0);
  const std::size_t k = logits.dim(1);
  if (labels.size() != batch) throw std::invalid_argument("label count does not match batch size");

  LossResult<T> r;
  r.probabilities = Tensor<T>(logits.shape());
  r.dlogits = Tensor<T>(logits.shape());
  double total = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    if (labels[b] >= k)
      throw std::invalid_argument("label " + std::to_string(labels[b]) + " out of range");
    const T* row = logits.data() + b * k;
    const double peak = static_cast<double>(*std::max_element(row, row + k));
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) sum += std::exp(static_cast<double>(row[j]) - peak);
    const double log_z = peak + std::log(sum);
    total += log_z - static_cast<double>(row[labels[b]]);
    for (std::size_t j = 0; j < k; ++j) {
      const double p = std::exp(static_cast<double>(row[j]) - log_z);
      r.probabilities[b * k + j] = static_cast<T>(p);
      const double onehot = j == labels[b] ? 1.0 : 0.0;
      r.dlogits[b * k + j] = static_cast<T>((p - onehot) / static_cast<double>(batch));
    }
  }
  r.loss = total / static_cast<double>(batch);
  return r;
}

template LossResult<float> softmax_cross_entropy<float>(const Tensor<float>&, std::span<const std::size_t>);
template LossResult<double> softmax_cross_entropy<double>(const Tensor<double>&, std::span<const std::size_t>);

}  // namespace leafpipe::nn
