#include "leafpipe/nn/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace leafpipe::nn {

template <typename T>
Sgd<T>::Sgd(double learning_rate, double momentum) : lr_(learning_rate), momentum_(momentum) {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw std::invalid_argument("learning rate must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must lie in [0, 1)");
}

template <typename T>
void Sgd<T>::step(const std::vector<Parameter<T>*>& params) {
  if (velocity_.empty()) {
    for (const auto* p : params) velocity_.emplace_back(p->value.shape());
  }
  if (velocity_.size() != params.size())
    throw std::invalid_argument("sgd: parameter list changed between steps");
  const T lr = static_cast<T>(lr_);
  const T mu = static_cast<T>(momentum_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter<T>& p = *params[i];
    Tensor<T>& v = velocity_[i];
    if (p.grad.shape() != p.value.shape() || v.shape() != p.value.shape())
      throw std::invalid_argument("sgd: gradient shape does not match parameter '" + p.name + "'");
    for (std::size_t j = 0; j < v.size(); ++j) {
      v[j] = mu * v[j] - lr * p.grad[j];
      p.value[j] += v[j];
    }
  }
}

template class Sgd<float>;
template class Sgd<double>;

}  // namespace leafpipe::nn
