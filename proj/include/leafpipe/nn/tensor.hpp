#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace leafpipe::nn {

/// Dense row-major N-d array.
template <typename T>
class Tensor {
public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, T fill = T{0});
  Tensor(std::vector<std::size_t> shape, std::vector<T> data);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  /// Same element count, new shape. Throws std::invalid_argument otherwise.
  void reshape(std::vector<std::size_t> shape);
  void fill(T v);
  bool all_finite() const;

  template <typename U>
  Tensor<U> cast() const {
    return Tensor<U>(shape_, std::vector<U>(data_.begin(), data_.end()));
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

private:
  std::vector<std::size_t> shape_;
  std::vector<T> data_;
};

std::size_t shape_product(const std::vector<std::size_t>& shape);
std::string shape_string(const std::vector<std::size_t>& shape);

}  // namespace leafpipe::nn
