#include "leafpipe/nn/layers.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "leafpipe/error.hpp"
#include "leafpipe/simd/kernels.hpp"

namespace leafpipe::nn {

namespace {

template <typename T>
void transpose(const T* src, std::size_t rows, std::size_t cols, T* dst) {
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) dst[c * rows + r] = src[r * cols + c];
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

std::string kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv: return "conv";
    case LayerKind::maxpool: return "maxpool";
    case LayerKind::dense: return "dense";
    case LayerKind::relu: return "relu";
    case LayerKind::flatten: return "flatten";
  }
  return "unknown";
}

std::string LayerSpec::to_string() const {
  switch (kind) {
    case LayerKind::conv:
      return "conv:" + std::to_string(out) + ":" + std::to_string(kernel) + ":" +
             std::to_string(stride) + ":" + std::to_string(pad);
    case LayerKind::maxpool:
      return "maxpool:" + std::to_string(kernel) + ":" + std::to_string(stride);
    case LayerKind::dense:
      return "dense:" + std::to_string(out);
    default:
      return kind_name(kind);
  }
}

template <typename T>
void Layer<T>::check_input(const Tensor<T>& x) const {
  std::vector<std::size_t> expect{x.rank() ? x.dim(0) : 0};
  expect.insert(expect.end(), input_shape_.begin(), input_shape_.end());
  if (x.rank() == 0 || x.dim(0) == 0 || x.shape() != expect)
    throw std::invalid_argument("layer input shape " + shape_string(x.shape()) +
                                " does not match expected [B]" + shape_string(input_shape_));
}

// ---------------------------------------------------------------- Conv2D

template <typename T>
Conv2D<T>::Conv2D(std::vector<std::size_t> input_shape, const LayerSpec& spec)
    : Layer<T>(std::move(input_shape)), spec_(spec) {
  require(this->input_shape_.size() == 3, "conv expects a [C,H,W] input");
  require(spec.out >= 1 && spec.kernel >= 1 && spec.stride >= 1, "conv needs out, k, stride >= 1");
  in_c_ = this->input_shape_[0];
  in_h_ = this->input_shape_[1];
  in_w_ = this->input_shape_[2];
  require(in_h_ + 2 * spec.pad >= spec.kernel && in_w_ + 2 * spec.pad >= spec.kernel,
          "conv kernel larger than padded input");
  out_h_ = (in_h_ + 2 * spec.pad - spec.kernel) / spec.stride + 1;
  out_w_ = (in_w_ + 2 * spec.pad - spec.kernel) / spec.stride + 1;
  const std::vector<std::size_t> wshape{spec.out, in_c_, spec.kernel, spec.kernel};
  weight_ = {"weight", Tensor<T>(wshape), Tensor<T>(wshape)};
  bias_ = {"bias", Tensor<T>({spec.out}), Tensor<T>({spec.out})};
}

template <typename T>
std::vector<std::size_t> Conv2D<T>::output_shape() const {
  return {spec_.out, out_h_, out_w_};
}

template <typename T>
void Conv2D<T>::im2col(const T* x, T* col) const {
  const std::size_t k = spec_.kernel;
  const std::size_t n = out_h_ * out_w_;
  const long pad = spec_.pad;
  for (std::size_t c = 0; c < in_c_; ++c) {
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        T* dst = col + ((c * k + ky) * k + kx) * n;
        for (std::size_t oy = 0; oy < out_h_; ++oy) {
          const long iy = static_cast<long>(oy * spec_.stride + ky) - pad;
          T* drow = dst + oy * out_w_;
          if (iy < 0 || iy >= static_cast<long>(in_h_)) {
            std::fill(drow, drow + out_w_, T{0});
            continue;
          }
          const T* srow = x + (c * in_h_ + static_cast<std::size_t>(iy)) * in_w_;
          for (std::size_t ox = 0; ox < out_w_; ++ox) {
            const long ix = static_cast<long>(ox * spec_.stride + kx) - pad;
            drow[ox] = (ix < 0 || ix >= static_cast<long>(in_w_)) ? T{0} : srow[ix];
          }
        }
      }
    }
  }
}

template <typename T>
void Conv2D<T>::col2im(const T* col, T* dx) const {
  const std::size_t k = spec_.kernel;
  const std::size_t n = out_h_ * out_w_;
  const long pad = spec_.pad;
  for (std::size_t c = 0; c < in_c_; ++c) {
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        const T* src = col + ((c * k + ky) * k + kx) * n;
        for (std::size_t oy = 0; oy < out_h_; ++oy) {
          const long iy = static_cast<long>(oy * spec_.stride + ky) - pad;
          if (iy < 0 || iy >= static_cast<long>(in_h_)) continue;
          T* drow = dx + (c * in_h_ + static_cast<std::size_t>(iy)) * in_w_;
          for (std::size_t ox = 0; ox < out_w_; ++ox) {
            const long ix = static_cast<long>(ox * spec_.stride + kx) - pad;
            if (ix >= 0 && ix < static_cast<long>(in_w_)) drow[ix] += src[oy * out_w_ + ox];
          }
        }
      }
    }
  }
}

template <typename T>
Tensor<T> Conv2D<T>::forward(const Tensor<T>& x) {
  this->check_input(x);
  batch_ = x.dim(0);
  const std::size_t ckk = in_c_ * spec_.kernel * spec_.kernel;
  const std::size_t n = out_h_ * out_w_;
  const std::size_t in_size = in_c_ * in_h_ * in_w_;
  cols_.resize(batch_ * ckk * n);
  Tensor<T> y({batch_, spec_.out, out_h_, out_w_});
  for (std::size_t b = 0; b < batch_; ++b) {
    T* col = cols_.data() + b * ckk * n;
    im2col(x.data() + b * in_size, col);
    T* yb = y.data() + b * spec_.out * n;
    simd::gemm<T>(spec_.out, n, ckk, weight_.value.data(), ckk, col, n, yb, n, false);
    for (std::size_t o = 0; o < spec_.out; ++o) {
      const T bo = bias_.value[o];
      T* row = yb + o * n;
      for (std::size_t i = 0; i < n; ++i) row[i] += bo;
    }
  }
  this->has_forward_ = true;
  return y;
}

template <typename T>
Tensor<T> Conv2D<T>::backward(const Tensor<T>& dy) {
  if (!this->has_forward_) throw std::logic_error("conv backward called before forward");
  const std::size_t ckk = in_c_ * spec_.kernel * spec_.kernel;
  const std::size_t n = out_h_ * out_w_;
  const std::size_t in_size = in_c_ * in_h_ * in_w_;
  if (dy.shape() != std::vector<std::size_t>{batch_, spec_.out, out_h_, out_w_})
    throw std::invalid_argument("conv backward: gradient shape mismatch");

  weight_.grad.fill(T{0});
  bias_.grad.fill(T{0});
  Tensor<T> dx;
  if (this->needs_input_grad_) dx = Tensor<T>({batch_, in_c_, in_h_, in_w_});

  std::vector<T> col_t(n * ckk);
  std::vector<T> w_t(ckk * spec_.out);
  std::vector<T> dcol;
  if (this->needs_input_grad_) {
    transpose(weight_.value.data(), spec_.out, ckk, w_t.data());
    dcol.resize(ckk * n);
  }
  for (std::size_t b = 0; b < batch_; ++b) {
    const T* dyb = dy.data() + b * spec_.out * n;
    const T* col = cols_.data() + b * ckk * n;
    transpose(col, ckk, n, col_t.data());
    simd::gemm<T>(spec_.out, ckk, n, dyb, n, col_t.data(), ckk, weight_.grad.data(), ckk, true);
    for (std::size_t o = 0; o < spec_.out; ++o) {
      T s = 0;
      for (std::size_t i = 0; i < n; ++i) s += dyb[o * n + i];
      bias_.grad[o] += s;
    }
    if (this->needs_input_grad_) {
      simd::gemm<T>(ckk, n, spec_.out, w_t.data(), spec_.out, dyb, n, dcol.data(), n, false);
      col2im(dcol.data(), dx.data() + b * in_size);
    }
  }
  return dx;
}

// ---------------------------------------------------------------- MaxPool2D

template <typename T>
MaxPool2D<T>::MaxPool2D(std::vector<std::size_t> input_shape, const LayerSpec& spec)
    : Layer<T>(std::move(input_shape)), spec_(spec) {
  require(this->input_shape_.size() == 3, "maxpool expects a [C,H,W] input");
  require(spec.kernel >= 1 && spec.stride >= 1, "maxpool needs window, stride >= 1");
  c_ = this->input_shape_[0];
  h_ = this->input_shape_[1];
  w_ = this->input_shape_[2];
  require(h_ >= spec.kernel && w_ >= spec.kernel, "maxpool window larger than input");
  out_h_ = (h_ - spec.kernel) / spec.stride + 1;
  out_w_ = (w_ - spec.kernel) / spec.stride + 1;
}

template <typename T>
std::vector<std::size_t> MaxPool2D<T>::output_shape() const {
  return {c_, out_h_, out_w_};
}

template <typename T>
Tensor<T> MaxPool2D<T>::forward(const Tensor<T>& x) {
  this->check_input(x);
  batch_ = x.dim(0);
  Tensor<T> y({batch_, c_, out_h_, out_w_});
  argmax_.resize(y.size());
  const std::size_t win = spec_.kernel;
  for (std::size_t bc = 0; bc < batch_ * c_; ++bc) {
    const T* plane = x.data() + bc * h_ * w_;
    for (std::size_t oy = 0; oy < out_h_; ++oy) {
      for (std::size_t ox = 0; ox < out_w_; ++ox) {
        std::size_t best = (oy * spec_.stride) * w_ + ox * spec_.stride;
        T best_v = plane[best];
        for (std::size_t py = 0; py < win; ++py) {
          for (std::size_t px = 0; px < win; ++px) {
            const std::size_t idx = (oy * spec_.stride + py) * w_ + ox * spec_.stride + px;
            if (plane[idx] > best_v) {
              best_v = plane[idx];
              best = idx;
            }
          }
        }
        const std::size_t o = (bc * out_h_ + oy) * out_w_ + ox;
        y[o] = best_v;
        argmax_[o] = bc * h_ * w_ + best;
      }
    }
  }
  this->has_forward_ = true;
  return y;
}

template <typename T>
Tensor<T> MaxPool2D<T>::backward(const Tensor<T>& dy) {
  if (!this->has_forward_) throw std::logic_error("maxpool backward called before forward");
  if (dy.size() != argmax_.size()) throw std::invalid_argument("maxpool backward: shape mismatch");
  Tensor<T> dx({batch_, c_, h_, w_});
  for (std::size_t o = 0; o < argmax_.size(); ++o) dx[argmax_[o]] += dy[o];
  return dx;
}

// ---------------------------------------------------------------- Dense

template <typename T>
Dense<T>::Dense(std::vector<std::size_t> input_shape, const LayerSpec& spec)
    : Layer<T>(std::move(input_shape)), spec_(spec) {
  require(spec.out >= 1, "dense needs out >= 1");
  in_ = shape_product(this->input_shape_);
  require(in_ >= 1, "dense needs a non-empty input");
  weight_ = {"weight", Tensor<T>({spec.out, in_}), Tensor<T>({spec.out, in_})};
  bias_ = {"bias", Tensor<T>({spec.out}), Tensor<T>({spec.out})};
}

template <typename T>
Tensor<T> Dense<T>::forward(const Tensor<T>& x) {
  this->check_input(x);
  const std::size_t batch = x.dim(0);
  x_ = x;
  std::vector<T> w_t(in_ * spec_.out);
  transpose(weight_.value.data(), spec_.out, in_, w_t.data());
  Tensor<T> y({batch, spec_.out});
  simd::gemm<T>(batch, spec_.out, in_, x.data(), in_, w_t.data(), spec_.out, y.data(), spec_.out,
                false);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t o = 0; o < spec_.out; ++o) y[b * spec_.out + o] += bias_.value[o];
  this->has_forward_ = true;
  return y;
}

template <typename T>
Tensor<T> Dense<T>::backward(const Tensor<T>& dy) {
  if (!this->has_forward_) throw std::logic_error("dense backward called before forward");
  const std::size_t batch = x_.dim(0);
  if (dy.shape() != std::vector<std::size_t>{batch, spec_.out})
    throw std::invalid_argument("dense backward: gradient shape mismatch");
  std::vector<T> dy_t(spec_.out * batch);
  transpose(dy.data(), batch, spec_.out, dy_t.data());
  simd::gemm<T>(spec_.out, in_, batch, dy_t.data(), batch, x_.data(), in_, weight_.grad.data(), in_,
                false);
  for (std::size_t o = 0; o < spec_.out; ++o) {
    T s = 0;
    for (std::size_t b = 0; b < batch; ++b) s += dy_t[o * batch + b];
    bias_.grad[o] = s;
  }
  if (!this->needs_input_grad_) return {};
  Tensor<T> dx(x_.shape());
  simd::gemm<T>(batch, in_, spec_.out, dy.data(), spec_.out, weight_.value.data(), in_, dx.data(),
                in_, false);
  return dx;
}

// ---------------------------------------------------------------- ReLU / Flatten

template <typename T>
Tensor<T> ReLU<T>::forward(const Tensor<T>& x) {
  this->check_input(x);
  x_ = x;
  Tensor<T> y = x;
  for (T& v : y.values()) v = v > T{0} ? v : T{0};
  this->has_forward_ = true;
  return y;
}

template <typename T>
Tensor<T> ReLU<T>::backward(const Tensor<T>& dy) {
  if (!this->has_forward_) throw std::logic_error("relu backward called before forward");
  if (dy.shape() != x_.shape()) throw std::invalid_argument("relu backward: shape mismatch");
  Tensor<T> dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i)
    if (!(x_[i] > T{0})) dx[i] = T{0};
  return dx;
}

template <typename T>
Tensor<T> Flatten<T>::forward(const Tensor<T>& x) {
  this->check_input(x);
  batch_ = x.dim(0);
  Tensor<T> y = x;
  y.reshape({batch_, shape_product(this->input_shape_)});
  this->has_forward_ = true;
  return y;
}

template <typename T>
Tensor<T> Flatten<T>::backward(const Tensor<T>& dy) {
  if (!this->has_forward_) throw std::logic_error("flatten backward called before forward");
  Tensor<T> dx = dy;
  std::vector<std::size_t> shape{batch_};
  shape.insert(shape.end(), this->input_shape_.begin(), this->input_shape_.end());
  dx.reshape(shape);
  return dx;
}

template <typename T>
std::unique_ptr<Layer<T>> make_layer(const LayerSpec& spec,
                                     const std::vector<std::size_t>& input_shape) {
  switch (spec.kind) {
    case LayerKind::conv: return std::make_unique<Conv2D<T>>(input_shape, spec);
    case LayerKind::maxpool: return std::make_unique<MaxPool2D<T>>(input_shape, spec);
    case LayerKind::dense: return std::make_unique<Dense<T>>(input_shape, spec);
    case LayerKind::relu: return std::make_unique<ReLU<T>>(input_shape);
    case LayerKind::flatten: return std::make_unique<Flatten<T>>(input_shape);
  }
  throw std::invalid_argument("unknown layer kind");
}

template class Layer<float>;
template class Layer<double>;
template class Conv2D<float>;
template class Conv2D<double>;
template class MaxPool2D<float>;
template class MaxPool2D<double>;
template class Dense<float>;
template class Dense<double>;
template class ReLU<float>;
template class ReLU<double>;
template class Flatten<float>;
template class Flatten<double>;
template std::unique_ptr<Layer<float>> make_layer<float>(const LayerSpec&, const std::vector<std::size_t>&);
template std::unique_ptr<Layer<double>> make_layer<double>(const LayerSpec&, const std::vector<std::size_t>&);

}  // namespace leafpipe::nn
