#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "nndbench/errors.hpp"
#include "nndbench/rng.hpp"
#include "nndbench/tensor.hpp"

namespace nndbench {

enum class Mode { kTrain, kInfer };

template <typename T>
using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapM = Eigen::Map<MatRM<T>>;
template <typename T>
using CMapM = Eigen::Map<const MatRM<T>>;

// One trainable tensor plus its gradient and Adam moments.
template <typename T>
struct Param {
  std::string name;
  bool is_bias = false;
  std::int64_t fan_in = 0;
  std::int64_t fan_out = 0;
  Tensor<T> value, grad, m, v;

  void allocate(std::vector<std::int64_t> shape) {
    value = Tensor<T>(shape);
    grad = Tensor<T>(shape);
    m = Tensor<T>(shape);
    v = Tensor<T>(std::move(shape));
  }
};

// Uniform Glorot fill: entries in [-sqrt(6/(fan_in+fan_out)), +sqrt(...)].
template <typename T>
void xavier_fill(Tensor<T>& t, std::int64_t fan_in, std::int64_t fan_out, RngStream& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (std::int64_t i = 0; i < t.size(); ++i) {
    t[i] = static_cast<T>(bound * (2.0 * rng.uniform01() - 1.0));
  }
}

template <typename T>
void xavier_init(Param<T>& p, RngStream& rng) {
  if (p.is_bias) {
    p.value.set_zero();
  } else {
    xavier_fill(p.value, p.fan_in, p.fan_out, rng);
  }
  p.grad.set_zero();
  p.m.set_zero();
  p.v.set_zero();
}

template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual const char* kind() const = 0;
  virtual Tensor<T> forward(const Tensor<T>& in, Mode mode, RngStream* dropout_rng) = 0;
  virtual Tensor<T> backward(const Tensor<T>& grad_out) = 0;
  virtual std::vector<Param<T>*> params() { return {}; }
};

namespace detail {

template <typename T>
T stable_sigmoid(T z) {
  if (z >= T(0)) {
    return T(1) / (T(1) + std::exp(-z));
  }
  const T e = std::exp(z);
  return e / (T(1) + e);
}

}  // namespace detail

// Fully connected layer, y = x W + b. Inputs of rank > 2 are flattened to
// [batch, features].
template <typename T>
class Dense : public Layer<T> {
 public:
  Dense(std::int64_t in_features, std::int64_t out_features)
      : in_(in_features), out_(out_features) {
    w_.name = "w";
    w_.fan_in = in_;
    w_.fan_out = out_;
    w_.allocate({in_, out_});
    b_.name = "b";
    b_.is_bias = true;
    b_.fan_in = in_;
    b_.fan_out = out_;
    b_.allocate({out_});
  }

  const char* kind() const override { return "dense"; }

  Tensor<T> forward(const Tensor<T>& in, Mode, RngStream*) override {
    const std::int64_t batch = in.dim(0);
    if (in.size() != batch * in_) {
      throw ArgumentError("dense: input shape " + in.shape_string() + " does not flatten to [batch, " +
                          std::to_string(in_) + "]");
    }
    input_shape_ = in.shape();
    input_ = in.rank() == 2 ? in : in.reshaped({batch, in_});

    Tensor<T> out({batch, out_});
    CMapM<T> x(input_.data(), batch, in_);
    CMapM<T> w(w_.value.data(), in_, out_);
    MapM<T> y(out.data(), batch, out_);
    y.noalias() = x * w;
    Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> bias(b_.value.data(), out_);
    y.rowwise() += bias;
    return out;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) override {
    const std::int64_t batch = input_.dim(0);
    CMapM<T> g(grad_out.data(), batch, out_);
    CMapM<T> x(input_.data(), batch, in_);
    CMapM<T> w(w_.value.data(), in_, out_);

    MapM<T> dw(w_.grad.data(), in_, out_);
    dw.noalias() += x.transpose() * g;
    Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>> db(b_.grad.data(), out_);
    db += g.colwise().sum();

    Tensor<T> grad_in({batch, in_});
    MapM<T> gx(grad_in.data(), batch, in_);
    gx.noalias() = g * w.transpose();
    return grad_in.reshaped(input_shape_);
  }

  std::vector<Param<T>*> params() override { return {&w_, &b_}; }

 private:
  std::int64_t in_, out_;
  Param<T> w_, b_;
  Tensor<T> input_;
  std::vector<std::int64_t> input_shape_;
};

// 1-D convolution over [batch, length, channels], stride 1. kSame keeps the
// length with zero padding; kValid shrinks it to L - k + 1.
template <typename T>
class Conv1D : public Layer<T> {
 public:
  enum class Padding { kSame, kValid };

  Conv1D(int kernel, std::int64_t in_ch, std::int64_t out_ch, Padding padding)
      : kernel_(kernel), in_ch_(in_ch), out_ch_(out_ch), padding_(padding) {
    w_.name = "w";
    w_.fan_in = kernel_ * in_ch_;
    w_.fan_out = kernel_ * out_ch_;
    w_.allocate({kernel_, in_ch_, out_ch_});
    b_.name = "b";
    b_.is_bias = true;
    b_.fan_in = kernel_ * in_ch_;
    b_.fan_out = out_ch_;
    b_.allocate({out_ch_});
  }

  const char* kind() const override { return "conv1d"; }

  Tensor<T> forward(const Tensor<T>& in, Mode, RngStream*) override {
    if (in.rank() != 3 || in.dim(2) != in_ch_) {
      throw ArgumentError("conv1d: expected [batch, length, " + std::to_string(in_ch_) +
                          "], got " + in.shape_string());
    }
    input_ = in;
    const std::int64_t batch = in.dim(0);
    const std::int64_t len = in.dim(1);
    const std::int64_t out_len = padding_ == Padding::kSame ? len : len - kernel_ + 1;
    if (out_len < 1) throw ArgumentError("conv1d: kernel longer than input");
    const std::int64_t pad = padding_ == Padding::kSame ? (kernel_ - 1) / 2 : 0;

    Tensor<T> out({batch, out_len, out_ch_});
    for (std::int64_t b = 0; b < batch; ++b) {
      for (std::int64_t l = 0; l < out_len; ++l) {
        for (std::int64_t oc = 0; oc < out_ch_; ++oc) {
          T acc = b_.value[oc];
          for (std::int64_t dk = 0; dk < kernel_; ++dk) {
            const std::int64_t src = l + dk - pad;
            if (src < 0 || src >= len) continue;
            for (std::int64_t ic = 0; ic < in_ch_; ++ic) {
              acc += in.at3(b, src, ic) * w_.value[(dk * in_ch_ + ic) * out_ch_ + oc];
            }
          }
          out.at3(b, l, oc) = acc;
        }
      }
    }
    return out;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) override {
    const std::int64_t batch = input_.dim(0);
    const std::int64_t len = input_.dim(1);
    const std::int64_t out_len = grad_out.dim(1);
    const std::int64_t pad = padding_ == Padding::kSame ? (kernel_ - 1) / 2 : 0;

    Tensor<T> grad_in(input_.shape());
    for (std::int64_t b = 0; b < batch; ++b) {
      for (std::int64_t l = 0; l < out_len; ++l) {
        for (std::int64_t oc = 0; oc < out_ch_; ++oc) {
          const T g = grad_out.at3(b, l, oc);
          b_.grad[oc] += g;
          for (std::int64_t dk = 0; dk < kernel_; ++dk) {
            const std::int64_t src = l + dk - pad;
            if (src < 0 || src >= len) continue;
            for (std::int64_t ic = 0; ic < in_ch_; ++ic) {
              w_.grad[(dk * in_ch_ + ic) * out_ch_ + oc] += input_.at3(b, src, ic) * g;
              grad_in.at3(b, src, ic) += w_.value[(dk * in_ch_ + ic) * out_ch_ + oc] * g;
            }
          }
        }
      }
    }
    return grad_in;
  }

  std::vector<Param<T>*> params() override { return {&w_, &b_}; }

 private:
  std::int64_t kernel_, in_ch_, out_ch_;
  Padding padding_;
  Param<T> w_, b_;
  Tensor<T> input_;
};

// Max pooling, window 2, stride 2, over [batch, length, channels]. Ties pick
// the earlier element.
template <typename T>
class MaxPool1D : public Layer<T> {
 public:
  const char* kind() const override { return "maxpool1d"; }

  Tensor<T> forward(const Tensor<T>& in, Mode, RngStream*) override {
    if (in.rank() != 3) throw ArgumentError("maxpool1d: expected rank-3 input");
    if (in.dim(1) % 2 != 0) throw ArgumentError("maxpool1d: length must be even");
    input_shape_ = in.shape();
    const std::int64_t batch = in.dim(0);
    const std::int64_t out_len = in.dim(1) / 2;
    const std::int64_t ch = in.dim(2);

    Tensor<T> out({batch, out_len, ch});
    take_second_.assign(static_cast<std::size_t>(out.size()), 0);
    std::int64_t idx = 0;
    for (std::int64_t b = 0; b < batch; ++b) {
      for (std::int64_t l = 0; l < out_len; ++l) {
        for (std::int64_t c = 0; c < ch; ++c, ++idx) {
          const T first = in.at3(b, 2 * l, c);
          const T second = in.at3(b, 2 * l + 1, c);
          if (second > first) {
            out[idx] = second;
            take_second_[static_cast<std::size_t>(idx)] = 1;
          } else {
            out[idx] = first;
          }
        }
      }
    }
    return out;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) override {
    Tensor<T> grad_in(input_shape_);
    const std::int64_t batch = grad_out.dim(0);
    const std::int64_t out_len = grad_out.dim(1);
    const std::int64_t ch = grad_out.dim(2);
    std::int64_t idx = 0;
    for (std::int64_t b = 0; b < batch; ++b) {
      for (std::int64_t l = 0; l < out_len; ++l) {
        for (std::int64_t c = 0; c < ch; ++c, ++idx) {
          grad_in.at3(b, 2 * l + take_second_[static_cast<std::size_t>(idx)], c) = grad_out[idx];
        }
      }
    }
    return grad_in;
  }

 private:
  std::vector<std::int64_t> input_shape_;
  std::vector<std::uint8_t> take_second_;
};

template <typename T>
class Relu : public Layer<T> {
 public:
  const char* kind() const override { return "relu"; }

  Tensor<T> forward(const Tensor<T>& in, Mode, RngStream*) override {
    active_.assign(static_cast<std::size_t>(in.size()), 0);
    Tensor<T> out(in.shape());
    for (std::int64_t i = 0; i < in.size(); ++i) {
      if (in[i] > T(0)) {
        out[i] = in[i];
        active_[static_cast<std::size_t>(i)] = 1;
      }
    }
    return out;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) override {
    Tensor<T> grad_in(grad_out.shape());
    for (std::int64_t i = 0; i < grad_out.size(); ++i) {
      if (active_[static_cast<std::size_t>(i)]) grad_in[i] = grad_out[i];
    }
    return grad_in;
  }

 private:
  std::vector<std::uint8_t> active_;
};

// Logistic output clamped to the open interval (0, 1) so downstream
// probability handling never sees an exact 0 or 1.
template <typename T>
class Sigmoid : public Layer<T> {
 public:
  const char* kind() const override { return "sigmoid"; }

  Tensor<T> forward(const Tensor<T>& in, Mode, RngStream*) override {
    constexpr T lo = std::numeric_limits<T>::min();
    constexpr T hi = T(1) - std::numeric_limits<T>::epsilon() / T(2);
    output_ = Tensor<T>(in.shape());
    for (std::int64_t i = 0; i < in.size(); ++i) {
      const T s = detail::stable_sigmoid(in[i]);
      output_[i] = s < lo ? lo : (s > hi ? hi : s);
    }
    return output_;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) override {
    Tensor<T> grad_in(grad_out.shape());
    for (std::int64_t i = 0; i < grad_out.size(); ++i) {
      grad_in[i] = grad_out[i] * output_[i] * (T(1) - output_[i]);
    }
    return grad_in;
  }

 private:
  Tensor<T> output_;
};

// Inverted dropout: survivors are scaled by 1/(1-p) in train mode, inference
// is the identity.
template <typename T>
class Dropout : public Layer<T> {
 public:
  explicit Dropout(double p) : p_(p) {
    if (p < 0.0 || p >= 1.0) throw ConfigError("dropout: probability must be in [0, 1)");
  }

  const char* kind() const override { return "dropout"; }

  Tensor<T> forward(const Tensor<T>& in, Mode mode, RngStream* rng) override {
    dropped_ = mode == Mode::kTrain && p_ > 0.0;
    if (!dropped_) return in;
    if (rng == nullptr) throw ArgumentError("dropout: train mode requires an rng stream");
    mask_.assign(static_cast<std::size_t>(in.size()), 0);
    const T scale = T(1.0 / (1.0 - p_));
    Tensor<T> out(in.shape());
    for (std::int64_t i = 0; i < in.size(); ++i) {
      if (rng->uniform01() >= p_) {
        out[i] = in[i] * scale;
        mask_[static_cast<std::size_t>(i)] = 1;
      }
    }
    return out;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) override {
    if (!dropped_) return grad_out;
    const T scale = T(1.0 / (1.0 - p_));
    Tensor<T> grad_in(grad_out.shape());
    for (std::int64_t i = 0; i < grad_out.size(); ++i) {
      if (mask_[static_cast<std::size_t>(i)]) grad_in[i] = grad_out[i] * scale;
    }
    return grad_in;
  }

  double probability() const { return p_; }

 private:
  double p_;
  bool dropped_ = false;
  std::vector<std::uint8_t> mask_;
};

// Fixed-shape reshape of the per-sample payload; batch dimension passes through.
template <typename T>
class Reshape : public Layer<T> {
 public:
  explicit Reshape(std::vector<std::int64_t> tail) : tail_(std::move(tail)) {}

  const char* kind() const override { return "reshape"; }

  Tensor<T> forward(const Tensor<T>& in, Mode, RngStream*) override {
    input_shape_ = in.shape();
    std::vector<std::int64_t> shape{in.dim(0)};
    shape.insert(shape.end(), tail_.begin(), tail_.end());
    return in.reshaped(std::move(shape));
  }

  Tensor<T> backward(const Tensor<T>& grad_out) override { return grad_out.reshaped(input_shape_); }

 private:
  std::vector<std::int64_t> tail_;
  std::vector<std::int64_t> input_shape_;
};

// Collapses everything after the batch dimension.
template <typename T>
class Flatten : public Layer<T> {
 public:
  const char* kind() const override { return "flatten"; }

  Tensor<T> forward(const Tensor<T>& in, Mode, RngStream*) override {
    input_shape_ = in.shape();
    const std::int64_t batch = in.dim(0);
    return in.reshaped({batch, in.size() / batch});
  }

  Tensor<T> backward(const Tensor<T>& grad_out) override { return grad_out.reshaped(input_shape_); }

 private:
  std::vector<std::int64_t> input_shape_;
};

// Single LSTM cell unrolled over the input length; returns the final hidden
// state [batch, hidden]. Gate order in the stacked matrices: input, forget,
// candidate, output. h_0 = c_0 = 0.
template <typename T>
class Lstm : public Layer<T> {
 public:
  Lstm(std::int64_t in_features, std::int64_t hidden) : in_(in_features), hidden_(hidden) {
    w_.name = "w_input";
    w_.fan_in = in_;
    w_.fan_out = 4 * hidden_;
    w_.allocate({in_, 4 * hidden_});
    u_.name = "w_recurrent";
    u_.fan_in = hidden_;
    u_.fan_out = 4 * hidden_;
    u_.allocate({hidden_, 4 * hidden_});
    b_.name = "b";
    b_.is_bias = true;
    b_.fan_in = hidden_;
    b_.fan_out = 4 * hidden_;
    b_.allocate({4 * hidden_});
  }

  const char* kind() const override { return "lstm"; }

  Tensor<T> forward(const Tensor<T>& in, Mode, RngStream*) override {
    if (in.rank() != 3 || in.dim(2) != in_) {
      throw ArgumentError("lstm: expected [batch, steps, " + std::to_string(in_) + "], got " +
                          in.shape_string());
    }
    input_ = in;
    const std::int64_t batch = in.dim(0);
    const std::int64_t steps = in.dim(1);

    i_.assign(steps, MatRM<T>());
    f_.assign(steps, MatRM<T>());
    g_.assign(steps, MatRM<T>());
    o_.assign(steps, MatRM<T>());
    c_.assign(steps, MatRM<T>());
    tanh_c_.assign(steps, MatRM<T>());
    h_.assign(steps, MatRM<T>());

    CMapM<T> w(w_.value.data(), in_, 4 * hidden_);
    CMapM<T> u(u_.value.data(), hidden_, 4 * hidden_);
    Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> bias(b_.value.data(), 4 * hidden_);

    MatRM<T> z(batch, 4 * hidden_);
    for (std::int64_t t = 0; t < steps; ++t) {
      z.noalias() = step_input(t) * w;
      if (t > 0) z.noalias() += h_[t - 1] * u;
      z.rowwise() += bias;

      auto zi = z.block(0, 0, batch, hidden_).array();
      auto zf = z.block(0, hidden_, batch, hidden_).array();
      auto zg = z.block(0, 2 * hidden_, batch, hidden_).array();
      auto zo = z.block(0, 3 * hidden_, batch, hidden_).array();

      i_[t] = (T(1) / (T(1) + (-zi).exp())).matrix();
      f_[t] = (T(1) / (T(1) + (-zf).exp())).matrix();
      g_[t] = zg.tanh().matrix();
      o_[t] = (T(1) / (T(1) + (-zo).exp())).matrix();

      if (t == 0) {
        c_[t] = (i_[t].array() * g_[t].array()).matrix();
      } else {
        c_[t] = (f_[t].array() * c_[t - 1].array() + i_[t].array() * g_[t].array()).matrix();
      }
      tanh_c_[t] = c_[t].array().tanh().matrix();
      h_[t] = (o_[t].array() * tanh_c_[t].array()).matrix();
    }

    Tensor<T> out({batch, hidden_});
    MapM<T>(out.data(), batch, hidden_) = h_[steps - 1];
    return out;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) override {
    const std::int64_t batch = input_.dim(0);
    const std::int64_t steps = input_.dim(1);

    CMapM<T> w(w_.value.data(), in_, 4 * hidden_);
    CMapM<T> u(u_.value.data(), hidden_, 4 * hidden_);
    MapM<T> dw(w_.grad.data(), in_, 4 * hidden_);
    MapM<T> du(u_.grad.data(), hidden_, 4 * hidden_);
    Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>> db(b_.grad.data(), 4 * hidden_);

    Tensor<T> grad_in(input_.shape());
    MatRM<T> dh = CMapM<T>(grad_out.data(), batch, hidden_);
    MatRM<T> dc = MatRM<T>::Zero(batch, hidden_);
    MatRM<T> dz(batch, 4 * hidden_);

    for (std::int64_t t = steps - 1; t >= 0; --t) {
      dc.array() += dh.array() * o_[t].array() * (T(1) - tanh_c_[t].array().square());

      auto dzi = dz.block(0, 0, batch, hidden_);
      auto dzf = dz.block(0, hidden_, batch, hidden_);
      auto dzg = dz.block(0, 2 * hidden_, batch, hidden_);
      auto dzo = dz.block(0, 3 * hidden_, batch, hidden_);

      dzo = ((dh.array() * tanh_c_[t].array()) * o_[t].array() * (T(1) - o_[t].array())).matrix();
      dzi = ((dc.array() * g_[t].array()) * i_[t].array() * (T(1) - i_[t].array())).matrix();
      if (t > 0) {
        dzf = ((dc.array() * c_[t - 1].array()) * f_[t].array() * (T(1) - f_[t].array())).matrix();
      } else {
        dzf.setZero();
      }
      dzg = ((dc.array() * i_[t].array()) * (T(1) - g_[t].array().square())).matrix();

      dw.noalias() += step_input(t).transpose() * dz;
      if (t > 0) du.noalias() += h_[t - 1].transpose() * dz;
      db += dz.colwise().sum();

      grad_step_input(grad_in, t).noalias() = dz * w.transpose();
      if (t > 0) {
        dh.noalias() = dz * u.transpose();
        dc.array() *= f_[t].array();
      }
    }
    return grad_in;
  }

  std::vector<Param<T>*> params() override { return {&w_, &u_, &b_}; }

  std::int64_t hidden_size() const { return hidden_; }

 private:
  using StridedMap = Eigen::Map<const MatRM<T>, 0, Eigen::OuterStride<>>;
  using StridedMapMut = Eigen::Map<MatRM<T>, 0, Eigen::OuterStride<>>;

  StridedMap step_input(std::int64_t t) const {
    const std::int64_t steps = input_.dim(1);
    return StridedMap(input_.data() + t * in_, input_.dim(0), in_,
                      Eigen::OuterStride<>(steps * in_));
  }

  StridedMapMut grad_step_input(Tensor<T>& grad_in, std::int64_t t) const {
    const std::int64_t steps = input_.dim(1);
    return StridedMapMut(grad_in.data() + t * in_, input_.dim(0), in_,
                         Eigen::OuterStride<>(steps * in_));
  }

  std::int64_t in_, hidden_;
  Param<T> w_, u_, b_;
  Tensor<T> input_;
  std::vector<MatRM<T>> i_, f_, g_, o_, c_, tanh_c_, h_;
};

}  // namespace nndbench
