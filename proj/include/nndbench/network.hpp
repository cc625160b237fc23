#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "nndbench/layers.hpp"
#include "nndbench/serialize.hpp"

namespace nndbench {

struct AdamConfig {
  double step_size = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct ParamCount {
  std::int64_t weights_only = 0;
  std::int64_t total_with_biases = 0;
};

// An ordered layer stack with shared Adam state. Exclusively owned while
// training; inference on a frozen instance is not thread-safe because layers
// cache activations, so concurrent evaluation uses one instance per worker.
template <typename T>
class Network {
 public:
  Network() = default;
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  void add(std::unique_ptr<Layer<T>> layer) { layers_.push_back(std::move(layer)); }

  std::size_t num_layers() const { return layers_.size(); }
  Layer<T>& layer(std::size_t i) { return *layers_[i]; }
  const Layer<T>& layer(std::size_t i) const { return *layers_[i]; }

  Tensor<T> forward(const Tensor<T>& input, Mode mode) {
    RngStream* rng = dropout_stream_ ? &*dropout_stream_ : nullptr;
    Tensor<T> x = input;
    for (auto& layer : layers_) x = layer->forward(x, mode, rng);
    return x;
  }

  // Propagates d(loss)/d(output) back through the stack, accumulating
  // parameter gradients; returns d(loss)/d(input).
  Tensor<T> backward(const Tensor<T>& grad_out) {
    Tensor<T> g = grad_out;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
    return g;
  }

  std::vector<Param<T>*> params() {
    std::vector<Param<T>*> out;
    for (auto& layer : layers_) {
      for (Param<T>* p : layer->params()) out.push_back(p);
    }
    return out;
  }

  void zero_grads() {
    for (Param<T>* p : params()) p->grad.set_zero();
  }

  void init_params(RngStream& rng) {
    for (Param<T>* p : params()) xavier_init(*p, rng);
    adam_steps_ = 0;
  }

  void adam_step(const AdamConfig& cfg) {
    ++adam_steps_;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(adam_steps_));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(adam_steps_));
    for (Param<T>* p : params()) {
      for (std::int64_t i = 0; i < p->value.size(); ++i) {
        const double g = static_cast<double>(p->grad[i]);
        const double m = cfg.beta1 * static_cast<double>(p->m[i]) + (1.0 - cfg.beta1) * g;
        const double v = cfg.beta2 * static_cast<double>(p->v[i]) + (1.0 - cfg.beta2) * g * g;
        p->m[i] = static_cast<T>(m);
        p->v[i] = static_cast<T>(v);
        const double update = cfg.step_size * (m / bc1) / (std::sqrt(v / bc2) + cfg.epsilon);
        p->value[i] = static_cast<T>(static_cast<double>(p->value[i]) - update);
      }
    }
  }

  std::int64_t adam_steps() const { return adam_steps_; }

  double grad_norm() {
    double sq = 0.0;
    for (Param<T>* p : params()) {
      for (std::int64_t i = 0; i < p->grad.size(); ++i) {
        const double g = static_cast<double>(p->grad[i]);
        sq += g * g;
      }
    }
    return std::sqrt(sq);
  }

  ParamCount param_count() {
    ParamCount count;
    for (Param<T>* p : params()) {
      count.total_with_biases += p->value.size();
      if (!p->is_bias) count.weights_only += p->value.size();
    }
    return count;
  }

  void set_dropout_stream(RngStream stream) { dropout_stream_ = std::move(stream); }
  RngStream* dropout_stream() { return dropout_stream_ ? &*dropout_stream_ : nullptr; }

  // Parameter values in declaration order; bit-exact round trip.
  void save_params(std::ostream& os) {
    for (Param<T>* p : params()) {
      io::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(p->value.shape().size()));
      for (std::int64_t d : p->value.shape()) io::write_pod<std::int64_t>(os, d);
      io::write_bytes(os, p->value.data(), static_cast<std::size_t>(p->value.size()) * sizeof(T));
    }
  }

  void load_params(std::istream& is) {
    for (Param<T>* p : params()) {
      const auto rank = io::read_pod<std::uint32_t>(is);
      std::vector<std::int64_t> shape(rank);
      for (auto& d : shape) d = io::read_pod<std::int64_t>(is);
      if (shape != p->value.shape()) {
        throw ConfigError("network: stored parameter shape does not match architecture");
      }
      io::read_bytes(is, p->value.data(), static_cast<std::size_t>(p->value.size()) * sizeof(T));
    }
  }

  void save_adam_state(std::ostream& os) {
    io::write_pod<std::int64_t>(os, adam_steps_);
    for (Param<T>* p : params()) {
      io::write_bytes(os, p->m.data(), static_cast<std::size_t>(p->m.size()) * sizeof(T));
      io::write_bytes(os, p->v.data(), static_cast<std::size_t>(p->v.size()) * sizeof(T));
    }
  }

  void load_adam_state(std::istream& is) {
    adam_steps_ = io::read_pod<std::int64_t>(is);
    for (Param<T>* p : params()) {
      io::read_bytes(is, p->m.data(), static_cast<std::size_t>(p->m.size()) * sizeof(T));
      io::read_bytes(is, p->v.data(), static_cast<std::size_t>(p->v.size()) * sizeof(T));
    }
  }

 private:
  std::vector<std::unique_ptr<Layer<T>>> layers_;
  std::optional<RngStream> dropout_stream_;
  std::int64_t adam_steps_ = 0;
};

}  // namespace nndbench
