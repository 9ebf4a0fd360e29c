#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "srlnav/ad/ops.hpp"
#include "srlnav/ad/checkpoint.hpp"
#include "srlnav/ad/tensor.hpp"
#include "srlnav/random.hpp"

namespace srlnav::nn {

using ad::Tensor;

enum class Activation { identity, relu, tanh, sigmoid };

inline Tensor activate(const Tensor& x, Activation a) {
  switch (a) {
    case Activation::identity: return x;
    case Activation::relu: return ad::relu(x);
    case Activation::tanh: return ad::tanh(x);
    case Activation::sigmoid: return ad::sigmoid(x);
  }
  throw std::logic_error("unknown activation");
}

enum class Init { uniform_fan_in, zeros };

/// Affine map x·W + b with W stored (in, out) and b broadcast over rows.
struct Linear {
  Tensor weight;
  Tensor bias;

  static Linear create(std::size_t in, std::size_t out, Rng& rng, Init init = Init::uniform_fan_in) {
    Linear l;
    std::vector<double> w(in * out, 0.0), b(out, 0.0);
    if (init == Init::uniform_fan_in) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(in));
      std::uniform_real_distribution<double> u(-bound, bound);
      for (auto& v : w) v = u(rng);
      for (auto& v : b) v = u(rng);
    }
    l.weight = Tensor::matrix(in, out, std::move(w), true);
    l.bias = Tensor::matrix(1, out, std::move(b), true);
    return l;
  }

  std::size_t in_features() const { return weight.rows(); }
  std::size_t out_features() const { return weight.cols(); }

  /// With `frozen`, parameters enter the graph as constants and receive no gradient.
  Tensor forward(const Tensor& x, bool frozen = false) const {
    if (frozen) return ad::matmul(x, weight.detach()) + bias.detach();
    return ad::matmul(x, weight) + bias;
  }
};

/// Fully connected stack: `hidden` activation between layers, `output` on the last.
class Mlp {
 public:
  Mlp() = default;

  Mlp(const std::vector<std::size_t>& widths, Activation hidden, Activation output, Rng& rng,
      Init init = Init::uniform_fan_in)
      : hidden_(hidden), output_(output) {
    if (widths.size() < 2) throw std::invalid_argument("Mlp needs at least input and output widths");
    for (std::size_t i = 0; i + 1 < widths.size(); ++i)
      layers_.push_back(Linear::create(widths[i], widths[i + 1], rng, init));
  }

  Tensor forward(const Tensor& x, bool frozen = false) const {
    if (x.cols() != in_features())
      throw ad::ShapeError("Mlp input has " + std::to_string(x.cols()) + " columns, expected " +
                           std::to_string(in_features()));
    Tensor h = x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      h = layers_[i].forward(h, frozen);
      h = activate(h, i + 1 == layers_.size() ? output_ : hidden_);
    }
    return h;
  }

  std::size_t in_features() const { return layers_.front().in_features(); }
  std::size_t out_features() const { return layers_.back().out_features(); }
  const std::vector<Linear>& layers() const { return layers_; }

  std::vector<Tensor> parameters() const {
    std::vector<Tensor> out;
    for (const auto& l : layers_) {
      out.push_back(l.weight);
      out.push_back(l.bias);
    }
    return out;
  }

  std::vector<Tensor> weights() const {
    std::vector<Tensor> out;
    for (const auto& l : layers_) out.push_back(l.weight);
    return out;
  }

  void append_named(const std::string& prefix, ad::NamedTensors& out) const {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      out.emplace_back(prefix + ".l" + std::to_string(i) + ".weight", layers_[i].weight);
      out.emplace_back(prefix + ".l" + std::to_string(i) + ".bias", layers_[i].bias);
    }
  }

  /// Deep copy with fresh storage; gradients are not copied.
  Mlp clone() const {
    Mlp m;
    m.hidden_ = hidden_;
    m.output_ = output_;
    for (const auto& l : layers_) {
      Linear c;
      c.weight = Tensor::from(l.weight.shape(), l.weight.values(), l.weight.requires_grad());
      c.bias = Tensor::from(l.bias.shape(), l.bias.values(), l.bias.requires_grad());
      m.layers_.push_back(std::move(c));
    }
    return m;
  }

  void set_requires_grad(bool on) {
    for (auto& l : layers_) {
      l.weight.set_requires_grad(on);
      l.bias.set_requires_grad(on);
    }
  }

 private:
  std::vector<Linear> layers_;
  Activation hidden_ = Activation::relu;
  Activation output_ = Activation::identity;
};

/// Sum of squared entries of every weight matrix (biases excluded).
inline Tensor weight_l2(const std::vector<Tensor>& weights) {
  if (weights.empty()) return Tensor::scalar(0.0);
  Tensor total = ad::sum(ad::square(weights.front()));
  for (std::size_t i = 1; i < weights.size(); ++i) total = total + ad::sum(ad::square(weights[i]));
  return total;
}

}  // namespace srlnav::nn
