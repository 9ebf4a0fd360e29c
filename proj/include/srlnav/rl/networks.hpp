#pragma once

#include <algorithm>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "srlnav/ad/checkpoint.hpp"
#include "srlnav/nn/layers.hpp"
#include "srlnav/sim/types.hpp"

namespace srlnav::rl {

using ad::Tensor;

namespace detail {

// Final layer starts near zero so initial actions sit mid-range and Q starts near 0.
inline void shrink_last_layer(const nn::Mlp& m, double bound, Rng& rng) {
  std::uniform_real_distribution<double> u(-bound, bound);
  Tensor w = m.layers().back().weight, b = m.layers().back().bias;
  for (auto& v : w.mutable_data()) v = u(rng);
  for (auto& v : b.mutable_data()) v = u(rng);
}

inline std::vector<std::size_t> widths(std::size_t in, std::size_t hidden, std::size_t layers, std::size_t out) {
  std::vector<std::size_t> w{in};
  w.insert(w.end(), layers, hidden);
  w.push_back(out);
  return w;
}

}  // namespace detail

/// Deterministic policy: extended state -> (v in [0,1], w in [-1,1]).
class Actor {
 public:
  Actor() = default;
  Actor(std::size_t state_dim, std::size_t hidden, Rng& rng, std::size_t hidden_layers = 3)
      : net_(detail::widths(state_dim, hidden, hidden_layers, 2), nn::Activation::relu, nn::Activation::identity, rng) {
    detail::shrink_last_layer(net_, 3e-3, rng);
  }

  Tensor forward(const Tensor& states, bool frozen = false) const {
    auto raw = net_.forward(states, frozen);
    return ad::concat_rows(ad::sigmoid(ad::slice_cols(raw, 0, 1)), ad::tanh(ad::slice_cols(raw, 1, 2)));
  }

  sim::Action act(std::span<const double> state) const {
    auto out = forward(Tensor::matrix(1, state.size(), {state.begin(), state.end()}), true).values();
    return {out[0], out[1]};
  }

  std::size_t state_dim() const { return net_.in_features(); }
  const nn::Mlp& net() const { return net_; }
  std::vector<Tensor> parameters() const { return net_.parameters(); }
  void append_named(const std::string& prefix, ad::NamedTensors& out) const { net_.append_named(prefix, out); }

  Actor clone() const {
    Actor a;
    a.net_ = net_.clone();
    return a;
  }
  void set_requires_grad(bool on) { net_.set_requires_grad(on); }

 private:
  nn::Mlp net_;
};

/// Action-value function Q(s, a) over the extended state and normalized action.
class Critic {
 public:
  Critic() = default;
  Critic(std::size_t state_dim, std::size_t hidden, Rng& rng, std::size_t hidden_layers = 3)
      : net_(detail::widths(state_dim + 2, hidden, hidden_layers, 1), nn::Activation::relu, nn::Activation::identity,
             rng) {
    detail::shrink_last_layer(net_, 3e-3, rng);
  }

  Tensor forward(const Tensor& states, const Tensor& actions, bool frozen = false) const {
    return net_.forward(ad::concat_rows(states, actions), frozen);
  }

  std::size_t state_dim() const { return net_.in_features() - 2; }
  const nn::Mlp& net() const { return net_; }
  std::vector<Tensor> parameters() const { return net_.parameters(); }
  void append_named(const std::string& prefix, ad::NamedTensors& out) const { net_.append_named(prefix, out); }

  Critic clone() const {
    Critic c;
    c.net_ = net_.clone();
    return c;
  }
  void set_requires_grad(bool on) { net_.set_requires_grad(on); }

 private:
  nn::Mlp net_;
};

/// θ' <- ρθ + (1-ρ)θ' for every tensor pair.
inline void soft_update(std::span<const Tensor> online, std::span<Tensor> target, double rho) {
  if (online.size() != target.size())
    throw ad::ShapeError("soft_update: " + std::to_string(online.size()) + " online tensors vs " +
                         std::to_string(target.size()) + " target tensors");
  for (std::size_t i = 0; i < online.size(); ++i)
    if (online[i].shape() != target[i].shape())
      throw ad::ShapeError("soft_update: tensor " + std::to_string(i) + " has shape " +
                           ad::shape_str(online[i].shape()) + " online but " + ad::shape_str(target[i].shape()) +
                           " in target");
  for (std::size_t i = 0; i < online.size(); ++i) {
    const auto& src = online[i].values();
    auto dst = target[i].mutable_data();
    if (rho == 1.0) {
      std::copy(src.begin(), src.end(), dst.begin());
      continue;
    }
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = rho * src[j] + (1.0 - rho) * dst[j];
  }
}

inline void soft_update(const std::vector<Tensor>& online, std::vector<Tensor> target, double rho) {
  soft_update(std::span<const Tensor>(online), std::span<Tensor>(target), rho);
}

/// π(s) plus independent Gaussian noise on each component, clamped to the action box.
inline sim::Action select_action(const Actor& actor, std::span<const double> state, double noise_sigma, Rng& rng) {
  if (noise_sigma < 0) throw std::invalid_argument("select_action: noise_sigma must be >= 0");
  auto a = actor.act(state);
  if (noise_sigma > 0) {
    std::normal_distribution<double> n(0.0, noise_sigma);
    a.v += n(rng);
    a.w += n(rng);
  }
  return a.clamped();
}

}  // namespace srlnav::rl
