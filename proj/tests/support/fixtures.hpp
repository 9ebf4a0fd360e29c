#pragma once

// Shared builders for unit and acceptance tests: random inputs, small networks and
// plain-loop forward passes that mirror the library networks.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "srlnav/rl/networks.hpp"
#include "srlnav/rl/replay.hpp"
#include "srlnav/srl/encoder.hpp"
#include "srlnav/srl/priors.hpp"
#include "support/oracles.hpp"

namespace fixture {

using namespace srlnav;

inline std::vector<oracle::Layer> layers_of(const nn::Mlp& m) {
  std::vector<oracle::Layer> out;
  for (const auto& l : m.layers()) out.push_back({l.in_features(), l.out_features(), l.weight.values(), l.bias.values()});
  return out;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline oracle::Vec actor_oracle(const rl::Actor& a, const oracle::Vec& s) {
  auto raw = oracle::mlp_forward(layers_of(a.net()), s);
  return {sigmoid(raw[0]), std::tanh(raw[1])};
}

inline double critic_oracle(const rl::Critic& c, oracle::Vec s, const oracle::Vec& a) {
  s.insert(s.end(), a.begin(), a.end());
  return oracle::mlp_forward(layers_of(c.net()), s)[0];
}

inline std::vector<rl::Transition> random_transitions(std::size_t n, std::size_t d, std::uint64_t seed,
                                                      double p_terminal = 0.2) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0), uw(-1.0, 1.0);
  std::vector<rl::Transition> out(n);
  for (auto& t : out) {
    t.state.resize(d);
    t.next_state.resize(d);
    for (auto& v : t.state) v = g(rng);
    for (auto& v : t.next_state) v = g(rng);
    t.action = {u(rng), uw(rng)};
    t.reward = 10.0 * g(rng);
    t.terminal = u(rng) < p_terminal;
  }
  return out;
}

inline rl::TransitionBatch batch_of(const std::vector<rl::Transition>& ts) {
  std::vector<const rl::Transition*> rows;
  for (const auto& t : ts) rows.push_back(&t);
  return rl::make_batch(rows);
}

inline sim::Observation random_obs(std::mt19937_64& rng, const srl::EncoderConfig& c) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  sim::Observation o;
  o.lidar.resize(c.lidar_dim);
  o.patch.resize(c.patch_dim);
  for (auto& v : o.lidar) v = u(rng);
  for (auto& v : o.patch) v = u(rng) < 0.3 ? 1.0 : 0.0;
  return o;
}

/// Random observations whose successors differ by a small lidar jitter.
inline std::vector<srl::Sample> synthetic_samples(std::size_t n, std::uint64_t seed, const srl::EncoderConfig& c) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uv(0.0, 1.0), uw(-1.0, 1.0);
  std::vector<srl::Sample> out;
  for (std::size_t i = 0; i < n; ++i) {
    srl::Sample s;
    s.obs = random_obs(rng, c);
    s.next_obs = s.obs;
    for (auto& v : s.next_obs.lidar) v = std::clamp(v + 0.05 * uw(rng), 0.0, 1.0);
    s.action = {uv(rng), uw(rng)};
    out.push_back(std::move(s));
  }
  return out;
}

/// Plain-loop copy of an encoder: two all-relu branch stacks joined into a merge stack.
struct EncoderOracle {
  std::vector<oracle::Layer> lidar, patch, merge;

  explicit EncoderOracle(const srl::Encoder& enc) {
    const auto named = enc.named_parameters();
    auto take = [&](const std::string& prefix) {
      std::vector<oracle::Layer> ls;
      for (std::size_t i = 0;; ++i) {
        const ad::Tensor *w = nullptr, *b = nullptr;
        for (const auto& [name, t] : named) {
          if (name == prefix + ".l" + std::to_string(i) + ".weight") w = &t;
          if (name == prefix + ".l" + std::to_string(i) + ".bias") b = &t;
        }
        if (!w || !b) break;
        ls.push_back({w->rows(), w->cols(), w->values(), b->values()});
      }
      return ls;
    };
    lidar = take("encoder.lidar");
    patch = take("encoder.patch");
    merge = take("encoder.merge");
  }

  oracle::Vec operator()(const sim::Observation& o) const {
    auto a = oracle::mlp_forward(lidar, o.lidar);
    auto c = oracle::mlp_forward(patch, o.patch);
    for (auto& v : a) v = std::max(v, 0.0);
    for (auto& v : c) v = std::max(v, 0.0);
    a.insert(a.end(), c.begin(), c.end());
    return oracle::mlp_forward(merge, a);
  }

  /// Sum of squared weight entries, biases excluded.
  double weight_sq_norm() const {
    double s = 0;
    for (const auto* ls : {&lidar, &patch, &merge})
      for (const auto& l : *ls) s += oracle::sq_norm(l.w);
    return s;
  }

  /// Smallest |pre-activation| over every relu unit the observations reach.
  double kink_margin(const std::vector<sim::Observation>& obs) const {
    double best = std::numeric_limits<double>::infinity();
    auto scan = [&](const std::vector<oracle::Layer>& ls, oracle::Vec x, bool last_is_relu) {
      for (std::size_t l = 0; l < ls.size(); ++l) {
        const auto& L = ls[l];
        const bool relu = last_is_relu || l + 1 < ls.size();
        oracle::Vec y(L.out, 0.0);
        for (std::size_t j = 0; j < L.out; ++j) {
          double s = L.b[j];
          for (std::size_t i = 0; i < L.in; ++i) s += x[i] * L.w[i * L.out + j];
          if (relu) best = std::min(best, std::abs(s));
          y[j] = relu ? std::max(s, 0.0) : s;
        }
        x = std::move(y);
      }
      return x;
    };
    for (const auto& o : obs) {
      auto a = scan(lidar, o.lidar, true);
      auto c = scan(patch, o.patch, true);
      a.insert(a.end(), c.begin(), c.end());
      scan(merge, a, false);
    }
    return best;
  }
};

}  // namespace fixture
