#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "srlnav/ad/ops.hpp"
#include "srlnav/nn/layers.hpp"
#include "srlnav/sim/types.hpp"
#include "srlnav/srl/dataset.hpp"
#include "srlnav/srl/encoder.hpp"

namespace srlnav::srl {

/// Weights of the continuous-action robotics priors.
struct PriorHyper {
  double alpha = 1.0;                           // action-magnitude scale in temporal coherence
  double beta = 1.0;                            // action-difference scale in the pair priors
  std::array<double, 5> omega{1, 1, 1, 2, 1};   // temporal, proportionality, repeatability, causality, regularization
  double lambda_reg = 1e-3;                     // L2 coefficient on encoder weight matrices

  void validate() const {
    if (alpha < 0 || beta < 0 || lambda_reg < 0) throw std::invalid_argument("prior hyperparameters must be >= 0");
    for (double w : omega)
      if (w < 0) throw std::invalid_argument("prior weights must be >= 0");
  }
};

/// Dataset rows of one minibatch plus a matching of batch positions into pairs.
struct PairIndices {
  std::vector<std::size_t> rows;    // dataset indices, batch order
  std::vector<std::size_t> first;   // batch positions t1
  std::vector<std::size_t> second;  // batch positions t2
};

/// Encoded minibatch: state predictions for o_t and o_{t+1}, the actions, and the pairing.
struct PairBatch {
  Tensor s;       // (B, k)
  Tensor s_next;  // (B, k)
  std::vector<sim::Action> actions;
  std::vector<std::size_t> first;
  std::vector<std::size_t> second;

  std::size_t size() const { return actions.size(); }
  std::size_t pairs() const { return first.size(); }
};

/// Pairs consecutive batch positions: (0,1), (2,3), ...
inline void pair_consecutive(PairIndices& idx) {
  idx.first.clear();
  idx.second.clear();
  for (std::size_t i = 0; i + 1 < idx.rows.size(); i += 2) {
    idx.first.push_back(i);
    idx.second.push_back(i + 1);
  }
}

/// Draws `batch_size` distinct non-terminal transitions uniformly and matches them in pairs.
inline PairIndices sample_pairs(std::span<const Sample> samples, std::size_t batch_size, std::uint64_t seed) {
  if (batch_size < 2) throw std::invalid_argument("sample_pairs: batch_size must be at least 2");
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (!samples[i].terminal) pool.push_back(i);
  if (pool.size() < batch_size)
    throw std::invalid_argument("sample_pairs: need " + std::to_string(batch_size) + " non-terminal transitions, have " +
                                std::to_string(pool.size()));
  std::mt19937_64 rng(seed);
  // partial Fisher-Yates: the first batch_size entries become a uniform draw in random order
  for (std::size_t i = 0; i < batch_size; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  PairIndices idx;
  idx.rows.assign(pool.begin(), pool.begin() + static_cast<long>(batch_size));
  pair_consecutive(idx);
  return idx;
}

inline PairBatch make_pair_batch(const Encoder& encoder, std::span<const Sample> samples, const PairIndices& idx,
                                 bool frozen = false) {
  std::vector<const Sample*> rows;
  rows.reserve(idx.rows.size());
  for (auto r : idx.rows) rows.push_back(&samples[r]);
  PairBatch b;
  b.s = encoder.forward(make_observation_batch(rows, [](const Sample* s) -> const sim::Observation& { return s->obs; }),
                        frozen);
  b.s_next = encoder.forward(
      make_observation_batch(rows, [](const Sample* s) -> const sim::Observation& { return s->next_obs; }), frozen);
  for (const auto* s : rows) b.actions.push_back(s->action);
  b.first = idx.first;
  b.second = idx.second;
  return b;
}

namespace detail {

inline Tensor column(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor::matrix(n, 1, std::move(v));
}

inline double action_diff_sq(const sim::Action& a, const sim::Action& b) {
  return (a.v - b.v) * (a.v - b.v) + (a.w - b.w) * (a.w - b.w);
}

// e^{-beta ||a_t1 - a_t2||^2} per pair, as a constant column
inline Tensor action_pair_weights(const PairBatch& b, double beta) {
  std::vector<double> w(b.pairs());
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = std::exp(-beta * action_diff_sq(b.actions[b.first[i]], b.actions[b.second[i]]));
  return column(std::move(w));
}

inline void require_pairs(const PairBatch& b, const char* what) {
  if (b.size() == 0) throw std::invalid_argument(std::string(what) + ": empty batch");
  if (b.pairs() == 0 || b.first.size() != b.second.size())
    throw std::invalid_argument(std::string(what) + ": empty pairing");
}

inline Tensor delta(const PairBatch& b) { return b.s_next - b.s; }

// ||s_t2 - s_t1||^2 per pair
inline Tensor pair_state_dist_sq(const PairBatch& b) {
  return ad::sum_rows(ad::square(ad::gather_rows(b.s, b.second) - ad::gather_rows(b.s, b.first)));
}

}  // namespace detail

/// mean_t (||Δŝ_t|| e^{-α||a_t||})^2
inline Tensor loss_temporal(const PairBatch& b, double alpha) {
  if (b.size() == 0) throw std::invalid_argument("loss_temporal: empty batch");
  std::vector<double> w(b.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(-2.0 * alpha * b.actions[i].norm());
  return ad::mean(ad::sum_rows(ad::square(detail::delta(b))) * detail::column(std::move(w)));
}

/// mean (||Δŝ_t2|| - ||Δŝ_t1||)^2 e^{-β||a_t1 - a_t2||^2}
inline Tensor loss_proportionality(const PairBatch& b, double beta) {
  detail::require_pairs(b, "loss_proportionality");
  auto norms = ad::l2_norm_rows(detail::delta(b));
  auto diff = ad::gather_rows(norms, b.second) - ad::gather_rows(norms, b.first);
  return ad::mean(ad::square(diff) * detail::action_pair_weights(b, beta));
}

/// mean ||Δŝ_t2 - Δŝ_t1||^2 e^{-||ŝ_t2 - ŝ_t1||^2} e^{-β||a_t1 - a_t2||^2}
inline Tensor loss_repeatability(const PairBatch& b, double beta) {
  detail::require_pairs(b, "loss_repeatability");
  auto d = detail::delta(b);
  auto change = ad::sum_rows(ad::square(ad::gather_rows(d, b.second) - ad::gather_rows(d, b.first)));
  auto similarity = ad::exp(-detail::pair_state_dist_sq(b));
  return ad::mean(change * similarity * detail::action_pair_weights(b, beta));
}

/// mean e^{-||ŝ_t2 - ŝ_t1||^2} e^{-β||a_t1 - a_t2||^2}
inline Tensor loss_causality(const PairBatch& b, double beta) {
  detail::require_pairs(b, "loss_causality");
  return ad::mean(ad::exp(-detail::pair_state_dist_sq(b)) * detail::action_pair_weights(b, beta));
}

struct PriorLosses {
  Tensor temporal;
  Tensor proportionality;
  Tensor repeatability;
  Tensor causality;
  Tensor regularization;  // lambda * sum ||W||^2, before the omega weight
  Tensor total;
};

inline Tensor weighted_total(const PriorLosses& l, const std::array<double, 5>& omega) {
  return omega[0] * l.temporal + omega[1] * l.proportionality + omega[2] * l.repeatability +
         omega[3] * l.causality + omega[4] * l.regularization;
}

/// Weighted sum of the four continuous-action priors and L2 weight regularization.
inline PriorLosses loss_total(const PairBatch& b, const PriorHyper& hyper, const Encoder& encoder) {
  hyper.validate();
  PriorLosses l;
  l.temporal = loss_temporal(b, hyper.alpha);
  l.proportionality = loss_proportionality(b, hyper.beta);
  l.repeatability = loss_repeatability(b, hyper.beta);
  l.causality = loss_causality(b, hyper.beta);
  l.regularization = hyper.lambda_reg * nn::weight_l2(encoder.weights());
  l.total = weighted_total(l, hyper.omega);
  return l;
}

/// Baseline: discrete-action priors where two actions count as "the same" when
/// ||a_t1 - a_t2|| <= threshold. Pair terms average over qualifying pairs only.
inline PriorLosses loss_original_priors(const PairBatch& b, double action_threshold, const PriorHyper& hyper,
                                        const Encoder& encoder) {
  detail::require_pairs(b, "loss_original_priors");
  if (action_threshold < 0) throw std::invalid_argument("loss_original_priors: threshold must be >= 0");
  std::vector<double> mask(b.pairs());
  std::size_t qualifying = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const double d = std::sqrt(detail::action_diff_sq(b.actions[b.first[i]], b.actions[b.second[i]]));
    mask[i] = d <= action_threshold ? 1.0 : 0.0;
    qualifying += mask[i] != 0.0;
  }
  PriorLosses l;
  auto d = detail::delta(b);
  l.temporal = ad::mean(ad::sum_rows(ad::square(d)));
  if (qualifying == 0) {
    spdlog::warn("original priors: no pair within action threshold {}; pair terms contribute 0", action_threshold);
    l.proportionality = l.repeatability = l.causality = Tensor::scalar(0.0);
  } else {
    const double inv = 1.0 / static_cast<double>(qualifying);
    auto m = detail::column(mask);
    auto norms = ad::l2_norm_rows(d);
    auto ndiff = ad::gather_rows(norms, b.second) - ad::gather_rows(norms, b.first);
    l.proportionality = inv * ad::sum(ad::square(ndiff) * m);
    auto similarity = ad::exp(-detail::pair_state_dist_sq(b));
    auto change = ad::sum_rows(ad::square(ad::gather_rows(d, b.second) - ad::gather_rows(d, b.first)));
    l.repeatability = inv * ad::sum(change * similarity * m);
    l.causality = inv * ad::sum(similarity * m);
  }
  l.regularization = hyper.lambda_reg * nn::weight_l2(encoder.weights());
  l.total = weighted_total(l, hyper.omega);
  return l;
}

}  // namespace srlnav::srl
