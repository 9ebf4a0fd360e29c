#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "srlnav/ad/checkpoint.hpp"
#include "srlnav/nn/layers.hpp"
#include "srlnav/sim/types.hpp"

namespace srlnav::srl {

using ad::Tensor;

struct EncoderConfig {
  std::size_t lidar_dim = 36;
  std::size_t patch_dim = 256;
  std::size_t lidar_hidden = 64;
  std::size_t lidar_features = 32;
  std::size_t patch_hidden = 64;
  std::size_t patch_features = 32;
  std::size_t merge_hidden = 64;
  std::size_t state_dim = 5;
};

/// Observation rows split by modality, as constant tensors.
struct ObservationBatch {
  Tensor lidar;  // (B, lidar_dim)
  Tensor patch;  // (B, patch_dim)

  std::size_t size() const { return lidar.rows(); }
};

template <class Range, class Get>
ObservationBatch make_observation_batch(const Range& items, Get get_obs) {
  const std::size_t n = std::size(items);
  if (n == 0) throw std::invalid_argument("observation batch must not be empty");
  const sim::Observation& first = get_obs(*std::begin(items));
  const std::size_t ld = first.lidar.size(), pd = first.patch.size();
  std::vector<double> lidar, patch;
  lidar.reserve(n * ld);
  patch.reserve(n * pd);
  for (const auto& item : items) {
    const sim::Observation& o = get_obs(item);
    if (o.lidar.size() != ld || o.patch.size() != pd)
      throw std::invalid_argument("observation batch: inconsistent observation dimensions");
    lidar.insert(lidar.end(), o.lidar.begin(), o.lidar.end());
    patch.insert(patch.end(), o.patch.begin(), o.patch.end());
  }
  return {Tensor::matrix(n, ld, std::move(lidar)), Tensor::matrix(n, pd, std::move(patch))};
}

inline ObservationBatch make_observation_batch(std::span<const sim::Observation> obs) {
  return make_observation_batch(obs, [](const sim::Observation& o) -> const sim::Observation& { return o; });
}

/// Two-branch observation encoder. LiDAR and occupancy patch are processed by
/// separate relu stacks, joined, and mapped to a low-dimensional state.
class Encoder {
 public:
  Encoder() = default;

  static Encoder create(const EncoderConfig& cfg, Rng& rng, nn::Init init = nn::Init::uniform_fan_in) {
    using nn::Activation;
    Encoder e;
    e.cfg_ = cfg;
    e.lidar_ = nn::Mlp({cfg.lidar_dim, cfg.lidar_hidden, cfg.lidar_features}, Activation::relu, Activation::relu, rng, init);
    e.patch_ = nn::Mlp({cfg.patch_dim, cfg.patch_hidden, cfg.patch_features}, Activation::relu, Activation::relu, rng, init);
    e.merge_ = nn::Mlp({cfg.lidar_features + cfg.patch_features, cfg.merge_hidden, cfg.state_dim}, Activation::relu,
                       Activation::identity, rng, init);
    return e;
  }

  const EncoderConfig& config() const { return cfg_; }
  std::size_t state_dim() const { return cfg_.state_dim; }

  Tensor forward(const ObservationBatch& batch, bool frozen = false) const {
    if (batch.lidar.cols() != cfg_.lidar_dim || batch.patch.cols() != cfg_.patch_dim)
      throw ad::ShapeError("encoder expects observations of " + std::to_string(cfg_.lidar_dim) + "+" +
                           std::to_string(cfg_.patch_dim) + " values, got " + std::to_string(batch.lidar.cols()) +
                           "+" + std::to_string(batch.patch.cols()));
    auto a = lidar_.forward(batch.lidar, frozen);
    auto b = patch_.forward(batch.patch, frozen);
    return merge_.forward(ad::concat_rows(a, b), frozen);
  }

  /// Deterministic single-observation forward pass with no gradient recording.
  std::vector<double> encode(const sim::Observation& obs) const {
    std::span<const sim::Observation> one(&obs, 1);
    return forward(make_observation_batch(one), true).values();
  }

  /// Row-major (N, state_dim) encodings.
  std::vector<double> encode_batch(std::span<const sim::Observation> obs) const {
    return forward(make_observation_batch(obs), true).values();
  }

  std::vector<Tensor> parameters() const {
    std::vector<Tensor> out;
    for (const auto* m : {&lidar_, &patch_, &merge_}) {
      auto p = m->parameters();
      out.insert(out.end(), p.begin(), p.end());
    }
    return out;
  }

  std::vector<Tensor> weights() const {
    std::vector<Tensor> out;
    for (const auto* m : {&lidar_, &patch_, &merge_}) {
      auto p = m->weights();
      out.insert(out.end(), p.begin(), p.end());
    }
    return out;
  }

  void append_named(const std::string& prefix, ad::NamedTensors& out) const {
    lidar_.append_named(prefix + ".lidar", out);
    patch_.append_named(prefix + ".patch", out);
    merge_.append_named(prefix + ".merge", out);
  }

  ad::NamedTensors named_parameters(const std::string& prefix = "encoder") const {
    ad::NamedTensors out;
    append_named(prefix, out);
    return out;
  }

  Encoder clone() const {
    Encoder e;
    e.cfg_ = cfg_;
    e.lidar_ = lidar_.clone();
    e.patch_ = patch_.clone();
    e.merge_ = merge_.clone();
    return e;
  }

 private:
  EncoderConfig cfg_;
  nn::Mlp lidar_;
  nn::Mlp patch_;
  nn::Mlp merge_;
};

}  // namespace srlnav::srl
